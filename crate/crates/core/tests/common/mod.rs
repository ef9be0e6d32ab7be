//! Independent oracles shared by the integration tests. Nothing here calls
//! the solvers under test.
#![allow(dead_code)]

use bmrf::decomp::{Cover, DualState, SubChain, SubTree};
use bmrf::exact::{ChainProblem, Direction, LayeredDag};
use bmrf::{BottleneckCost, BottleneckInstance, FactorCosts, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Every labeling of a chain with its linear cost and bottleneck.
pub fn enumerate_chain(p: &ChainProblem) -> Vec<(Vec<usize>, f64, f64)> {
    let n = p.label_counts.len();
    let mut out = Vec::new();
    let mut y = vec![0; n];
    loop {
        let mut cost = 0.0;
        let mut b = f64::NEG_INFINITY;
        for i in 0..n {
            cost += p.unary_cost[i][y[i]];
            b = b.max(p.unary_phi[i][y[i]]);
            if i + 1 < n {
                let idx = y[i] * p.label_counts[i + 1] + y[i + 1];
                cost += p.pairwise_cost[i][idx];
                b = b.max(p.pairwise_phi[i][idx]);
            }
        }
        out.push((y.clone(), cost, b));
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            y[i] += 1;
            if y[i] < p.label_counts[i] {
                break;
            }
            y[i] = 0;
        }
    }
}

fn cheapest_within(labelings: &[(Vec<usize>, f64, f64)], b: f64) -> f64 {
    labelings
        .iter()
        .filter(|l| l.2 <= b)
        .map(|l| l.1)
        .fold(f64::INFINITY, f64::min)
}

/// `min_{b in values} zeta(b) + sum_l min { cost_l(y) : bottleneck_l(y) <= b }`
/// by enumeration, evaluating `zeta` directly.
pub fn exhaustive_coupling(
    problems: &[ChainProblem],
    zeta: &BottleneckCost,
    values: &[f64],
) -> f64 {
    let all: Vec<_> = problems.iter().map(enumerate_chain).collect();
    values
        .iter()
        .map(|&b| {
            let z = zeta.eval(b).unwrap_or(f64::INFINITY);
            z + all.iter().map(|l| cheapest_within(l, b)).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Min-marginals of chain `u` in the coupled problem, by enumeration.
pub fn brute_min_marginals(
    problems: &[ChainProblem],
    u: usize,
    zeta: &BottleneckCost,
    values: &[f64],
) -> Vec<Vec<f64>> {
    let all: Vec<_> = problems.iter().map(enumerate_chain).collect();
    let mut m: Vec<Vec<f64>> = problems[u]
        .label_counts
        .iter()
        .map(|&k| vec![f64::INFINITY; k])
        .collect();
    for &b in values {
        let z = zeta.eval(b).unwrap_or(f64::INFINITY);
        let rest: f64 = all
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != u)
            .map(|(_, l)| cheapest_within(l, b))
            .sum();
        for (y, cost, bott) in &all[u] {
            if *bott > b {
                continue;
            }
            let v = z + cost + rest;
            for (i, &yi) in y.iter().enumerate() {
                if v < m[i][yi] {
                    m[i][yi] = v;
                }
            }
        }
    }
    m
}

/// Shortest distances over the active arcs, recomputed from scratch in
/// topological (node id) order.
pub fn dag_distances(dag: &LayeredDag, active: &[bool], dir: Direction) -> Vec<f64> {
    let n = dag.node_count();
    let mut d = vec![f64::INFINITY; n];
    match dir {
        Direction::Forward => {
            d[dag.source()] = 0.0;
            for w in 0..n {
                for &a in dag.in_arcs(w) {
                    let arc = dag.arc(a);
                    if active[a] {
                        d[w] = d[w].min(d[arc.tail] + arc.sigma);
                    }
                }
            }
        }
        Direction::Backward => {
            d[dag.sink()] = 0.0;
            for w in (0..n).rev() {
                for &a in dag.out_arcs(w) {
                    let arc = dag.arc(a);
                    if active[a] {
                        d[w] = d[w].min(arc.sigma + d[arc.head]);
                    }
                }
            }
        }
    }
    d
}

/// Two disjoint chains, each its own tree and its own chain, with duals
/// moved off the initial split at random.
pub struct TwoChains {
    pub inst: BottleneckInstance,
    pub cover: Cover,
    pub duals: DualState,
}

pub fn two_chains(seed: u64) -> TwoChains {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = rng.gen_range(1..=4);
    let n2 = rng.gen_range(1..=4);
    let n = n1 + n2;
    let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let mut edges = Vec::new();
    edges.extend((1..n1).map(|i| (i - 1, i)));
    edges.extend((n1 + 1..n).map(|i| (i - 1, i)));
    let graph = Graph::new(n, &edges).unwrap();
    let planted: Vec<usize> = counts.iter().map(|&k| rng.gen_range(0..k)).collect();
    let mut theta = FactorCosts::zeros(&graph, &counts);
    let mut phi = FactorCosts::zeros(&graph, &counts);
    // coarse values so that thresholds tie often
    let grid = |rng: &mut ChaCha8Rng| f64::from(rng.gen_range(0..8u8)) / 4.0;
    for (i, &k) in counts.iter().enumerate() {
        for x in 0..k {
            theta.unary[i][x] = rng.gen();
            phi.unary[i][x] = grid(&mut rng);
        }
    }
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        for xi in 0..counts[i] {
            for xj in 0..counts[j] {
                let idx = xi * counts[j] + xj;
                theta.pairwise[e][idx] =
                    if rng.gen_bool(0.15) && (xi, xj) != (planted[i], planted[j]) {
                        f64::INFINITY
                    } else {
                        rng.gen()
                    };
                phi.pairwise[e][idx] = grid(&mut rng);
            }
        }
    }
    let zeta = match rng.gen_range(0..4) {
        0 => BottleneckCost::Zero,
        1 => BottleneckCost::Linear(f64::from(rng.gen_range(0..3u8)) / 2.0),
        _ => {
            // arbitrary, usually non-monotone costs on exactly the values in B
            let mut keys: Vec<f64> = phi
                .unary
                .iter()
                .chain(&phi.pairwise)
                .flatten()
                .copied()
                .collect();
            keys.sort_by(f64::total_cmp);
            keys.dedup();
            BottleneckCost::Table(
                keys.into_iter()
                    .map(|b| (b, rng.gen_range(0.0..2.0)))
                    .collect(),
            )
        }
    };
    let inst = BottleneckInstance::new(graph.clone(), counts, theta, phi, zeta).unwrap();
    let path = |nodes: Vec<usize>| {
        let edges: Vec<usize> = nodes
            .windows(2)
            .map(|w| graph.edge_index(w[0], w[1]).unwrap())
            .collect();
        (nodes, edges)
    };
    let (a_nodes, a_edges) = path((0..n1).collect());
    let (b_nodes, b_edges) = path((n1..n).collect());
    let cover = Cover {
        trees: vec![
            SubTree {
                nodes: a_nodes.clone(),
                edges: a_edges.clone(),
            },
            SubTree {
                nodes: b_nodes.clone(),
                edges: b_edges.clone(),
            },
        ],
        chains: vec![
            SubChain {
                nodes: a_nodes,
                edges: a_edges,
            },
            SubChain {
                nodes: b_nodes,
                edges: b_edges,
            },
        ],
    };
    let mut duals = DualState::initial(&inst, &cover);
    perturb(&mut duals, &mut rng);
    TwoChains { inst, cover, duals }
}

/// Moves `r` from each tree entry to the matching chain entry. Valid when
/// tree `t` and chain `t` cover the same factors in the same order.
fn perturb(duals: &mut DualState, rng: &mut ChaCha8Rng) {
    for (lam, eta) in duals.lambda.iter_mut().zip(duals.eta.iter_mut()) {
        let pairs = lam
            .unary
            .iter_mut()
            .zip(eta.unary.iter_mut())
            .chain(lam.pairwise.iter_mut().zip(eta.pairwise.iter_mut()));
        for (l, e) in pairs {
            for (lv, ev) in l.iter_mut().zip(e.iter_mut()) {
                if lv.is_finite() {
                    let r: f64 = rng.gen_range(-1.0..1.0);
                    *lv += r;
                    *ev -= r;
                }
            }
        }
    }
}
