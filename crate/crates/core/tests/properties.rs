mod common;

use bmrf::decomp::{
    build_cover, build_generic_cover, compute_supergradient, dual_ascent, dual_objective,
    solve_bottleneck_coupling, solve_tree_mrf, CoverIndex, DualConfig, DualEvaluator, DualState,
    LocalCosts, SubTree,
};
use bmrf::exact::{
    chain_to_dag, select_optimal_bottleneck, solve_chain, solve_chain_bottleneck, solve_unary,
    ChainProblem, ChainSolver, Direction, DistanceState, UnaryProblem, UnarySolver,
};
use bmrf::format::{format_instance, parse_instance};
use bmrf::oracle::{brute_force, generate, InstanceKind};
use bmrf::rounding::{
    chain_min_marginals, min_marginal_tables, propagate_to_mrf, round_duals, NodeOrder, OrderKind,
};
use bmrf::{BottleneckCost, BottleneckInstance, Execution, Graph, Labeling, ZetaEnvelope};
use common::{close, dag_distances, enumerate_chain, exhaustive_coupling, two_chains};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn labelings(counts: &[usize]) -> impl Iterator<Item = Labeling> + '_ {
    let total: usize = counts.iter().product();
    (0..total).map(move |mut code| {
        let mut x = vec![0; counts.len()];
        for i in (0..counts.len()).rev() {
            x[i] = code % counts[i];
            code /= counts[i];
        }
        Labeling(x)
    })
}

fn with_random_zeta(inst: BottleneckInstance, pick: u8, seed: u64) -> BottleneckInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeta = match pick % 3 {
        0 => BottleneckCost::Zero,
        1 => BottleneckCost::Linear(rng.gen_range(0.0..3.0)),
        _ => BottleneckCost::Table(
            inst.bottleneck_values()
                .values()
                .iter()
                .map(|&b| (b, rng.gen_range(0.0..2.0)))
                .collect(),
        ),
    };
    inst.with_zeta(zeta).unwrap()
}

fn small_kind() -> impl Strategy<Value = InstanceKind> {
    prop_oneof![
        (1..=6usize, 1..=4usize).prop_map(|(n, k)| InstanceKind::RandomChain { n, k }),
        (1..=3usize, 1..=3usize, 1..=3usize).prop_map(|(rows, cols, k)| InstanceKind::RandomGrid {
            rows,
            cols,
            k
        }),
        (1..=6usize, 1..=3usize).prop_map(|(n, k)| InstanceKind::RandomTree { n, k }),
        (1..=5usize, 1..=4usize).prop_map(|(n, k)| InstanceKind::RandomUnary { n, k }),
    ]
}

fn instance() -> impl Strategy<Value = BottleneckInstance> {
    (small_kind(), any::<u64>(), any::<u8>()).prop_map(|(kind, seed, pick)| {
        with_random_zeta(generate(kind, seed).unwrap(), pick, seed ^ 0x5eed)
    })
}

fn chain_instance() -> impl Strategy<Value = BottleneckInstance> {
    (1..=6usize, 1..=4usize, any::<u64>(), any::<u8>()).prop_map(|(n, k, seed, pick)| {
        with_random_zeta(
            generate(InstanceKind::RandomChain { n, k }, seed).unwrap(),
            pick,
            !seed,
        )
    })
}

fn small_grid_or_tree() -> impl Strategy<Value = BottleneckInstance> {
    prop_oneof![
        (2..=3usize, 2..=3usize, 2..=3usize).prop_map(|(rows, cols, k)| InstanceKind::RandomGrid {
            rows,
            cols,
            k
        }),
        (3..=6usize, 2..=3usize).prop_map(|(n, k)| InstanceKind::RandomTree { n, k }),
    ]
    .prop_flat_map(|kind| (Just(kind), any::<u64>(), any::<u8>()))
    .prop_map(|(kind, seed, pick)| {
        with_random_zeta(generate(kind, seed).unwrap(), pick, seed.rotate_left(7))
    })
}

/// Inner product over entries that are finite in `at`.
fn dot(at: &DualState, a: &DualState, b: &DualState) -> f64 {
    let mut s = 0.0;
    for (side, (sa, sb)) in [
        (&at.lambda, (&a.lambda, &b.lambda)),
        (&at.eta, (&a.eta, &b.eta)),
    ] {
        for ((c, ca), cb) in side.iter().zip(sa).zip(sb) {
            let rows = c.unary.iter().chain(&c.pairwise);
            let ra = ca.unary.iter().chain(&ca.pairwise);
            let rb = cb.unary.iter().chain(&cb.pairwise);
            for ((r, x), y) in rows.zip(ra).zip(rb) {
                for ((v, p), q) in r.iter().zip(x).zip(y) {
                    if v.is_finite() {
                        s += p * q;
                    }
                }
            }
        }
    }
    s
}

/// A zero-sum direction built from arbitrary per-subproblem labelings.
fn random_direction(
    inst: &BottleneckInstance,
    cover: &bmrf::decomp::Cover,
    duals: &DualState,
    seed: u64,
) -> DualState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = inst.label_counts();
    let trees: Vec<Vec<usize>> = (0..cover.trees.len())
        .map(|_| counts.iter().map(|&k| rng.gen_range(0..k)).collect())
        .collect();
    let chains: Vec<Labeling> = cover
        .chains
        .iter()
        .map(|c| {
            Labeling(
                c.nodes
                    .iter()
                    .map(|&v| rng.gen_range(0..counts[v]))
                    .collect(),
            )
        })
        .collect();
    compute_supergradient(inst, cover, duals, &trees, &chains)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn format_round_trip_is_exact(inst in instance()) {
        let text = format_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(format_instance(&back), text);
    }

    #[test]
    fn restriction_is_monotone(inst in instance(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let values = inst.bottleneck_values().values().to_vec();
        let (mut b1, mut b2) = (values[i.index(values.len())], values[j.index(values.len())]);
        if b1 > b2 {
            std::mem::swap(&mut b1, &mut b2);
        }
        let (lo, hi) = (inst.restrict_to_bottleneck(b1), inst.restrict_to_bottleneck(b2));
        prop_assert_eq!(lo.phi(), inst.phi());
        prop_assert_eq!(lo.zeta(), inst.zeta());
        for x in labelings(inst.label_counts()) {
            let c = lo.linear_cost(&x).unwrap();
            if c.is_finite() {
                prop_assert!(hi.linear_cost(&x).unwrap().is_finite());
                prop_assert_eq!(c, inst.linear_cost(&x).unwrap());
                prop_assert!(inst.bottleneck_of(&x).unwrap() <= b1);
            }
        }
    }

    #[test]
    fn energy_is_sum_of_terms(inst in instance(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<usize> = inst.label_counts().iter().map(|&k| rng.gen_range(0..k)).collect();
        let (theta, phi) = (inst.theta(), inst.phi());
        let mut cost = 0.0;
        let mut b = f64::NEG_INFINITY;
        for (i, &l) in x.iter().enumerate() {
            cost += theta.unary[i][l];
            b = b.max(phi.unary[i][l]);
        }
        for (e, &(i, j)) in inst.graph().edges().iter().enumerate() {
            let idx = x[i] * inst.label_counts()[j] + x[j];
            cost += theta.pairwise[e][idx];
            b = b.max(phi.pairwise[e][idx]);
        }
        let x = Labeling(x);
        prop_assert_eq!(inst.bottleneck_of(&x).unwrap(), b);
        let want = cost + inst.zeta().eval(b).unwrap();
        let got = inst.evaluate_energy(&x).unwrap();
        prop_assert!(close(got, want, 1e-12), "{} vs {}", got, want);
    }

    #[test]
    fn zero_zeta_is_plain_map(inst in instance()) {
        let inst = inst.with_zeta(BottleneckCost::Zero).unwrap();
        let top = inst.bottleneck_values().max().unwrap();
        let relaxed = inst.restrict_to_bottleneck(top);
        let map = labelings(inst.label_counts())
            .map(|x| relaxed.linear_cost(&x).unwrap())
            .fold(f64::INFINITY, f64::min);
        prop_assert!(close(brute_force(&inst).unwrap().energy, map, 1e-12));
    }

    #[test]
    fn chain_profile_matches_enumeration(inst in chain_instance()) {
        let p = ChainProblem::from_instance(&inst).unwrap();
        let values = inst.bottleneck_values();
        let m = solve_chain_bottleneck(&p).unwrap();
        for w in m.entries().windows(2) {
            prop_assert!(w[0].0 < w[1].0);
            prop_assert!(w[0].1 >= w[1].1);
        }
        let all = enumerate_chain(&p);
        for &b in values.values() {
            prop_assert!(m.entries().iter().all(|e| values.values().contains(&e.0)));
            let want = all.iter().filter(|l| l.2 <= b).map(|l| l.1).fold(f64::INFINITY, f64::min);
            let got = m.value_at(b).unwrap_or(f64::INFINITY);
            prop_assert!(close(got, want, 1e-9), "b={}: {} vs {}", b, got, want);
        }
        let exact = solve_chain(&inst).unwrap();
        let brute = brute_force(&inst).unwrap();
        prop_assert!(close(exact.energy, brute.energy, 1e-9), "{} vs {}", exact.energy, brute.energy);
        // b is free above the labeling's bottleneck, so energy uses the realized b
        prop_assert!(inst.bottleneck_of(&exact.labeling).unwrap() <= exact.bottleneck);
        prop_assert!(close(inst.linear_cost(&exact.labeling).unwrap(), exact.linear_cost, 1e-9));
        let realized = exact.linear_cost + inst.zeta().eval(exact.bottleneck).unwrap();
        prop_assert!(close(realized, exact.energy, 1e-9));
        prop_assert!(inst.evaluate_energy(&exact.labeling).unwrap() >= exact.energy - 1e-9);
        let chosen = select_optimal_bottleneck(&m, &inst.zeta_envelope()).unwrap();
        prop_assert!(close(chosen.objective, brute.energy, 1e-9));
    }

    #[test]
    fn unary_profile_matches_enumeration(n in 1..=5usize, k in 1..=4usize, seed in any::<u64>(), pick in any::<u8>()) {
        let inst = with_random_zeta(generate(InstanceKind::RandomUnary { n, k }, seed).unwrap(), pick, seed);
        let p = UnaryProblem::from_instance(&inst).unwrap();
        let solver = UnarySolver::new(&p.phi);
        let m = solver.solve(&p.theta).unwrap();
        for w in m.entries().windows(2) {
            prop_assert!(w[0].0 < w[1].0 && w[0].1 >= w[1].1);
        }
        for &b in inst.bottleneck_values().values() {
            let mut want = 0.0;
            for i in 0..n {
                want += (0..k)
                    .filter(|&l| p.phi[i][l] <= b)
                    .map(|l| p.theta[i][l])
                    .fold(f64::INFINITY, f64::min);
            }
            let got = m.value_at(b).unwrap_or(f64::INFINITY);
            prop_assert!(close(got, want, 1e-9), "b={}: {} vs {}", b, got, want);
        }
        let exact = solve_unary(&inst).unwrap();
        prop_assert!(close(exact.energy, brute_force(&inst).unwrap().energy, 1e-9));
        let shifted: Vec<Vec<f64>> = p.theta.iter().map(|r| r.iter().map(|v| v + 1.0).collect()).collect();
        solver.solve(&shifted).unwrap();
        prop_assert_eq!(solver.sort_count(), 1);
    }

    #[test]
    fn dsp_matches_recomputation(n in 1..=5usize, k in 1..=3usize, seed in any::<u64>()) {
        let inst = generate(InstanceKind::RandomChain { n, k }, seed).unwrap();
        let dag = chain_to_dag(&ChainProblem::from_instance(&inst).unwrap()).unwrap();
        let mut arcs: Vec<usize> = (0..dag.arc_count()).filter(|&a| dag.arc(a).sigma.is_finite()).collect();
        arcs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        for dir in [Direction::Forward, Direction::Backward] {
            let mut state = DistanceState::new(&dag, dir);
            prop_assert_eq!(state.distances(), &dag_distances(&dag, state.active_arcs(), dir)[..]);
            for &a in &arcs {
                let changed = state.insert(&dag, a);
                let want = dag_distances(&dag, state.active_arcs(), dir);
                prop_assert_eq!(state.distances(), &want[..]);
                for &w in &changed {
                    prop_assert!(want[w].is_finite());
                }
            }
            let arcs = dag.arc_count() as u64;
            prop_assert!(state.relaxations() <= arcs * arcs);
        }
    }

    #[test]
    fn chain_solver_sorts_once(n in 1..=5usize, k in 1..=3usize, seed in any::<u64>()) {
        let inst = generate(InstanceKind::RandomChain { n, k }, seed).unwrap();
        let mut p = ChainProblem::from_instance(&inst).unwrap();
        let mut solver = ChainSolver::new(&p).unwrap();
        let first = solver.profile().unwrap();
        for row in p.unary_cost.iter_mut() {
            for v in row.iter_mut() {
                *v *= 2.0;
            }
        }
        solver.set_costs(&p);
        let second = solver.profile().unwrap();
        prop_assert_eq!(solver.stats().sorts, 1);
        prop_assert_eq!(solver.stats().solves, 2);
        prop_assert_eq!(&second, &solve_chain_bottleneck(&p).unwrap());
        prop_assert_eq!(first.is_empty(), second.is_empty());
    }

    #[test]
    fn tree_dp_matches_enumeration(n in 1..=6usize, k in 1..=3usize, seed in any::<u64>()) {
        let inst = generate(InstanceKind::RandomTree { n, k }, seed).unwrap();
        let g = inst.graph();
        let tree = SubTree { nodes: (0..n).collect(), edges: (0..g.edge_count()).collect() };
        let costs = LocalCosts { unary: inst.theta().unary.clone(), pairwise: inst.theta().pairwise.clone() };
        let s = solve_tree_mrf(g, inst.label_counts(), &tree, &costs).unwrap();
        let best = labelings(inst.label_counts())
            .map(|x| inst.linear_cost(&x).unwrap())
            .fold(f64::INFINITY, f64::min);
        prop_assert!(close(s.value, best, 1e-12));
        prop_assert!(close(inst.linear_cost(&Labeling(s.labels)).unwrap(), best, 1e-12));
    }

    #[test]
    fn generic_cover_is_valid(n in 1..=9usize, extra in prop::collection::vec((0..9usize, 0..9usize), 0..12), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
        for (a, b) in extra {
            let (a, b) = (a % n, b % n);
            if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                edges.push((a.min(b), a.max(b)));
            }
        }
        let g = Graph::new(n, &edges).unwrap();
        let cover = build_generic_cover(&g).unwrap();
        cover.validate(&g).unwrap();
        let index = CoverIndex::new(&g, &cover);
        for v in 0..n {
            prop_assert!(index.trees_covering_node(v).count() >= 1);
        }
    }

    #[test]
    fn coupling_matches_exhaustive(seed in any::<u64>()) {
        let tc = two_chains(seed);
        let problems = bmrf::decomp::chain_problems(&tc.inst, &tc.cover, &tc.duals);
        let s = solve_bottleneck_coupling(&problems, &tc.inst.zeta_envelope()).unwrap();
        let values = tc.inst.bottleneck_values();
        let want = exhaustive_coupling(&problems, tc.inst.zeta(), values.values());
        prop_assert!(close(s.value, want, 1e-9), "{} vs {}", s.value, want);
        let mut attained = tc.inst.zeta().eval(s.bottleneck).unwrap();
        for (p, x) in problems.iter().zip(&s.labelings) {
            let (c, b) = p.evaluate(&x.0);
            prop_assert!(b <= s.bottleneck);
            attained += c;
        }
        prop_assert!(close(attained, want, 1e-9));
    }

    #[test]
    fn min_marginals_agree_with_coupling(seed in any::<u64>()) {
        let tc = two_chains(seed);
        let problems = bmrf::decomp::chain_problems(&tc.inst, &tc.cover, &tc.duals);
        let values = tc.inst.bottleneck_values();
        let j = exhaustive_coupling(&problems, tc.inst.zeta(), values.values());
        let (tables, _) = min_marginal_tables(&tc.inst, &tc.cover, &tc.duals, Execution::Sequential).unwrap();
        for (u, table) in &tables {
            let want = common::brute_min_marginals(&problems, *u, tc.inst.zeta(), values.values());
            for (row, wrow) in table.values.iter().zip(&want) {
                for (&v, &w) in row.iter().zip(wrow) {
                    prop_assert!(close(v, w, 1e-9), "{} vs {}", v, w);
                }
            }
            for m in table.node_minima() {
                prop_assert!(close(m, j, 1e-9));
            }
        }
    }

    #[test]
    fn propagation_keeps_the_bound(seed in any::<u64>(), damping in 0.05f64..=1.0) {
        let tc = two_chains(seed);
        let before = dual_objective(&tc.inst, &tc.cover, &tc.duals).unwrap();
        let (tables, _) = min_marginal_tables(&tc.inst, &tc.cover, &tc.duals, Execution::Sequential).unwrap();
        let mut duals = tc.duals.clone();
        let index = CoverIndex::new(tc.inst.graph(), &tc.cover);
        propagate_to_mrf(&tc.cover, &index, &mut duals, &tables, damping).unwrap();
        let after = dual_objective(&tc.inst, &tc.cover, &duals).unwrap();
        prop_assert!(after >= before - 1e-9, "{} -> {}", before, after);
        prop_assert!(duals.reparameterization_error(&tc.inst, &tc.cover) <= 1e-9);
    }

    #[test]
    fn zero_zeta_min_marginals_are_ordinary(n in 1..=5usize, k in 1..=3usize, seed in any::<u64>()) {
        let inst = generate(InstanceKind::RandomChain { n, k }, seed).unwrap();
        let p = ChainProblem::from_instance(&inst).unwrap();
        let m = chain_min_marginals(&p, None, &ZetaEnvelope::monotone(&BottleneckCost::Zero)).unwrap();
        // clamp node u to label y by forbidding its other labels, then run the tree DP
        let g = inst.graph();
        let tree = SubTree { nodes: (0..n).collect(), edges: (0..g.edge_count()).collect() };
        for u in 0..n {
            for y in 0..k {
                let mut costs = LocalCosts { unary: p.unary_cost.clone(), pairwise: p.pairwise_cost.clone() };
                for (l, v) in costs.unary[u].iter_mut().enumerate() {
                    if l != y {
                        *v = f64::INFINITY;
                    }
                }
                let want = solve_tree_mrf(g, inst.label_counts(), &tree, &costs).map(|s| s.value).unwrap_or(f64::INFINITY);
                prop_assert!(close(m.values[u][y], want, 1e-9), "{} vs {}", m.values[u][y], want);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weak_duality_under_zero_sum_moves(inst in small_grid_or_tree(), seed in any::<u64>(), step in -3.0f64..3.0) {
        let cover = build_cover(inst.graph()).unwrap();
        let mut duals = DualState::initial(&inst, &cover);
        let dir = random_direction(&inst, &cover, &duals, seed);
        duals.add_scaled(step, &dir);
        let dir = random_direction(&inst, &cover, &duals, !seed);
        duals.add_scaled(step * 0.5, &dir);
        prop_assert!(duals.reparameterization_error(&inst, &cover) <= 1e-9);
        let bound = dual_objective(&inst, &cover, &duals).unwrap();
        let opt = brute_force(&inst).unwrap().energy;
        prop_assert!(bound <= opt + 1e-9 * opt.abs().max(1.0), "{} > {}", bound, opt);
    }

    #[test]
    fn supergradient_inequality(inst in small_grid_or_tree(), seed in any::<u64>(), step in -1.0f64..1.0) {
        let cover = build_cover(inst.graph()).unwrap();
        let mut x = DualState::initial(&inst, &cover);
        x.add_scaled(0.7, &random_direction(&inst, &cover, &x, seed));
        let mut eval = DualEvaluator::new(&inst, &cover, Execution::Sequential).unwrap();
        let at = eval.evaluate(&x).unwrap();
        let g = compute_supergradient(&inst, &cover, &x, &at.tree_labels, &at.coupling.labelings);
        let d = random_direction(&inst, &cover, &x, seed.wrapping_add(1));
        let mut y = x.clone();
        y.add_scaled(step, &d);
        let ly = eval.evaluate(&y).unwrap().bound;
        let rhs = at.bound + step * dot(&x, &g, &d);
        prop_assert!(ly <= rhs + 1e-9 * rhs.abs().max(1.0), "{} > {}", ly, rhs);
    }

    #[test]
    fn ascent_keeps_invariants(inst in small_grid_or_tree()) {
        let cover = build_cover(inst.graph()).unwrap();
        let config = DualConfig { max_iters: 60, ..DualConfig::default() };
        let r = dual_ascent(&inst, &cover, &config).unwrap();
        prop_assert!(r.duals.reparameterization_error(&inst, &cover) <= 1e-9);
        for w in r.trace.windows(2) {
            prop_assert!(w[1].best_bound >= w[0].best_bound);
        }
        prop_assert!(close(dual_objective(&inst, &cover, &r.duals).unwrap(), r.lower_bound, 1e-12));
        let opt = brute_force(&inst).unwrap().energy;
        prop_assert!(r.lower_bound <= opt + 1e-9 * opt.abs().max(1.0));
        if let Ok(x) = round_duals(&inst, &cover, &r.duals, &NodeOrder::for_graph(inst.graph(), OrderKind::Auto), None) {
            prop_assert!(x.energy >= r.lower_bound - 1e-9);
        }
    }

    #[test]
    fn trivial_cover_is_tight_on_chains(inst in chain_instance()) {
        let cover = build_cover(inst.graph()).unwrap();
        prop_assert_eq!((cover.trees.len(), cover.chains.len()), (1, 1));
        let r = dual_ascent(&inst, &cover, &DualConfig::default()).unwrap();
        let opt = solve_chain(&inst).unwrap().energy;
        prop_assert!((opt - r.lower_bound) / opt.abs().max(1.0) <= 1e-6, "bound {} opt {}", r.lower_bound, opt);
    }

    #[test]
    fn rounding_respects_the_order(inst in small_grid_or_tree()) {
        let order = NodeOrder::for_graph(inst.graph(), OrderKind::Bfs);
        let theta = inst.theta().clone();
        if let Ok(x) = bmrf::rounding::primal_round(inst.graph(), inst.label_counts(), &theta, &order) {
            inst.check_labeling(&x).unwrap();
            prop_assert!(inst.linear_cost(&x).unwrap().is_finite());
        }
    }
}
