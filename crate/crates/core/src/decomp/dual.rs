use std::collections::HashMap;

use crate::decomp::cover::{Cover, SubChain};
use crate::exact::ChainProblem;
use crate::model::{BottleneckInstance, FactorCosts, Graph};

/// Costs of one subproblem, aligned with its node and edge lists. Pairwise
/// tables use the graph's canonical `(i, j)` orientation, row-major in `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCosts {
    pub unary: Vec<Vec<f64>>,
    pub pairwise: Vec<Vec<f64>>,
}

impl LocalCosts {
    fn zeros_like(&self) -> Self {
        Self {
            unary: self.unary.iter().map(|u| vec![0.0; u.len()]).collect(),
            pairwise: self.pairwise.iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.unary.iter().chain(&self.pairwise).flatten()
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.unary.iter_mut().chain(&mut self.pairwise).flatten()
    }
}

/// Which subproblem covers a factor, and where in its local tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Tree { tree: usize, local: usize },
    Chain { chain: usize, local: usize },
}

/// Reverse index from factors to the subproblems covering them.
#[derive(Debug, Clone)]
pub struct CoverIndex {
    pub node_slots: Vec<Vec<Slot>>,
    pub edge_slots: Vec<Vec<Slot>>,
    /// Per tree and local edge, the local indices of the edge's `(i, j)`.
    pub tree_edge_ends: Vec<Vec<(usize, usize)>>,
    /// Same for chains.
    pub chain_edge_ends: Vec<Vec<(usize, usize)>>,
}

impl CoverIndex {
    pub fn new(graph: &Graph, cover: &Cover) -> Self {
        let mut node_slots = vec![Vec::new(); graph.node_count()];
        let mut edge_slots = vec![Vec::new(); graph.edge_count()];
        for (t, tree) in cover.trees.iter().enumerate() {
            for (local, &v) in tree.nodes.iter().enumerate() {
                node_slots[v].push(Slot::Tree { tree: t, local });
            }
            for (local, &e) in tree.edges.iter().enumerate() {
                edge_slots[e].push(Slot::Tree { tree: t, local });
            }
        }
        for (l, chain) in cover.chains.iter().enumerate() {
            for (local, &v) in chain.nodes.iter().enumerate() {
                node_slots[v].push(Slot::Chain { chain: l, local });
            }
            for (local, &e) in chain.edges.iter().enumerate() {
                edge_slots[e].push(Slot::Chain { chain: l, local });
            }
        }
        let ends = |nodes: &[usize], edges: &[usize]| -> Vec<(usize, usize)> {
            let local: HashMap<usize, usize> =
                nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            edges
                .iter()
                .map(|&e| {
                    let (i, j) = graph.edge(e);
                    (local[&i], local[&j])
                })
                .collect()
        };
        Self {
            node_slots,
            edge_slots,
            tree_edge_ends: cover
                .trees
                .iter()
                .map(|t| ends(&t.nodes, &t.edges))
                .collect(),
            chain_edge_ends: cover
                .chains
                .iter()
                .map(|c| ends(&c.nodes, &c.edges))
                .collect(),
        }
    }

    pub fn trees_covering_node(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.node_slots[v].iter().filter_map(|s| match *s {
            Slot::Tree { tree, local } => Some((tree, local)),
            Slot::Chain { .. } => None,
        })
    }
}

/// Lagrange multipliers: `lambda[t]` for tree `t`, `eta[l]` for chain `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: Vec<LocalCosts>,
    pub eta: Vec<LocalCosts>,
}

impl DualState {
    /// `theta` split equally among the covering trees, `eta = 0`. Forbidden
    /// entries (`theta = inf`) are infinite in every subproblem.
    pub fn initial(inst: &BottleneckInstance, cover: &Cover) -> Self {
        let graph = inst.graph();
        let index = CoverIndex::new(graph, cover);
        let theta = inst.theta();
        let node_trees: Vec<f64> = (0..graph.node_count())
            .map(|v| index.trees_covering_node(v).count() as f64)
            .collect();
        let edge_trees: Vec<f64> = index
            .edge_slots
            .iter()
            .map(|s| s.iter().filter(|s| matches!(s, Slot::Tree { .. })).count() as f64)
            .collect();
        let share = |v: f64, n: f64| if v == f64::INFINITY { v } else { v / n };
        let lambda = cover
            .trees
            .iter()
            .map(|tree| LocalCosts {
                unary: tree
                    .nodes
                    .iter()
                    .map(|&v| {
                        theta.unary[v]
                            .iter()
                            .map(|&x| share(x, node_trees[v]))
                            .collect()
                    })
                    .collect(),
                pairwise: tree
                    .edges
                    .iter()
                    .map(|&e| {
                        theta.pairwise[e]
                            .iter()
                            .map(|&x| share(x, edge_trees[e]))
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        let forbid = |x: f64| if x == f64::INFINITY { x } else { 0.0 };
        let eta = cover
            .chains
            .iter()
            .map(|chain| LocalCosts {
                unary: chain
                    .nodes
                    .iter()
                    .map(|&v| theta.unary[v].iter().map(|&x| forbid(x)).collect())
                    .collect(),
                pairwise: chain
                    .edges
                    .iter()
                    .map(|&e| theta.pairwise[e].iter().map(|&x| forbid(x)).collect())
                    .collect(),
            })
            .collect();
        Self { lambda, eta }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            lambda: self.lambda.iter().map(LocalCosts::zeros_like).collect(),
            eta: self.eta.iter().map(LocalCosts::zeros_like).collect(),
        }
    }

    /// `self += step * dir` on finite entries.
    pub fn add_scaled(&mut self, step: f64, dir: &DualState) {
        let pairs = self
            .lambda
            .iter_mut()
            .zip(&dir.lambda)
            .chain(self.eta.iter_mut().zip(&dir.eta));
        for (dst, src) in pairs {
            for (d, &s) in dst.values_mut().zip(src.values()) {
                if d.is_finite() {
                    *d += step * s;
                }
            }
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.lambda
            .iter()
            .chain(&self.eta)
            .flat_map(LocalCosts::values)
            .map(|v| v * v)
            .sum()
    }

    /// Sum over trees of `lambda`, as costs on the whole graph.
    pub fn aggregated_lambda(
        &self,
        graph: &Graph,
        label_counts: &[usize],
        cover: &Cover,
    ) -> FactorCosts {
        let mut out = FactorCosts::zeros(graph, label_counts);
        for (tree, lam) in cover.trees.iter().zip(&self.lambda) {
            for (&v, u) in tree.nodes.iter().zip(&lam.unary) {
                out.unary[v].iter_mut().zip(u).for_each(|(o, x)| *o += x);
            }
            for (&e, p) in tree.edges.iter().zip(&lam.pairwise) {
                out.pairwise[e].iter_mut().zip(p).for_each(|(o, x)| *o += x);
            }
        }
        out
    }

    /// Largest deviation of `sum lambda + sum eta` from `theta`. Infinite
    /// `theta` entries must be infinite in the sum.
    pub fn reparameterization_error(&self, inst: &BottleneckInstance, cover: &Cover) -> f64 {
        let graph = inst.graph();
        let mut sum = self.aggregated_lambda(graph, inst.label_counts(), cover);
        for (chain, eta) in cover.chains.iter().zip(&self.eta) {
            for (&v, u) in chain.nodes.iter().zip(&eta.unary) {
                sum.unary[v].iter_mut().zip(u).for_each(|(o, x)| *o += x);
            }
            for (&e, p) in chain.edges.iter().zip(&eta.pairwise) {
                sum.pairwise[e].iter_mut().zip(p).for_each(|(o, x)| *o += x);
            }
        }
        let theta = inst.theta();
        let pairs = sum
            .unary
            .iter()
            .zip(&theta.unary)
            .chain(sum.pairwise.iter().zip(&theta.pairwise));
        let mut worst: f64 = 0.0;
        for (s, t) in pairs {
            for (&a, &b) in s.iter().zip(t) {
                let err = match (a.is_finite(), b.is_finite()) {
                    (true, true) => (a - b).abs(),
                    (false, false) if a == b => 0.0,
                    _ => f64::INFINITY,
                };
                worst = worst.max(err);
            }
        }
        worst
    }
}

/// Chain subproblem of `chain` with linear costs `costs` and the instance's
/// bottleneck values, oriented along the chain.
pub fn chain_problem(
    inst: &BottleneckInstance,
    chain: &SubChain,
    costs: &LocalCosts,
) -> ChainProblem {
    let counts = inst.label_counts();
    let phi = inst.phi();
    let orient = |p: usize, table: &[f64]| -> Vec<f64> {
        let (a, b) = (chain.nodes[p], chain.nodes[p + 1]);
        if a < b {
            table.to_vec()
        } else {
            transpose(table, counts[b], counts[a])
        }
    };
    ChainProblem {
        label_counts: chain.nodes.iter().map(|&v| counts[v]).collect(),
        unary_cost: costs.unary.clone(),
        pairwise_cost: costs
            .pairwise
            .iter()
            .enumerate()
            .map(|(p, t)| orient(p, t))
            .collect(),
        unary_phi: chain.nodes.iter().map(|&v| phi.unary[v].clone()).collect(),
        pairwise_phi: chain
            .edges
            .iter()
            .enumerate()
            .map(|(p, &e)| orient(p, &phi.pairwise[e]))
            .collect(),
    }
}

/// Transposes a `rows x cols` row-major table.
pub(crate) fn transpose(table: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; table.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = table[r * cols + c];
        }
    }
    out
}
