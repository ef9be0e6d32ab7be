use std::collections::{HashMap, VecDeque};

use crate::decomp::cover::SubTree;
use crate::decomp::dual::LocalCosts;
use crate::error::SolveError;
use crate::model::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSolution {
    pub value: f64,
    /// One label per node of the tree, in the tree's node order.
    pub labels: Vec<usize>,
}

/// Rooted traversal of a subtree, computed once and reused for every solve.
#[derive(Debug, Clone)]
pub struct TreeLayout {
    counts: Vec<usize>,
    // BFS order of local node indices from local node 0
    order: Vec<usize>,
    parent: Vec<usize>,
    parent_edge: Vec<usize>,
    // whether the child is the first endpoint of the parent edge's table
    child_first: Vec<bool>,
}

impl TreeLayout {
    pub fn new(graph: &Graph, label_counts: &[usize], tree: &SubTree) -> Self {
        let n = tree.nodes.len();
        let local: HashMap<usize, usize> = tree
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (le, &e) in tree.edges.iter().enumerate() {
            let (i, j) = graph.edge(e);
            let (a, b) = (local[&i], local[&j]);
            adj[a].push((b, le));
            adj[b].push((a, le));
        }
        let mut parent = vec![usize::MAX; n];
        let mut parent_edge = vec![usize::MAX; n];
        let mut child_first = vec![false; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, le) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    parent_edge[w] = le;
                    child_first[w] = tree.nodes[w] < tree.nodes[v];
                    queue.push_back(w);
                }
            }
        }
        Self {
            counts: tree.nodes.iter().map(|&v| label_counts[v]).collect(),
            order,
            parent,
            parent_edge,
            child_first,
        }
    }

    /// Exact min-sum dynamic programming: messages from the leaves to the
    /// root, then argmin backtracking. Ties go to the smallest label.
    pub fn solve(&self, costs: &LocalCosts) -> Result<TreeSolution, SolveError> {
        let mut belief = costs.unary.clone();
        let mut argmin: Vec<Vec<usize>> = vec![Vec::new(); self.counts.len()];
        for &v in self.order.iter().skip(1).rev() {
            let p = self.parent[v];
            let (kv, kp) = (self.counts[v], self.counts[p]);
            let table = &costs.pairwise[self.parent_edge[v]];
            let mut arg = vec![0; kp];
            for (xp, slot) in arg.iter_mut().enumerate() {
                let mut best = f64::INFINITY;
                for xv in 0..kv {
                    let pair = if self.child_first[v] {
                        table[xv * kp + xp]
                    } else {
                        table[xp * kv + xv]
                    };
                    let c = belief[v][xv] + pair;
                    if c < best {
                        best = c;
                        *slot = xv;
                    }
                }
                belief[p][xp] += best;
            }
            argmin[v] = arg;
        }
        let root = self.order[0];
        let (mut value, mut root_label) = (f64::INFINITY, 0);
        for (x, &c) in belief[root].iter().enumerate() {
            if c < value {
                value = c;
                root_label = x;
            }
        }
        if value == f64::INFINITY {
            return Err(SolveError::Infeasible(
                "tree subproblem has no finite labeling".into(),
            ));
        }
        let mut labels = vec![0; self.counts.len()];
        labels[root] = root_label;
        for &v in self.order.iter().skip(1) {
            labels[v] = argmin[v][labels[self.parent[v]]];
        }
        Ok(TreeSolution { value, labels })
    }
}

/// Minimum of `<lambda, x>` over labelings of the tree.
pub fn solve_tree_mrf(
    graph: &Graph,
    label_counts: &[usize],
    tree: &SubTree,
    lambda: &LocalCosts,
) -> Result<TreeSolution, SolveError> {
    TreeLayout::new(graph, label_counts, tree).solve(lambda)
}
