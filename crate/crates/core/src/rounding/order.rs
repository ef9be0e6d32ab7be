use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::decomp::detect_grid;
use crate::error::SolveError;
use crate::model::Graph;

/// A permutation of the nodes, the order in which rounding visits them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeOrder(Vec<usize>);

impl NodeOrder {
    pub fn new(order: Vec<usize>, node_count: usize) -> Result<Self, SolveError> {
        let mut seen = vec![false; node_count];
        if order.len() != node_count {
            return Err(SolveError::InvalidParameter(format!(
                "order has {} entries for {node_count} nodes",
                order.len()
            )));
        }
        for &v in &order {
            if v >= node_count || std::mem::replace(&mut seen[v], true) {
                return Err(SolveError::InvalidParameter(format!(
                    "order repeats or exceeds node {v}"
                )));
            }
        }
        Ok(Self(order))
    }

    /// Ascending node index, which is row-major order for grid graphs.
    pub fn row_major(node_count: usize) -> Self {
        Self((0..node_count).collect())
    }

    /// Breadth-first from node 0, then from the lowest unvisited node.
    pub fn bfs(graph: &Graph) -> Self {
        let n = graph.node_count();
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &(w, _) in graph.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        Self(order)
    }

    pub fn for_graph(graph: &Graph, kind: OrderKind) -> Self {
        match kind {
            OrderKind::RowMajor => Self::row_major(graph.node_count()),
            OrderKind::Bfs => Self::bfs(graph),
            OrderKind::Auto if detect_grid(graph).is_some() => Self::row_major(graph.node_count()),
            OrderKind::Auto => Self::bfs(graph),
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// How to pick a [`NodeOrder`]. `Auto` is row-major on grids and BFS otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderKind {
    #[default]
    Auto,
    RowMajor,
    Bfs,
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderKind::Auto => "auto",
            OrderKind::RowMajor => "row-major",
            OrderKind::Bfs => "bfs",
        })
    }
}

impl FromStr for OrderKind {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(OrderKind::Auto),
            "row-major" => Ok(OrderKind::RowMajor),
            "bfs" => Ok(OrderKind::Bfs),
            _ => Err(SolveError::InvalidParameter(format!(
                "unknown node order `{s}`"
            ))),
        }
    }
}
