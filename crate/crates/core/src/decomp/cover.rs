use std::collections::HashSet;

use crate::error::SolveError;
use crate::model::Graph;

/// Connected acyclic subgraph; `edges` are indices into the graph's edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubTree {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Simple path: `edges[p]` joins `nodes[p]` and `nodes[p + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubChain {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Trees for the linear part and chains for the bottleneck part. Each layer
/// covers every node and edge at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    pub trees: Vec<SubTree>,
    pub chains: Vec<SubChain>,
}

impl Cover {
    pub fn validate(&self, graph: &Graph) -> Result<(), SolveError> {
        let bad = |m: String| Err(SolveError::InvalidCover(m));
        let n = graph.node_count();
        let m = graph.edge_count();
        let mut tree_nodes = vec![false; n];
        let mut tree_edges = vec![false; m];
        for (t, tree) in self.trees.iter().enumerate() {
            check_tree(graph, tree)
                .map_err(|e| SolveError::InvalidCover(format!("tree {t}: {e}")))?;
            tree.nodes.iter().for_each(|&v| tree_nodes[v] = true);
            tree.edges.iter().for_each(|&e| tree_edges[e] = true);
        }
        let mut chain_nodes = vec![false; n];
        let mut chain_edges = vec![false; m];
        for (l, chain) in self.chains.iter().enumerate() {
            check_chain(graph, chain)
                .map_err(|e| SolveError::InvalidCover(format!("chain {l}: {e}")))?;
            chain.nodes.iter().for_each(|&v| chain_nodes[v] = true);
            chain.edges.iter().for_each(|&e| chain_edges[e] = true);
        }
        if let Some(v) = tree_nodes.iter().position(|c| !c) {
            return bad(format!("node {v} is in no tree"));
        }
        if let Some(v) = chain_nodes.iter().position(|c| !c) {
            return bad(format!("node {v} is in no chain"));
        }
        if let Some(e) = tree_edges.iter().position(|c| !c) {
            return bad(format!("edge {e} is in no tree"));
        }
        if let Some(e) = chain_edges.iter().position(|c| !c) {
            return bad(format!("edge {e} is in no chain"));
        }
        Ok(())
    }
}

fn check_tree(graph: &Graph, tree: &SubTree) -> Result<(), String> {
    let nodes: HashSet<usize> = tree.nodes.iter().copied().collect();
    if tree.nodes.is_empty() || nodes.len() != tree.nodes.len() {
        return Err("empty or repeated nodes".into());
    }
    if tree.nodes.iter().any(|&v| v >= graph.node_count()) {
        return Err("node out of range".into());
    }
    if tree.edges.len() + 1 != tree.nodes.len() {
        return Err("edge count must be node count - 1".into());
    }
    let mut uf = UnionFind::new(graph.node_count());
    for &e in &tree.edges {
        if e >= graph.edge_count() {
            return Err(format!("edge {e} out of range"));
        }
        let (i, j) = graph.edge(e);
        if !nodes.contains(&i) || !nodes.contains(&j) {
            return Err(format!("edge {e} leaves the tree"));
        }
        if !uf.union(i, j) {
            return Err("cycle".into());
        }
    }
    Ok(())
}

fn check_chain(graph: &Graph, chain: &SubChain) -> Result<(), String> {
    let distinct: HashSet<usize> = chain.nodes.iter().copied().collect();
    if chain.nodes.is_empty() || distinct.len() != chain.nodes.len() {
        return Err("empty or repeated nodes".into());
    }
    if chain.nodes.iter().any(|&v| v >= graph.node_count()) {
        return Err("node out of range".into());
    }
    if chain.edges.len() + 1 != chain.nodes.len() {
        return Err("edge count must be node count - 1".into());
    }
    for (p, &e) in chain.edges.iter().enumerate() {
        if graph.edge_index(chain.nodes[p], chain.nodes[p + 1]) != Some(e) {
            return Err(format!(
                "edge at position {p} does not join consecutive nodes"
            ));
        }
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

fn path_along(graph: &Graph, nodes: Vec<usize>) -> SubChain {
    let edges = nodes
        .windows(2)
        .map(|w| {
            graph
                .edge_index(w[0], w[1])
                .expect("consecutive nodes are adjacent")
        })
        .collect();
    SubChain { nodes, edges }
}

/// Finds `(rows, cols)` such that the graph is exactly the row-major grid of
/// that shape, preferring the fewest rows.
pub fn detect_grid(graph: &Graph) -> Option<(usize, usize)> {
    let n = graph.node_count();
    (1..=n)
        .filter(|r| n.is_multiple_of(*r))
        .map(|r| (r, n / r))
        .find(|&(r, c)| {
            let expected = r * c.saturating_sub(1) + c * r.saturating_sub(1);
            expected == graph.edge_count()
                && (0..r).all(|i| {
                    (0..c).all(|j| {
                        let v = i * c + j;
                        (j + 1 >= c || graph.edge_index(v, v + 1).is_some())
                            && (i + 1 >= r || graph.edge_index(v, v + c).is_some())
                    })
                })
        })
}

/// Rows and columns as both the trees and the chains. Rows (columns) of a
/// single node are left out when there is more than one row (column) node.
pub fn build_grid_cover(graph: &Graph, rows: usize, cols: usize) -> Result<Cover, SolveError> {
    if detect_grid_shape(graph, rows, cols).is_none() {
        return Err(SolveError::NotAGrid { rows, cols });
    }
    let mut chains = Vec::new();
    if cols > 1 || rows == 1 {
        for r in 0..rows {
            chains.push(path_along(graph, (0..cols).map(|c| r * cols + c).collect()));
        }
    }
    if rows > 1 {
        for c in 0..cols {
            chains.push(path_along(graph, (0..rows).map(|r| r * cols + c).collect()));
        }
    }
    let trees = chains
        .iter()
        .map(|ch| SubTree {
            nodes: ch.nodes.clone(),
            edges: ch.edges.clone(),
        })
        .collect();
    Ok(Cover { trees, chains })
}

fn detect_grid_shape(graph: &Graph, rows: usize, cols: usize) -> Option<()> {
    if rows * cols != graph.node_count() || rows == 0 || cols == 0 {
        return None;
    }
    let as_grid = Graph::grid(rows, cols).ok()?;
    (as_grid.edge_count() == graph.edge_count()
        && as_grid
            .edges()
            .iter()
            .all(|&(i, j)| graph.edge_index(i, j).is_some()))
    .then_some(())
}

/// Cover for an arbitrary connected graph.
///
/// Trees: a spanning tree, then spanning forests of whatever edges remain,
/// one tree per component. Chains: greedy edge-disjoint simple paths, each
/// started at the lowest node of odd remaining degree if any.
pub fn build_generic_cover(graph: &Graph) -> Result<Cover, SolveError> {
    if !graph.is_connected() {
        return Err(SolveError::Disconnected);
    }
    let n = graph.node_count();
    let m = graph.edge_count();

    let mut trees = Vec::new();
    let mut remaining: Vec<usize> = (0..m).collect();
    if m == 0 {
        trees.push(SubTree {
            nodes: (0..n).collect(),
            edges: Vec::new(),
        });
    }
    while !remaining.is_empty() {
        let mut uf = UnionFind::new(n);
        let mut taken = Vec::new();
        let mut rest = Vec::new();
        for &e in &remaining {
            let (i, j) = graph.edge(e);
            if uf.union(i, j) {
                taken.push(e);
            } else {
                rest.push(e);
            }
        }
        let mut by_root: Vec<Option<usize>> = vec![None; n];
        let mut forest: Vec<SubTree> = Vec::new();
        for &e in &taken {
            let (i, _) = graph.edge(e);
            let root = uf.find(i);
            let t = *by_root[root].get_or_insert_with(|| {
                forest.push(SubTree {
                    nodes: Vec::new(),
                    edges: Vec::new(),
                });
                forest.len() - 1
            });
            forest[t].edges.push(e);
        }
        for tree in &mut forest {
            let mut nodes: Vec<usize> = tree
                .edges
                .iter()
                .flat_map(|&e| {
                    let (i, j) = graph.edge(e);
                    [i, j]
                })
                .collect();
            nodes.sort_unstable();
            nodes.dedup();
            tree.nodes = nodes;
        }
        trees.extend(forest);
        remaining = rest;
    }

    let mut used = vec![false; m];
    let mut degree: Vec<usize> = (0..n).map(|v| graph.neighbors(v).len()).collect();
    let mut chains = Vec::new();
    loop {
        let start = (0..n)
            .find(|&v| degree[v] % 2 == 1)
            .or_else(|| (0..n).find(|&v| degree[v] > 0));
        let Some(start) = start else { break };
        let mut on_path = vec![false; n];
        on_path[start] = true;
        let mut nodes = vec![start];
        let mut edges = Vec::new();
        let mut v = start;
        while let Some(&(w, e)) = graph
            .neighbors(v)
            .iter()
            .filter(|&&(w, e)| !used[e] && !on_path[w])
            .min_by_key(|&&(_, e)| e)
        {
            used[e] = true;
            degree[v] -= 1;
            degree[w] -= 1;
            on_path[w] = true;
            nodes.push(w);
            edges.push(e);
            v = w;
        }
        chains.push(SubChain { nodes, edges });
    }
    if m == 0 {
        chains.extend((0..n).map(|v| SubChain {
            nodes: vec![v],
            edges: Vec::new(),
        }));
    }
    Ok(Cover { trees, chains })
}

/// Grid cover when the graph is a row-major grid, generic cover otherwise.
pub fn build_cover(graph: &Graph) -> Result<Cover, SolveError> {
    match detect_grid(graph) {
        Some((rows, cols)) => build_grid_cover(graph, rows, cols),
        None => build_generic_cover(graph),
    }
}
