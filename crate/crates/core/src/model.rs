//! Instance model: graph, label spaces, linear and bottleneck potentials.
//!
//! Costs are extended reals represented as `f64` where `f64::INFINITY` marks a
//! forbidden configuration. Negative infinity and NaN are rejected everywhere.

use std::collections::HashMap;
use std::ops::{Deref, DerefMut};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("edge ({0}, {1}) has an endpoint outside [0, {2})")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("self loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("node {0} has zero labels")]
    ZeroLabels(usize),
    #[error("{what}: expected {expected} entries, found {found}")]
    Shape {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("{what}: value {value} is not allowed")]
    BadValue { what: String, value: f64 },
    #[error("bottleneck cost table keys must be strictly increasing")]
    UnsortedTable,
    #[error("bottleneck cost table is empty")]
    EmptyTable,
    #[error("bottleneck cost queried at {0}, above the largest table key")]
    AboveTable(f64),
    #[error(
        "bottleneck cost table ends at {table_max}, below the largest bottleneck value {value_max}"
    )]
    TableTooShort { table_max: f64, value_max: f64 },
    #[error("linear bottleneck weight must be finite and non-negative, got {0}")]
    BadWeight(f64),
    #[error("labeling has {found} entries but the graph has {expected} nodes")]
    LabelingLength { expected: usize, found: usize },
    #[error("label {label} of node {node} is outside [0, {count})")]
    LabelOutOfRange {
        node: usize,
        label: usize,
        count: usize,
    },
}

/// Undirected simple graph with edges stored as `(i, j)`, `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    neighbors: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Builds a graph, canonicalizing every edge so that `i < j`. Edge order is kept.
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        if node_count == 0 {
            return Err(ModelError::EmptyGraph);
        }
        let mut canonical = Vec::with_capacity(edges.len());
        let mut index = HashMap::with_capacity(edges.len());
        let mut neighbors = vec![Vec::new(); node_count];
        for &(a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(ModelError::EdgeOutOfRange(a, b, node_count));
            }
            if a == b {
                return Err(ModelError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if index.insert(e, canonical.len()).is_some() {
                return Err(ModelError::DuplicateEdge(e.0, e.1));
            }
            neighbors[e.0].push((e.1, canonical.len()));
            neighbors[e.1].push((e.0, canonical.len()));
            canonical.push(e);
        }
        Ok(Self {
            node_count,
            edges: canonical,
            index,
            neighbors,
        })
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self, ModelError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges)
    }

    /// Row-major `rows x cols` grid with 4-neighborhood.
    pub fn grid(rows: usize, cols: usize) -> Result<Self, ModelError> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        Self::new(rows * cols, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Index of the edge joining `a` and `b`, in either orientation.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&(a.min(b), a.max(b))).copied()
    }

    /// `(neighbor, edge index)` pairs incident to `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.neighbors[v]
    }

    /// True when the edges are exactly `(i, i+1)` for `i` in `0..n-1`.
    pub fn is_path_in_node_order(&self) -> bool {
        self.edges.len() + 1 == self.node_count
            && (1..self.node_count).all(|i| self.index.contains_key(&(i - 1, i)))
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.node_count
    }
}

/// Per-factor cost tables aligned with a graph: one vector per node (length
/// `|X_i|`) and one row-major matrix per edge (`|X_i| x |X_j|` for `i < j`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FactorCosts {
    pub unary: Vec<Vec<f64>>,
    pub pairwise: Vec<Vec<f64>>,
}

impl FactorCosts {
    pub fn zeros(graph: &Graph, label_counts: &[usize]) -> Self {
        Self::filled(graph, label_counts, 0.0)
    }

    pub fn filled(graph: &Graph, label_counts: &[usize], value: f64) -> Self {
        Self {
            unary: label_counts.iter().map(|&k| vec![value; k]).collect(),
            pairwise: graph
                .edges()
                .iter()
                .map(|&(i, j)| vec![value; label_counts[i] * label_counts[j]])
                .collect(),
        }
    }

    #[inline]
    pub fn pair(&self, e: usize, ki_label: usize, kj: usize, kj_label: usize) -> f64 {
        self.pairwise[e][ki_label * kj + kj_label]
    }

    fn check_shape(
        &self,
        graph: &Graph,
        label_counts: &[usize],
        name: &str,
    ) -> Result<(), ModelError> {
        if self.unary.len() != graph.node_count() {
            return Err(ModelError::Shape {
                what: format!("{name} unary node count"),
                expected: graph.node_count(),
                found: self.unary.len(),
            });
        }
        for (i, u) in self.unary.iter().enumerate() {
            if u.len() != label_counts[i] {
                return Err(ModelError::Shape {
                    what: format!("{name} unary node {i}"),
                    expected: label_counts[i],
                    found: u.len(),
                });
            }
        }
        if self.pairwise.len() != graph.edge_count() {
            return Err(ModelError::Shape {
                what: format!("{name} pairwise edge count"),
                expected: graph.edge_count(),
                found: self.pairwise.len(),
            });
        }
        for (e, p) in self.pairwise.iter().enumerate() {
            let (i, j) = graph.edge(e);
            let want = label_counts[i] * label_counts[j];
            if p.len() != want {
                return Err(ModelError::Shape {
                    what: format!("{name} pairwise edge ({i}, {j})"),
                    expected: want,
                    found: p.len(),
                });
            }
        }
        Ok(())
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.unary
            .iter()
            .chain(self.pairwise.iter())
            .flat_map(|v| v.iter().copied())
    }
}

/// Bottleneck cost `zeta: B -> R`.
#[derive(Debug, Clone, PartialEq)]
pub enum BottleneckCost {
    /// `zeta(b) = w * b`.
    Linear(f64),
    /// Sorted `(b, cost)` pairs; evaluation uses the smallest key `>= b`.
    Table(Vec<(f64, f64)>),
    Zero,
}

impl BottleneckCost {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            BottleneckCost::Linear(w) => {
                if !w.is_finite() || *w < 0.0 {
                    return Err(ModelError::BadWeight(*w));
                }
            }
            BottleneckCost::Table(entries) => {
                if entries.is_empty() {
                    return Err(ModelError::EmptyTable);
                }
                for &(b, c) in entries {
                    if !b.is_finite() || !c.is_finite() {
                        return Err(ModelError::BadValue {
                            what: "bottleneck cost table".into(),
                            value: if b.is_finite() { c } else { b },
                        });
                    }
                }
                if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(ModelError::UnsortedTable);
                }
            }
            BottleneckCost::Zero => {}
        }
        Ok(())
    }

    pub fn eval(&self, b: f64) -> Result<f64, ModelError> {
        match self {
            BottleneckCost::Linear(w) => Ok(w * b),
            BottleneckCost::Zero => Ok(0.0),
            BottleneckCost::Table(entries) => {
                let pos = entries.partition_point(|&(key, _)| key < b);
                entries
                    .get(pos)
                    .map(|&(_, c)| c)
                    .ok_or(ModelError::AboveTable(b))
            }
        }
    }

    /// Whether `zeta` never decreases as `b` grows.
    pub fn is_nondecreasing(&self) -> bool {
        match self {
            BottleneckCost::Linear(_) | BottleneckCost::Zero => true,
            BottleneckCost::Table(entries) => entries.windows(2).all(|w| w[0].1 <= w[1].1),
        }
    }
}

/// The bottleneck cost as seen by the solvers: `min { zeta(b') : b' in B, b' >= b }`.
///
/// A labeling feasible at threshold `b` is feasible at every larger threshold,
/// so the objective only ever sees this upward envelope. For a non-decreasing
/// `zeta` it coincides with `zeta` itself and `realize(b) == b`.
#[derive(Debug, Clone)]
pub struct ZetaEnvelope {
    zeta: BottleneckCost,
    // (b, envelope cost, realizing b') over B; empty when zeta is monotone.
    suffix: Vec<(f64, f64, f64)>,
}

impl ZetaEnvelope {
    pub fn new(zeta: &BottleneckCost, values: &BottleneckValueSet) -> Self {
        if zeta.is_nondecreasing() {
            return Self::monotone(zeta);
        }
        let vals = values.values();
        let mut suffix = vec![(0.0, f64::INFINITY, f64::INFINITY); vals.len()];
        let mut best = (f64::INFINITY, f64::INFINITY);
        for (slot, &b) in suffix.iter_mut().zip(vals).rev() {
            let c = zeta.eval(b).unwrap_or(f64::INFINITY);
            if c <= best.0 {
                best = (c, b);
            }
            *slot = (b, best.0, best.1);
        }
        Self {
            zeta: zeta.clone(),
            suffix,
        }
    }

    /// Envelope that evaluates `zeta` directly, without reference to a value set.
    pub fn monotone(zeta: &BottleneckCost) -> Self {
        Self {
            zeta: zeta.clone(),
            suffix: Vec::new(),
        }
    }

    pub fn zeta(&self) -> &BottleneckCost {
        &self.zeta
    }

    /// `(cost, realizing b)` for threshold `b`.
    pub fn eval(&self, b: f64) -> (f64, f64) {
        if self.suffix.is_empty() {
            return (self.zeta.eval(b).unwrap_or(f64::INFINITY), b);
        }
        let pos = self.suffix.partition_point(|&(key, _, _)| key < b);
        match self.suffix.get(pos) {
            Some(&(_, c, real)) => (c, real),
            None => (f64::INFINITY, b),
        }
    }

    pub fn cost(&self, b: f64) -> f64 {
        self.eval(b).0
    }
}

/// One label index per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Labeling(pub Vec<usize>);

impl Deref for Labeling {
    type Target = Vec<usize>;
    fn deref(&self) -> &Vec<usize> {
        &self.0
    }
}

impl DerefMut for Labeling {
    fn deref_mut(&mut self) -> &mut Vec<usize> {
        &mut self.0
    }
}

impl From<Vec<usize>> for Labeling {
    fn from(v: Vec<usize>) -> Self {
        Labeling(v)
    }
}

/// Sorted, deduplicated set `B` of every value a bottleneck potential can take.
#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckValueSet {
    values: Vec<f64>,
}

impl BottleneckValueSet {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut values: Vec<f64> = values.into_iter().collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }
}

/// An MRF with an additional bottleneck potential.
#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckInstance {
    graph: Graph,
    label_counts: Vec<usize>,
    theta: FactorCosts,
    phi: FactorCosts,
    zeta: BottleneckCost,
}

impl BottleneckInstance {
    pub fn new(
        graph: Graph,
        label_counts: Vec<usize>,
        theta: FactorCosts,
        phi: FactorCosts,
        zeta: BottleneckCost,
    ) -> Result<Self, ModelError> {
        if label_counts.len() != graph.node_count() {
            return Err(ModelError::Shape {
                what: "label counts".into(),
                expected: graph.node_count(),
                found: label_counts.len(),
            });
        }
        if let Some(i) = label_counts.iter().position(|&k| k == 0) {
            return Err(ModelError::ZeroLabels(i));
        }
        theta.check_shape(&graph, &label_counts, "theta")?;
        phi.check_shape(&graph, &label_counts, "phi")?;
        if let Some(v) = theta
            .values()
            .find(|v| v.is_nan() || *v == f64::NEG_INFINITY)
        {
            return Err(ModelError::BadValue {
                what: "theta".into(),
                value: v,
            });
        }
        if let Some(v) = phi.values().find(|v| !v.is_finite()) {
            return Err(ModelError::BadValue {
                what: "phi".into(),
                value: v,
            });
        }
        zeta.validate()?;
        let instance = Self {
            graph,
            label_counts,
            theta,
            phi,
            zeta,
        };
        if let BottleneckCost::Table(entries) = &instance.zeta {
            let table_max = entries.last().map(|e| e.0).unwrap_or(f64::NEG_INFINITY);
            if let Some(value_max) = instance.bottleneck_values().max() {
                if table_max < value_max {
                    return Err(ModelError::TableTooShort {
                        table_max,
                        value_max,
                    });
                }
            }
        }
        Ok(instance)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn label_counts(&self) -> &[usize] {
        &self.label_counts
    }

    pub fn theta(&self) -> &FactorCosts {
        &self.theta
    }

    pub fn phi(&self) -> &FactorCosts {
        &self.phi
    }

    pub fn zeta(&self) -> &BottleneckCost {
        &self.zeta
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Same instance with a different bottleneck cost.
    pub fn with_zeta(&self, zeta: BottleneckCost) -> Result<Self, ModelError> {
        Self::new(
            self.graph.clone(),
            self.label_counts.clone(),
            self.theta.clone(),
            self.phi.clone(),
            zeta,
        )
    }

    /// Total number of labels `L = sum_i |X_i|`.
    pub fn total_labels(&self) -> usize {
        self.label_counts.iter().sum()
    }

    /// Number of complete labelings, saturating at `u128::MAX`.
    pub fn labeling_count(&self) -> u128 {
        self.label_counts
            .iter()
            .fold(1u128, |acc, &k| acc.saturating_mul(k as u128))
    }

    pub fn bottleneck_values(&self) -> BottleneckValueSet {
        BottleneckValueSet::from_values(self.phi.values())
    }

    pub fn zeta_envelope(&self) -> ZetaEnvelope {
        ZetaEnvelope::new(&self.zeta, &self.bottleneck_values())
    }

    pub fn check_labeling(&self, x: &Labeling) -> Result<(), ModelError> {
        if x.len() != self.node_count() {
            return Err(ModelError::LabelingLength {
                expected: self.node_count(),
                found: x.len(),
            });
        }
        for (node, (&label, &count)) in x.iter().zip(&self.label_counts).enumerate() {
            if label >= count {
                return Err(ModelError::LabelOutOfRange { node, label, count });
            }
        }
        Ok(())
    }

    /// `sum_i theta_i(x_i) + sum_ij theta_ij(x_i, x_j)`.
    pub fn linear_cost(&self, x: &Labeling) -> Result<f64, ModelError> {
        self.check_labeling(x)?;
        Ok(linear_cost_unchecked(
            &self.graph,
            &self.label_counts,
            &self.theta,
            x,
        ))
    }

    /// Largest bottleneck potential taken by `x` over all nodes and edges.
    pub fn bottleneck_of(&self, x: &Labeling) -> Result<f64, ModelError> {
        self.check_labeling(x)?;
        let unary = self.phi.unary.iter().zip(x.iter()).map(|(p, &l)| p[l]);
        let pairwise = self
            .graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(i, j))| self.phi.pair(e, x[i], self.label_counts[j], x[j]));
        Ok(unary.chain(pairwise).fold(f64::NEG_INFINITY, f64::max))
    }

    /// Linear cost plus `zeta` of the labeling's bottleneck.
    pub fn evaluate_energy(&self, x: &Labeling) -> Result<f64, ModelError> {
        let linear = self.linear_cost(x)?;
        let b = self.bottleneck_of(x)?;
        Ok(linear + self.zeta.eval(b)?)
    }

    /// Forbids (sets `theta = inf`) every configuration whose bottleneck value exceeds `b`.
    pub fn restrict_to_bottleneck(&self, b: f64) -> Self {
        let mut out = self.clone();
        for (t, p) in out.theta.unary.iter_mut().zip(&self.phi.unary) {
            forbid_above(t, p, b);
        }
        for (t, p) in out.theta.pairwise.iter_mut().zip(&self.phi.pairwise) {
            forbid_above(t, p, b);
        }
        out
    }
}

fn forbid_above(theta: &mut [f64], phi: &[f64], b: f64) {
    for (t, &p) in theta.iter_mut().zip(phi) {
        if p > b {
            *t = f64::INFINITY;
        }
    }
}

pub(crate) fn linear_cost_unchecked(
    graph: &Graph,
    label_counts: &[usize],
    costs: &FactorCosts,
    x: &[usize],
) -> f64 {
    let mut total = 0.0;
    for (u, &l) in costs.unary.iter().zip(x) {
        total += u[l];
    }
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        total += costs.pair(e, x[i], label_counts[j], x[j]);
    }
    total
}
