use crate::error::SolveError;
use crate::model::{BottleneckInstance, BottleneckValueSet, Labeling};

/// Chain bottleneck problem over positions `0..n`. Pairwise tables join
/// position `p` and `p + 1` and are row-major in the label at `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainProblem {
    pub label_counts: Vec<usize>,
    pub unary_cost: Vec<Vec<f64>>,
    pub pairwise_cost: Vec<Vec<f64>>,
    pub unary_phi: Vec<Vec<f64>>,
    pub pairwise_phi: Vec<Vec<f64>>,
}

impl ChainProblem {
    /// Requires the instance graph to be the path `0 - 1 - ... - (n-1)`.
    pub fn from_instance(inst: &BottleneckInstance) -> Result<Self, SolveError> {
        let g = inst.graph();
        if !g.is_path_in_node_order() {
            return Err(SolveError::NotAChain);
        }
        let n = g.node_count();
        let order: Vec<usize> = (1..n)
            .map(|i| g.edge_index(i - 1, i).expect("path edge"))
            .collect();
        Ok(Self {
            label_counts: inst.label_counts().to_vec(),
            unary_cost: inst.theta().unary.clone(),
            pairwise_cost: order
                .iter()
                .map(|&e| inst.theta().pairwise[e].clone())
                .collect(),
            unary_phi: inst.phi().unary.clone(),
            pairwise_phi: order
                .iter()
                .map(|&e| inst.phi().pairwise[e].clone())
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.label_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.label_counts.is_empty()
    }

    pub fn bottleneck_values(&self) -> BottleneckValueSet {
        BottleneckValueSet::from_values(
            self.unary_phi
                .iter()
                .chain(&self.pairwise_phi)
                .flat_map(|v| v.iter().copied()),
        )
    }

    /// Linear cost and bottleneck of a labeling of the chain.
    pub fn evaluate(&self, y: &[usize]) -> (f64, f64) {
        let mut cost = 0.0;
        let mut bottleneck = f64::NEG_INFINITY;
        for (p, &l) in y.iter().enumerate() {
            cost += self.unary_cost[p][l];
            bottleneck = bottleneck.max(self.unary_phi[p][l]);
            if p + 1 < y.len() {
                let idx = l * self.label_counts[p + 1] + y[p + 1];
                cost += self.pairwise_cost[p][idx];
                bottleneck = bottleneck.max(self.pairwise_phi[p][idx]);
            }
        }
        (cost, bottleneck)
    }

    pub(crate) fn validate(&self) -> Result<(), SolveError> {
        let n = self.label_counts.len();
        let bad = |m: &str| Err(SolveError::InvalidParameter(format!("chain problem: {m}")));
        if n == 0 {
            return bad("no positions");
        }
        if self.label_counts.contains(&0) {
            return bad("position without labels");
        }
        if self.unary_cost.len() != n || self.unary_phi.len() != n {
            return bad("unary table count");
        }
        if self.pairwise_cost.len() != n - 1 || self.pairwise_phi.len() != n - 1 {
            return bad("pairwise table count");
        }
        for p in 0..n {
            let k = self.label_counts[p];
            if self.unary_cost[p].len() != k || self.unary_phi[p].len() != k {
                return bad("unary table size");
            }
            if p + 1 < n {
                let kk = k * self.label_counts[p + 1];
                if self.pairwise_cost[p].len() != kk || self.pairwise_phi[p].len() != kk {
                    return bad("pairwise table size");
                }
            }
        }
        Ok(())
    }
}

/// The factor and configuration an arc stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcOrigin {
    Source { label: usize },
    Unary { pos: usize, label: usize },
    Pairwise { pos: usize, from: usize, to: usize },
    Sink { label: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DagArc {
    pub tail: usize,
    pub head: usize,
    /// Linear cost.
    pub sigma: f64,
    /// Bottleneck value; `-inf` on source and sink arcs.
    pub omega: f64,
    pub origin: ArcOrigin,
}

/// Shortest-path network of a chain.
///
/// Each label `x` at position `p` becomes a node pair `x -> x̄` whose arc
/// carries the unary terms; `x̄` at `p` connects to every label node at
/// `p + 1` through the pairwise terms. Node ids increase along every arc, so
/// id order is a topological order.
#[derive(Debug, Clone)]
pub struct LayeredDag {
    label_counts: Vec<usize>,
    offsets: Vec<usize>,
    node_count: usize,
    arcs: Vec<DagArc>,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
}

impl LayeredDag {
    pub const SOURCE: usize = 0;

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[DagArc] {
        &self.arcs
    }

    pub fn arc(&self, a: usize) -> &DagArc {
        &self.arcs[a]
    }

    pub fn source(&self) -> usize {
        Self::SOURCE
    }

    pub fn sink(&self) -> usize {
        self.node_count - 1
    }

    pub fn out_arcs(&self, w: usize) -> &[usize] {
        &self.out_arcs[w]
    }

    pub fn in_arcs(&self, w: usize) -> &[usize] {
        &self.in_arcs[w]
    }

    pub fn label_counts(&self) -> &[usize] {
        &self.label_counts
    }

    /// Node `x` for label `label` at position `pos`.
    pub fn label_node(&self, pos: usize, label: usize) -> usize {
        self.offsets[pos] + label
    }

    /// Duplicate node `x̄` for label `label` at position `pos`.
    pub fn dup_node(&self, pos: usize, label: usize) -> usize {
        self.offsets[pos] + self.label_counts[pos] + label
    }

    /// `(position, label)` represented by a node, `None` for source and sink.
    pub fn node_owner(&self, w: usize) -> Option<(usize, usize)> {
        if w == Self::SOURCE || w == self.sink() {
            return None;
        }
        let pos = self.offsets.partition_point(|&o| o <= w) - 1;
        let k = self.label_counts[pos];
        Some((pos, (w - self.offsets[pos]) % k))
    }

    /// Replaces every arc's linear cost with the costs of `problem`, which
    /// must have the same label counts.
    pub fn set_costs(&mut self, problem: &ChainProblem) {
        debug_assert_eq!(problem.label_counts, self.label_counts);
        for arc in &mut self.arcs {
            arc.sigma = match arc.origin {
                ArcOrigin::Source { .. } | ArcOrigin::Sink { .. } => 0.0,
                ArcOrigin::Unary { pos, label } => problem.unary_cost[pos][label],
                ArcOrigin::Pairwise { pos, from, to } => {
                    problem.pairwise_cost[pos][from * self.label_counts[pos + 1] + to]
                }
            };
        }
    }

    /// Shortest `s`-`t` path using only arcs accepted by `keep` and with
    /// finite cost. Returns the path cost and the decoded labeling.
    pub fn shortest_path(&self, keep: impl Fn(&DagArc) -> bool) -> Option<(f64, Labeling)> {
        let mut dist = vec![f64::INFINITY; self.node_count];
        let mut pred = vec![usize::MAX; self.node_count];
        dist[Self::SOURCE] = 0.0;
        for w in 0..self.node_count {
            if dist[w] == f64::INFINITY {
                continue;
            }
            for &a in &self.out_arcs[w] {
                let arc = &self.arcs[a];
                if arc.sigma == f64::INFINITY || !keep(arc) {
                    continue;
                }
                let cand = dist[w] + arc.sigma;
                if cand < dist[arc.head] {
                    dist[arc.head] = cand;
                    pred[arc.head] = a;
                }
            }
        }
        let t = self.sink();
        if dist[t] == f64::INFINITY {
            return None;
        }
        let mut labels = vec![0; self.label_counts.len()];
        let mut w = t;
        while w != Self::SOURCE {
            let arc = &self.arcs[pred[w]];
            if let ArcOrigin::Unary { pos, label } = arc.origin {
                labels[pos] = label;
            }
            w = arc.tail;
        }
        Some((dist[t], Labeling(labels)))
    }
}

/// Builds the shortest-path network of a chain problem.
pub fn chain_to_dag(problem: &ChainProblem) -> Result<LayeredDag, SolveError> {
    problem.validate()?;
    let counts = problem.label_counts.clone();
    let n = counts.len();
    let mut offsets = Vec::with_capacity(n);
    let mut next = 1;
    for &k in &counts {
        offsets.push(next);
        next += 2 * k;
    }
    let node_count = next + 1;
    let sink = node_count - 1;
    let label_node = |p: usize, l: usize| offsets[p] + l;
    let dup_node = |p: usize, l: usize| offsets[p] + counts[p] + l;

    let arc_total = counts[0]
        + counts.iter().sum::<usize>()
        + counts.windows(2).map(|w| w[0] * w[1]).sum::<usize>()
        + counts[n - 1];
    let mut arcs = Vec::with_capacity(arc_total);
    for l in 0..counts[0] {
        arcs.push(DagArc {
            tail: LayeredDag::SOURCE,
            head: label_node(0, l),
            sigma: 0.0,
            omega: f64::NEG_INFINITY,
            origin: ArcOrigin::Source { label: l },
        });
    }
    for p in 0..n {
        for l in 0..counts[p] {
            arcs.push(DagArc {
                tail: label_node(p, l),
                head: dup_node(p, l),
                sigma: problem.unary_cost[p][l],
                omega: problem.unary_phi[p][l],
                origin: ArcOrigin::Unary { pos: p, label: l },
            });
        }
        if p + 1 < n {
            for from in 0..counts[p] {
                for to in 0..counts[p + 1] {
                    let idx = from * counts[p + 1] + to;
                    arcs.push(DagArc {
                        tail: dup_node(p, from),
                        head: label_node(p + 1, to),
                        sigma: problem.pairwise_cost[p][idx],
                        omega: problem.pairwise_phi[p][idx],
                        origin: ArcOrigin::Pairwise { pos: p, from, to },
                    });
                }
            }
        }
    }
    for l in 0..counts[n - 1] {
        arcs.push(DagArc {
            tail: dup_node(n - 1, l),
            head: sink,
            sigma: 0.0,
            omega: f64::NEG_INFINITY,
            origin: ArcOrigin::Sink { label: l },
        });
    }

    let mut out_arcs = vec![Vec::new(); node_count];
    let mut in_arcs = vec![Vec::new(); node_count];
    for (a, arc) in arcs.iter().enumerate() {
        out_arcs[arc.tail].push(a);
        in_arcs[arc.head].push(a);
    }
    Ok(LayeredDag {
        label_counts: counts,
        offsets,
        node_count,
        arcs,
        out_arcs,
        in_arcs,
    })
}
