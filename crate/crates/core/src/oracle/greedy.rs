use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::SolveError;
use crate::model::{BottleneckInstance, Labeling};

#[derive(Debug, PartialEq)]
struct Candidate {
    cost: f64,
    node: usize,
    label: usize,
    version: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // BinaryHeap is a max-heap: cheapest cost, then smallest node, pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Region-growing baseline in the spirit of Boruvka-style tracking.
///
/// Starting from the seeded nodes, repeatedly labels the frontier node whose
/// best label adds the least unary plus pairwise cost to already labeled
/// neighbors. Labels are never revisited and bottleneck potentials are ignored.
pub fn greedy_track(
    inst: &BottleneckInstance,
    seeds: &[Option<usize>],
) -> Result<Labeling, SolveError> {
    let n = inst.node_count();
    let counts = inst.label_counts();
    if seeds.len() != n {
        return Err(SolveError::InvalidParameter(format!(
            "expected {n} seed slots, found {}",
            seeds.len()
        )));
    }
    if seeds.iter().all(Option::is_none) {
        return Err(SolveError::InvalidParameter(
            "at least one node must be seeded".into(),
        ));
    }
    for (i, s) in seeds.iter().enumerate() {
        if let Some(l) = *s {
            if l >= counts[i] {
                return Err(SolveError::InvalidParameter(format!(
                    "seed label {l} out of range for node {i}"
                )));
            }
        }
    }

    let graph = inst.graph();
    let theta = inst.theta();
    let mut labels: Vec<Option<usize>> = seeds.to_vec();
    let mut version = vec![0u32; n];
    let mut heap = BinaryHeap::new();

    let best_label = |labels: &[Option<usize>], i: usize| -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for x in 0..counts[i] {
            let mut c = theta.unary[i][x];
            for &(j, e) in graph.neighbors(i) {
                if let Some(xj) = labels[j] {
                    c += if i < j {
                        theta.pairwise[e][x * counts[j] + xj]
                    } else {
                        theta.pairwise[e][xj * counts[i] + x]
                    };
                }
            }
            if c < best.0 {
                best = (c, x);
            }
        }
        best
    };

    let push_neighbors = |labels: &[Option<usize>],
                          v: usize,
                          heap: &mut BinaryHeap<Candidate>,
                          version: &mut [u32]| {
        for &(w, _) in graph.neighbors(v) {
            if labels[w].is_none() {
                version[w] += 1;
                let (cost, label) = best_label(labels, w);
                heap.push(Candidate {
                    cost,
                    node: w,
                    label,
                    version: version[w],
                });
            }
        }
    };

    for v in 0..n {
        if labels[v].is_some() {
            push_neighbors(&labels, v, &mut heap, &mut version);
        }
    }
    while let Some(c) = heap.pop() {
        if labels[c.node].is_some() || c.version != version[c.node] {
            continue;
        }
        labels[c.node] = Some(c.label);
        push_neighbors(&labels, c.node, &mut heap, &mut version);
    }

    labels
        .iter()
        .enumerate()
        .map(|(i, l)| l.ok_or(SolveError::Unreachable(i)))
        .collect::<Result<Vec<_>, _>>()
        .map(Labeling)
}

/// Seeds node 0 with its cheapest unary label.
pub fn default_seeds(inst: &BottleneckInstance) -> Vec<Option<usize>> {
    let mut seeds = vec![None; inst.node_count()];
    let u = &inst.theta().unary[0];
    let best = (0..u.len())
        .min_by(|&a, &b| u[a].total_cmp(&u[b]))
        .unwrap_or(0);
    seeds[0] = Some(best);
    seeds
}
