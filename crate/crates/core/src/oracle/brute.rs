use crate::error::SolveError;
use crate::model::{BottleneckInstance, Labeling, ZetaEnvelope};
use crate::par::{self, Execution};

pub const DEFAULT_CAP: u128 = 1_000_000;

const CHUNK: u128 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub energy: f64,
    pub labeling: Labeling,
    /// Optimal threshold `b`; at least the labeling's own bottleneck.
    pub bottleneck: f64,
}

/// Exhaustive minimum of `theta(x) + zeta(b)` over labelings `x` and
/// thresholds `b` in `B` with `max phi(x) <= b`. Ties go to the
/// lexicographically smallest labeling.
pub fn brute_force(inst: &BottleneckInstance) -> Result<BruteForceResult, SolveError> {
    brute_force_with(inst, DEFAULT_CAP, Execution::default())
}

pub fn brute_force_with(
    inst: &BottleneckInstance,
    cap: u128,
    exec: Execution,
) -> Result<BruteForceResult, SolveError> {
    let total = inst.labeling_count();
    if total > cap {
        return Err(SolveError::TooLarge(total, cap));
    }
    let zeta = inst.zeta_envelope();
    let chunks = total.div_ceil(CHUNK) as usize;
    let bests = par::map_range(exec, chunks, |c| {
        let start = c as u128 * CHUNK;
        let end = (start + CHUNK).min(total);
        scan(inst, &zeta, start, end)
    });
    let mut best: Option<(f64, u128, f64)> = None;
    for b in bests.into_iter().flatten() {
        if best.is_none_or(|cur| b.0 < cur.0) {
            best = Some(b);
        }
    }
    match best {
        Some((energy, index, bottleneck)) if energy < f64::INFINITY => Ok(BruteForceResult {
            energy,
            labeling: Labeling(decode(inst.label_counts(), index)),
            bottleneck,
        }),
        _ => Err(SolveError::Infeasible(
            "every labeling has infinite cost".into(),
        )),
    }
}

/// Mixed-radix decoding with node 0 as the most significant digit.
fn decode(counts: &[usize], mut index: u128) -> Vec<usize> {
    let mut x = vec![0; counts.len()];
    for (slot, &k) in x.iter_mut().zip(counts).rev() {
        *slot = (index % k as u128) as usize;
        index /= k as u128;
    }
    x
}

fn scan(
    inst: &BottleneckInstance,
    zeta: &ZetaEnvelope,
    start: u128,
    end: u128,
) -> Option<(f64, u128, f64)> {
    let counts = inst.label_counts();
    let graph = inst.graph();
    let (theta, phi) = (inst.theta(), inst.phi());
    let mut x = decode(counts, start);
    let mut best: Option<(f64, u128, f64)> = None;
    for index in start..end {
        let mut linear = 0.0;
        let mut bottleneck = f64::NEG_INFINITY;
        for (i, &l) in x.iter().enumerate() {
            linear += theta.unary[i][l];
            bottleneck = bottleneck.max(phi.unary[i][l]);
        }
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            let idx = x[i] * counts[j] + x[j];
            linear += theta.pairwise[e][idx];
            bottleneck = bottleneck.max(phi.pairwise[e][idx]);
        }
        if linear < f64::INFINITY {
            let (z, b) = zeta.eval(bottleneck);
            let energy = linear + z;
            if best.is_none_or(|cur| energy < cur.0) {
                best = Some((energy, index, b));
            }
        }
        // odometer, last node fastest
        for (slot, &k) in x.iter_mut().zip(counts).rev() {
            *slot += 1;
            if *slot < k {
                break;
            }
            *slot = 0;
        }
    }
    best
}
