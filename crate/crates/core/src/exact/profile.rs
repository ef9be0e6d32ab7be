use crate::error::SolveError;
use crate::model::ZetaEnvelope;

/// Lower envelope of `(bottleneck threshold b, best linear cost c)` pairs.
///
/// Entries are strictly increasing in `b` and non-increasing in `c`. The value
/// at an arbitrary threshold is the `c` of the largest key not above it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BottleneckProfile {
    entries: Vec<(f64, f64)>,
}

impl BottleneckProfile {
    /// Builds a profile from raw `(b, c)` records in any order. Records sharing
    /// a `b` collapse to their minimum `c`; a record is dominated by any record
    /// at a smaller or equal threshold with no larger cost.
    pub fn from_records(mut records: Vec<(f64, f64)>) -> Self {
        records.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut entries: Vec<(f64, f64)> = Vec::with_capacity(records.len());
        for (b, c) in records {
            match entries.last_mut() {
                Some(last) if last.0 == b => last.1 = last.1.min(c),
                Some(last) => {
                    let c = c.min(last.1);
                    entries.push((b, c));
                }
                None => entries.push((b, c)),
            }
        }
        Self { entries }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest threshold at which some labeling is feasible.
    pub fn min_bottleneck(&self) -> Option<f64> {
        self.entries.first().map(|e| e.0)
    }

    /// Best linear cost among labelings whose bottleneck is at most `b`.
    pub fn value_at(&self, b: f64) -> Option<f64> {
        let pos = self.entries.partition_point(|&(key, _)| key <= b);
        pos.checked_sub(1).map(|p| self.entries[p].1)
    }
}

/// Optimal `(b*, c*)` with its objective `c* + zeta(b*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BottleneckChoice {
    pub bottleneck: f64,
    pub linear: f64,
    pub objective: f64,
}

/// `argmin_{(b, c) in profile} c + zeta(b)`, ties going to the smaller `b`.
pub fn select_optimal_bottleneck(
    profile: &BottleneckProfile,
    zeta: &ZetaEnvelope,
) -> Result<BottleneckChoice, SolveError> {
    let mut best: Option<BottleneckChoice> = None;
    for &(b, c) in profile.entries() {
        let (z, realized) = zeta.eval(b);
        let objective = c + z;
        if best.is_none_or(|cur| objective < cur.objective) {
            best = Some(BottleneckChoice {
                bottleneck: realized,
                linear: c,
                objective,
            });
        }
    }
    best.ok_or(SolveError::EmptyProfile)
}
