use crate::decomp::{Cover, CoverIndex, DualState};
use crate::error::SolveError;
use crate::exact::{BottleneckProfile, ChainProblem, ChainSolver, Direction, DistanceState};
use crate::model::ZetaEnvelope;

/// Min-marginals of one chain inside the coupled bottleneck problem:
/// `values[p][y]` is the best coupled objective with position `p` fixed to `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMarginalTable {
    pub values: Vec<Vec<f64>>,
}

impl MinMarginalTable {
    /// Smallest entry per position; all equal to the coupled optimum when the
    /// coupled problem is feasible.
    pub fn node_minima(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.iter().copied().fold(f64::INFINITY, f64::min))
            .collect()
    }
}

/// Best `zeta(b) + others(b)` over thresholds `b >= b0`.
struct OthersTail {
    keys: Vec<f64>,
    // suffix minimum of zeta(key) + value over the other chains' profile
    suffix: Vec<f64>,
    others: Option<BottleneckProfile>,
}

impl OthersTail {
    fn new(others: Option<&BottleneckProfile>, zeta: &ZetaEnvelope) -> Self {
        let Some(p) = others else {
            return Self {
                keys: Vec::new(),
                suffix: Vec::new(),
                others: None,
            };
        };
        let keys: Vec<f64> = p.entries().iter().map(|e| e.0).collect();
        let mut suffix = vec![f64::INFINITY; keys.len() + 1];
        for (i, &(b, c)) in p.entries().iter().enumerate().rev() {
            suffix[i] = suffix[i + 1].min(zeta.cost(b) + c);
        }
        Self {
            keys,
            suffix,
            others: Some(p.clone()),
        }
    }

    fn best_from(&self, b0: f64, zeta: &ZetaEnvelope) -> f64 {
        match &self.others {
            None => zeta.cost(b0),
            Some(p) => {
                let here = p.value_at(b0).map_or(f64::INFINITY, |c| zeta.cost(b0) + c);
                let next = self.keys.partition_point(|&k| k <= b0);
                here.min(self.suffix[next])
            }
        }
    }
}

/// Node min-marginals of chain `problem` coupled with the other chains,
/// which enter only through their combined profile `others` (`None` if the
/// chain stands alone).
///
/// Arcs are inserted by ascending bottleneck value into a forward and a
/// backward shortest-path state at once. After each insertion only the label
/// nodes whose distance from the source or to the sink dropped are revisited:
/// their best path cost is merged with the best way to pay for the threshold
/// and the other chains at any threshold from the current one upward.
pub fn chain_min_marginals(
    problem: &ChainProblem,
    others: Option<&BottleneckProfile>,
    zeta: &ZetaEnvelope,
) -> Result<MinMarginalTable, SolveError> {
    let solver = ChainSolver::new(problem)?;
    let dag = solver.dag();
    let tail = OthersTail::new(others, zeta);
    let mut values: Vec<Vec<f64>> = problem
        .label_counts
        .iter()
        .map(|&k| vec![f64::INFINITY; k])
        .collect();
    let mut fwd = DistanceState::new(dag, Direction::Forward);
    let mut bwd = DistanceState::new(dag, Direction::Backward);
    let (mut changed_f, mut changed_b) = (Vec::new(), Vec::new());
    let mut visit = |w: usize, b0: f64, fwd: &DistanceState, bwd: &DistanceState| {
        if let Some((pos, label)) = dag.node_owner(w) {
            if w != dag.label_node(pos, label) {
                return;
            }
            let through = fwd.distance(w) + bwd.distance(w);
            if through < f64::INFINITY {
                let v = through + tail.best_from(b0, zeta);
                if v < values[pos][label] {
                    values[pos][label] = v;
                }
            }
        }
    };
    for &a in solver.order() {
        let arc = dag.arc(a);
        if arc.sigma == f64::INFINITY {
            continue;
        }
        fwd.insert_into(dag, a, &mut changed_f);
        bwd.insert_into(dag, a, &mut changed_b);
        if arc.omega == f64::NEG_INFINITY {
            continue;
        }
        for &w in changed_f.iter().chain(&changed_b) {
            visit(w, arc.omega, &fwd, &bwd);
        }
    }
    if values.iter().flatten().all(|v| *v == f64::INFINITY) {
        return Err(SolveError::Infeasible(
            "chain has no feasible labeling in the coupled problem".into(),
        ));
    }
    Ok(MinMarginalTable { values })
}

/// Moves part of each chain's normalized node min-marginals from `eta` into
/// the `lambda` of the trees covering that node.
///
/// For chain `u` with `n_u` nodes, out of `T` tables, the shift is
/// `w / (n_u * T) * (m - min m)`. The trees only gain non-negative costs and
/// the coupled value cannot drop, so the dual bound does not decrease.
pub fn propagate_to_mrf(
    cover: &Cover,
    index: &CoverIndex,
    duals: &mut DualState,
    tables: &[(usize, MinMarginalTable)],
    damping: f64,
) -> Result<(), SolveError> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(SolveError::InvalidParameter(format!(
            "damping {damping} outside (0, 1]"
        )));
    }
    let t = tables.len() as f64;
    for (u, table) in tables {
        let chain = &cover.chains[*u];
        let scale = damping / (chain.nodes.len() as f64 * t);
        for (p, (&v, m)) in chain.nodes.iter().zip(&table.values).enumerate() {
            let low = m.iter().copied().fold(f64::INFINITY, f64::min);
            if low == f64::INFINITY {
                continue;
            }
            let trees: Vec<(usize, usize)> = index.trees_covering_node(v).collect();
            let share = trees.len() as f64;
            for (y, &my) in m.iter().enumerate() {
                let delta = my - low;
                let eta = &mut duals.eta[*u].unary[p][y];
                if delta == 0.0 || delta == f64::INFINITY || *eta == f64::INFINITY {
                    continue;
                }
                let shift = scale * delta;
                *eta -= shift;
                for &(tree, local) in &trees {
                    duals.lambda[tree].unary[local][y] += shift / share;
                }
            }
        }
    }
    Ok(())
}
