//! Primal recovery from dual decomposition states.

mod marginals;
mod order;
mod primal;

pub use marginals::{chain_min_marginals, propagate_to_mrf, MinMarginalTable};
pub use order::{NodeOrder, OrderKind};
pub use primal::primal_round;

use crate::decomp::{chain_problem, CouplingSolver, Cover, CoverIndex, DualState};
use crate::error::SolveError;
use crate::model::{BottleneckInstance, FactorCosts, Labeling};
use crate::par::{self, Execution};

pub const DEFAULT_DAMPING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingConfig {
    pub order: OrderKind,
    /// Fraction of the min-marginal differences moved into the trees, in `(0, 1]`.
    pub damping: f64,
    pub exec: Execution,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self {
            order: OrderKind::Auto,
            damping: DEFAULT_DAMPING,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundedPrimal {
    pub labeling: Labeling,
    pub energy: f64,
}

/// Min-marginal tables of every chain at the given duals, plus the coupled
/// threshold `b*`.
pub fn min_marginal_tables(
    inst: &BottleneckInstance,
    cover: &Cover,
    duals: &DualState,
    exec: Execution,
) -> Result<(Vec<(usize, MinMarginalTable)>, f64), SolveError> {
    let problems: Vec<_> = cover
        .chains
        .iter()
        .zip(&duals.eta)
        .map(|(c, eta)| chain_problem(inst, c, eta))
        .collect();
    let zeta = inst.zeta_envelope();
    let coupled = CouplingSolver::new(&problems)?.solve(&zeta, exec)?;
    let higher = &coupled.higher;
    let tables = par::map_range(exec, problems.len(), |u| {
        let others = higher.combined_without(u)?;
        chain_min_marginals(&problems[u], others.as_ref(), &zeta).map(|t| (u, t))
    });
    Ok((
        tables.into_iter().collect::<Result<_, _>>()?,
        coupled.bottleneck,
    ))
}

/// Rounds the summed tree potentials, optionally forbidding every
/// configuration whose bottleneck value exceeds `threshold`.
pub fn round_duals(
    inst: &BottleneckInstance,
    cover: &Cover,
    duals: &DualState,
    order: &NodeOrder,
    threshold: Option<f64>,
) -> Result<RoundedPrimal, SolveError> {
    let graph = inst.graph();
    let mut pot = duals.aggregated_lambda(graph, inst.label_counts(), cover);
    if let Some(b) = threshold {
        forbid_above(&mut pot, inst.phi(), b);
    }
    let labeling = primal_round(graph, inst.label_counts(), &pot, order)?;
    let energy = inst.evaluate_energy(&labeling)?;
    Ok(RoundedPrimal { labeling, energy })
}

fn forbid_above(pot: &mut FactorCosts, phi: &FactorCosts, b: f64) {
    let pairs = pot
        .unary
        .iter_mut()
        .zip(&phi.unary)
        .chain(pot.pairwise.iter_mut().zip(&phi.pairwise));
    for (t, p) in pairs {
        for (tv, &pv) in t.iter_mut().zip(p) {
            if pv > b {
                *tv = f64::INFINITY;
            }
        }
    }
}

/// Lowest-energy labeling among `candidates`, earlier ones winning ties.
pub fn best_of(
    candidates: impl IntoIterator<Item = Result<RoundedPrimal, SolveError>>,
) -> Option<RoundedPrimal> {
    let mut best: Option<RoundedPrimal> = None;
    for c in candidates.into_iter().flatten() {
        if c.energy < f64::INFINITY && best.as_ref().is_none_or(|b| c.energy < b.energy) {
            best = Some(c);
        }
    }
    best
}

/// Propagates chain min-marginals into the tree duals once, then rounds the
/// result both unrestricted and restricted to the coupled threshold.
pub fn recover_primal(
    inst: &BottleneckInstance,
    cover: &Cover,
    duals: &DualState,
    config: &RoundingConfig,
) -> Result<RoundedPrimal, SolveError> {
    let order = NodeOrder::for_graph(inst.graph(), config.order);
    let mut moved = duals.clone();
    let mut threshold = None;
    if let Ok((tables, b)) = min_marginal_tables(inst, cover, duals, config.exec) {
        let index = CoverIndex::new(inst.graph(), cover);
        propagate_to_mrf(cover, &index, &mut moved, &tables, config.damping)?;
        threshold = Some(b);
    }
    let mut candidates = vec![round_duals(inst, cover, &moved, &order, None)];
    if let Some(b) = threshold {
        candidates.push(round_duals(inst, cover, &moved, &order, Some(b)));
    }
    candidates.push(round_duals(inst, cover, duals, &order, None));
    let failure = candidates.iter().find_map(|c| c.as_ref().err().cloned());
    best_of(candidates).ok_or_else(|| {
        failure.unwrap_or_else(|| {
            SolveError::Infeasible("every rounded labeling has infinite energy".into())
        })
    })
}
