//! Dual decomposition for general graphs: trees carry the linear part, chains
//! the bottleneck part, and supergradient ascent balances the two.

mod ascent;
mod coupling;
mod cover;
mod dual;
mod tree;

pub use ascent::{
    chain_problems, compute_supergradient, dual_ascent, dual_objective, DualConfig, DualEvaluation,
    DualEvaluator, DualReport, IterationRecord, StepRule, StopReason,
};
pub use coupling::{
    solve_bottleneck_coupling, CouplingSolution, CouplingSolver, HigherLevelProfile,
};
pub use cover::{
    build_cover, build_generic_cover, build_grid_cover, detect_grid, Cover, SubChain, SubTree,
};
pub use dual::{chain_problem, CoverIndex, DualState, LocalCosts, Slot};
pub use tree::{solve_tree_mrf, TreeLayout, TreeSolution};

use crate::error::SolveError;
use crate::model::{BottleneckInstance, Labeling};
use crate::rounding::{best_of, recover_primal, RoundingConfig, DEFAULT_DAMPING};

#[derive(Debug, Clone, PartialEq)]
pub struct DecompSolution {
    pub report: DualReport,
    pub labeling: Labeling,
    pub energy: f64,
    /// `(energy - lower_bound) / max(1, |lower_bound|)`.
    pub gap: f64,
}

/// Dual ascent followed by min-marginal propagation and rounding at the best
/// duals. Returns the best labeling found by either.
pub fn solve_decomposition(
    inst: &BottleneckInstance,
    cover: &Cover,
    config: &DualConfig,
) -> Result<DecompSolution, SolveError> {
    let report = dual_ascent(inst, cover, config)?;
    let rounding = RoundingConfig {
        order: config.order,
        damping: DEFAULT_DAMPING,
        exec: config.exec,
    };
    let recovered = recover_primal(inst, cover, &report.duals, &rounding);
    let failure = recovered.as_ref().err().cloned();
    let best =
        best_of(report.primal.clone().map(Ok).into_iter().chain([recovered])).ok_or_else(|| {
            failure.unwrap_or_else(|| SolveError::Infeasible("no finite labeling found".into()))
        })?;
    let lb = report.lower_bound;
    Ok(DecompSolution {
        gap: (best.energy - lb) / lb.abs().max(1.0),
        labeling: best.labeling,
        energy: best.energy,
        report,
    })
}
