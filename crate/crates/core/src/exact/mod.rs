//! Exact bottleneck labeling on edge-free graphs and on chains.

mod chain;
mod dag;
mod dsp;
mod profile;
mod unary;

pub use chain::{extract_chain_labeling, solve_chain_bottleneck, ChainSolver, ChainStats};
pub use dag::{chain_to_dag, ArcOrigin, ChainProblem, DagArc, LayeredDag};
pub use dsp::{Direction, DistanceState};
pub use profile::{select_optimal_bottleneck, BottleneckChoice, BottleneckProfile};
pub use unary::{solve_unary_bottleneck, unary_labeling_at, UnaryProblem, UnarySolver};

use crate::error::SolveError;
use crate::model::{BottleneckInstance, Labeling};

/// Optimal labeling of an instance together with the profile it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub labeling: Labeling,
    pub bottleneck: f64,
    pub linear_cost: f64,
    /// `linear_cost + zeta(bottleneck)`.
    pub energy: f64,
    pub profile: BottleneckProfile,
}

/// Solves an instance without edges.
pub fn solve_unary(inst: &BottleneckInstance) -> Result<ExactSolution, SolveError> {
    let problem = UnaryProblem::from_instance(inst)?;
    let profile = solve_unary_bottleneck(&problem)?;
    let choice = select_optimal_bottleneck(&profile, &inst.zeta_envelope())?;
    let labeling = Labeling(unary_labeling_at(&problem, choice.bottleneck)?);
    Ok(ExactSolution {
        labeling,
        bottleneck: choice.bottleneck,
        linear_cost: choice.linear,
        energy: choice.objective,
        profile,
    })
}

/// Solves an instance whose graph is the path `0 - 1 - ... - (n-1)`.
pub fn solve_chain(inst: &BottleneckInstance) -> Result<ExactSolution, SolveError> {
    let problem = ChainProblem::from_instance(inst)?;
    let mut solver = ChainSolver::new(&problem)?;
    let profile = solver.profile()?;
    let choice = select_optimal_bottleneck(&profile, &inst.zeta_envelope())?;
    let (labeling, _) = solver.labeling_at(choice.bottleneck)?;
    Ok(ExactSolution {
        labeling,
        bottleneck: choice.bottleneck,
        linear_cost: choice.linear,
        energy: choice.objective,
        profile,
    })
}
