use crate::error::SolveError;
use crate::exact::{
    select_optimal_bottleneck, BottleneckProfile, ChainProblem, ChainSolver, UnarySolver,
};
use crate::model::{Labeling, ZetaEnvelope};
use crate::par::{self, Execution};

/// Per-chain profiles viewed as an edge-free problem: chain `l` is a node
/// whose labels are the entries of its profile, with the entry's `c` as
/// linear and its `b` as bottleneck potential.
#[derive(Debug, Clone, PartialEq)]
pub struct HigherLevelProfile {
    pub profiles: Vec<BottleneckProfile>,
}

impl HigherLevelProfile {
    pub fn new(profiles: Vec<BottleneckProfile>) -> Result<Self, SolveError> {
        if profiles.iter().any(BottleneckProfile::is_empty) {
            return Err(SolveError::EmptyProfile);
        }
        Ok(Self { profiles })
    }

    pub fn theta(&self) -> Vec<Vec<f64>> {
        self.profiles
            .iter()
            .map(|p| p.entries().iter().map(|e| e.1).collect())
            .collect()
    }

    pub fn phi(&self) -> Vec<Vec<f64>> {
        self.profiles
            .iter()
            .map(|p| p.entries().iter().map(|e| e.0).collect())
            .collect()
    }

    /// Profile of `sum_l value_l(b)` over all chains.
    pub fn combined(&self) -> Result<BottleneckProfile, SolveError> {
        UnarySolver::new(&self.phi()).solve(&self.theta())
    }

    /// Same, leaving out chain `skip`. `None` if no other chain exists.
    pub fn combined_without(&self, skip: usize) -> Result<Option<BottleneckProfile>, SolveError> {
        let (theta, phi): (Vec<_>, Vec<_>) = self
            .theta()
            .into_iter()
            .zip(self.phi())
            .enumerate()
            .filter(|&(l, _)| l != skip)
            .map(|(_, tp)| tp)
            .unzip();
        if theta.is_empty() {
            return Ok(None);
        }
        UnarySolver::new(&phi).solve(&theta).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSolution {
    /// `J = zeta(b*) + sum_l value_l(b*)`.
    pub value: f64,
    pub bottleneck: f64,
    pub labelings: Vec<Labeling>,
    /// Linear cost of each chain labeling.
    pub chain_costs: Vec<f64>,
    pub higher: HigherLevelProfile,
}

/// Chain solvers kept across dual iterations; only linear costs change.
#[derive(Debug, Clone)]
pub struct CouplingSolver {
    solvers: Vec<ChainSolver>,
}

impl CouplingSolver {
    pub fn new(problems: &[ChainProblem]) -> Result<Self, SolveError> {
        let solvers = problems
            .iter()
            .map(ChainSolver::new)
            .collect::<Result<_, _>>()?;
        Ok(Self { solvers })
    }

    pub fn solvers(&self) -> &[ChainSolver] {
        &self.solvers
    }

    pub fn set_costs(&mut self, problems: &[ChainProblem]) {
        for (s, p) in self.solvers.iter_mut().zip(problems) {
            s.set_costs(p);
        }
    }

    pub fn set_chain_costs(&mut self, l: usize, problem: &ChainProblem) {
        self.solvers[l].set_costs(problem);
    }

    pub fn profiles(&mut self, exec: Execution) -> Result<HigherLevelProfile, SolveError> {
        let profiles = par::map_slice_mut(exec, &mut self.solvers, |_, s| s.profile());
        HigherLevelProfile::new(profiles.into_iter().collect::<Result<_, _>>()?)
    }

    pub fn solve(
        &mut self,
        zeta: &ZetaEnvelope,
        exec: Execution,
    ) -> Result<CouplingSolution, SolveError> {
        let higher = self.profiles(exec)?;
        let choice = select_optimal_bottleneck(&higher.combined()?, zeta)?;
        let b = choice.bottleneck;
        let paths = par::map_slice(exec, &self.solvers, |s| s.labeling_at(b));
        let (labelings, chain_costs): (Vec<_>, Vec<_>) = paths
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .unzip();
        let value = zeta.cost(b) + chain_costs.iter().sum::<f64>();
        Ok(CouplingSolution {
            value,
            bottleneck: b,
            labelings,
            chain_costs,
            higher,
        })
    }
}

/// `min_b zeta(b) + sum_l min { cost_l(y) : y labels chain l, bottleneck(y) <= b }`
/// with a minimizing threshold and chain labelings.
pub fn solve_bottleneck_coupling(
    problems: &[ChainProblem],
    zeta: &ZetaEnvelope,
) -> Result<CouplingSolution, SolveError> {
    CouplingSolver::new(problems)?.solve(zeta, Execution::Sequential)
}
