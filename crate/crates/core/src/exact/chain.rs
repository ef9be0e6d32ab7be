use crate::error::SolveError;
use crate::exact::dag::{chain_to_dag, ChainProblem, LayeredDag};
use crate::exact::dsp::{Direction, DistanceState};
use crate::exact::profile::BottleneckProfile;
use crate::model::Labeling;

/// Work counters of a [`ChainSolver`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChainStats {
    /// Times the arc list was sorted by bottleneck value.
    pub sorts: usize,
    pub solves: usize,
    pub insertions: u64,
    /// Arc relaxations summed over all solves.
    pub relaxations: u64,
    /// Relaxations of the most recent solve.
    pub last_relaxations: u64,
}

/// Bottleneck solver for one chain with a cached, sorted shortest-path network.
///
/// Only linear costs may change between solves; the bottleneck values and
/// therefore the arc order stay fixed.
#[derive(Debug, Clone)]
pub struct ChainSolver {
    dag: LayeredDag,
    order: Vec<usize>,
    stats: ChainStats,
}

impl ChainSolver {
    pub fn new(problem: &ChainProblem) -> Result<Self, SolveError> {
        let dag = chain_to_dag(problem)?;
        let mut order: Vec<usize> = (0..dag.arc_count()).collect();
        // stable: equal bottleneck values keep arc id order
        order.sort_by(|&a, &b| dag.arc(a).omega.total_cmp(&dag.arc(b).omega));
        Ok(Self {
            dag,
            order,
            stats: ChainStats {
                sorts: 1,
                ..ChainStats::default()
            },
        })
    }

    pub fn dag(&self) -> &LayeredDag {
        &self.dag
    }

    /// Arc ids in ascending bottleneck order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn stats(&self) -> ChainStats {
        self.stats
    }

    /// Swaps in new linear costs. The bottleneck values of `problem` are ignored.
    pub fn set_costs(&mut self, problem: &ChainProblem) {
        self.dag.set_costs(problem);
    }

    /// Inserts arcs by ascending bottleneck value and records the s-t distance
    /// after every insertion that leaves the sink reachable.
    pub fn profile(&mut self) -> Result<BottleneckProfile, SolveError> {
        let dag = &self.dag;
        let mut state = DistanceState::new(dag, Direction::Forward);
        let mut changed = Vec::new();
        let mut records = Vec::new();
        let t = dag.sink();
        let mut insertions = 0;
        for &a in &self.order {
            let arc = dag.arc(a);
            if arc.sigma == f64::INFINITY {
                continue;
            }
            state.insert_into(dag, a, &mut changed);
            insertions += 1;
            let d = state.distance(t);
            if d < f64::INFINITY && arc.omega > f64::NEG_INFINITY {
                records.push((arc.omega, d));
            }
        }
        self.stats.solves += 1;
        self.stats.insertions += insertions;
        self.stats.relaxations += state.relaxations();
        self.stats.last_relaxations = state.relaxations();
        if records.is_empty() {
            return Err(SolveError::Infeasible(
                "no source-sink path in the chain network".into(),
            ));
        }
        Ok(BottleneckProfile::from_records(records))
    }

    /// Cheapest labeling whose bottleneck does not exceed `b`, with its linear cost.
    pub fn labeling_at(&self, b: f64) -> Result<(Labeling, f64), SolveError> {
        self.dag
            .shortest_path(|arc| arc.omega <= b)
            .map(|(cost, labels)| (labels, cost))
            .ok_or(SolveError::InfeasibleThreshold(b))
    }
}

/// Full bottleneck profile of a chain.
pub fn solve_chain_bottleneck(problem: &ChainProblem) -> Result<BottleneckProfile, SolveError> {
    ChainSolver::new(problem)?.profile()
}

/// Shortest path in the chain network restricted to arcs with bottleneck value `<= b`.
pub fn extract_chain_labeling(problem: &ChainProblem, b: f64) -> Result<Labeling, SolveError> {
    Ok(ChainSolver::new(problem)?.labeling_at(b)?.0)
}
