use crate::error::SolveError;
use crate::exact::profile::BottleneckProfile;
use crate::model::BottleneckInstance;

/// Edge-free bottleneck problem: per node, linear and bottleneck values per label.
#[derive(Debug, Clone, PartialEq)]
pub struct UnaryProblem {
    pub theta: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
}

impl UnaryProblem {
    pub fn from_instance(inst: &BottleneckInstance) -> Result<Self, SolveError> {
        if inst.graph().edge_count() > 0 {
            return Err(SolveError::HasEdges(inst.graph().edge_count()));
        }
        Ok(Self {
            theta: inst.theta().unary.clone(),
            phi: inst.phi().unary.clone(),
        })
    }

    pub fn total_labels(&self) -> usize {
        self.theta.iter().map(Vec::len).sum()
    }
}

/// Sweep over all labels in ascending bottleneck order.
///
/// The sort depends only on `phi`, so one solver serves any number of `theta`s.
#[derive(Debug, Clone)]
pub struct UnarySolver {
    order: Vec<(u32, u32)>,
    phi: Vec<Vec<f64>>,
    sorts: usize,
}

impl UnarySolver {
    pub fn new(phi: &[Vec<f64>]) -> Self {
        let mut order: Vec<(u32, u32)> = phi
            .iter()
            .enumerate()
            .flat_map(|(i, p)| (0..p.len()).map(move |l| (i as u32, l as u32)))
            .collect();
        order.sort_by(|a, b| {
            phi[a.0 as usize][a.1 as usize].total_cmp(&phi[b.0 as usize][b.1 as usize])
        });
        Self {
            order,
            phi: phi.to_vec(),
            sorts: 1,
        }
    }

    /// How many times the label order has been sorted.
    pub fn sort_count(&self) -> usize {
        self.sorts
    }

    /// Profile of `sum_i min { theta_i(x) : phi_i(x) <= b }`. Entries start once
    /// every node has a feasible (finite-cost) label.
    pub fn solve(&self, theta: &[Vec<f64>]) -> Result<BottleneckProfile, SolveError> {
        let n = self.phi.len();
        debug_assert_eq!(theta.len(), n);
        let mut best = vec![f64::INFINITY; n];
        let mut covered = 0usize;
        let mut c = 0.0;
        let mut records = Vec::new();
        for &(i, l) in &self.order {
            let (i, l) = (i as usize, l as usize);
            let t = theta[i][l];
            if t == f64::INFINITY {
                continue;
            }
            if best[i] == f64::INFINITY {
                covered += 1;
                c += t;
                best[i] = t;
            } else if t < best[i] {
                c = c - best[i] + t;
                best[i] = t;
            }
            if covered == n {
                records.push((self.phi[i][l], c));
            }
        }
        if covered < n {
            let node = best.iter().position(|v| v.is_infinite()).unwrap_or(0);
            return Err(SolveError::Infeasible(format!(
                "node {node} has no label with finite cost"
            )));
        }
        Ok(BottleneckProfile::from_records(records))
    }
}

pub fn solve_unary_bottleneck(problem: &UnaryProblem) -> Result<BottleneckProfile, SolveError> {
    UnarySolver::new(&problem.phi).solve(&problem.theta)
}

/// Best label per node at threshold `b` (smallest index on ties).
pub fn unary_labeling_at(problem: &UnaryProblem, b: f64) -> Result<Vec<usize>, SolveError> {
    problem
        .theta
        .iter()
        .zip(&problem.phi)
        .map(|(t, p)| {
            let mut best: Option<(usize, f64)> = None;
            for (l, (&tv, &pv)) in t.iter().zip(p).enumerate() {
                if pv <= b && tv < f64::INFINITY && best.is_none_or(|(_, c)| tv < c) {
                    best = Some((l, tv));
                }
            }
            best.map(|(l, _)| l)
                .ok_or(SolveError::InfeasibleThreshold(b))
        })
        .collect()
}
