use crate::decomp::coupling::{CouplingSolution, CouplingSolver};
use crate::decomp::cover::Cover;
use crate::decomp::dual::{chain_problem, CoverIndex, DualState, LocalCosts, Slot};
use crate::decomp::tree::TreeLayout;
use crate::error::SolveError;
use crate::exact::ChainProblem;
use crate::model::{BottleneckInstance, Labeling, ZetaEnvelope};
use crate::par::{self, Execution};
use crate::rounding::{best_of, round_duals, NodeOrder, OrderKind, RoundedPrimal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `alpha * (UB - bound) / |g|^2`, with `alpha` halved after
    /// `patience` iterations without a better bound. Until a finite upper
    /// bound exists, `fallback / sqrt(k)` is used.
    Polyak {
        alpha: f64,
        patience: usize,
        fallback: f64,
    },
    /// `initial / sqrt(k)` at iteration `k >= 1`.
    Diminishing { initial: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualConfig {
    pub max_iters: usize,
    /// Stop once `(UB - bound) / max(1, |bound|)` drops below this.
    pub tol: f64,
    pub step: StepRule,
    /// Stop when the best bound improves by less than `stall_eps` over
    /// `stall_window` iterations.
    pub stall_window: usize,
    pub stall_eps: f64,
    pub order: OrderKind,
    pub exec: Execution,
}

impl Default for DualConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            tol: 1e-6,
            step: StepRule::Polyak {
                alpha: 1.0,
                patience: 20,
                fallback: 1.0,
            },
            stall_window: 50,
            stall_eps: 1e-9,
            order: OrderKind::Auto,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub bound: f64,
    pub best_bound: f64,
    /// Step taken after this evaluation; 0 on the last one.
    pub step: f64,
    /// Best primal energy known after this iteration.
    pub upper_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// All subproblems agree; the bound equals the energy of their labeling.
    Consensus,
    GapClosed,
    Stalled,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualReport {
    /// Best bound seen; equal to `sum_t E^t + J` at `duals`.
    pub lower_bound: f64,
    pub duals: DualState,
    pub tree_labelings: Vec<Vec<usize>>,
    pub chain_labelings: Vec<Labeling>,
    /// Coupled threshold `b*` at `duals`.
    pub bottleneck: f64,
    pub trace: Vec<IterationRecord>,
    /// Number of dual updates applied.
    pub iterations: usize,
    pub stop: StopReason,
    /// Best labeling rounded along the way.
    pub primal: Option<RoundedPrimal>,
}

/// Subproblem optima at one dual point.
#[derive(Debug, Clone, PartialEq)]
pub struct DualEvaluation {
    /// `sum_t E^t(lambda^t) + J(eta)`.
    pub bound: f64,
    pub tree_values: Vec<f64>,
    pub tree_labels: Vec<Vec<usize>>,
    pub coupling: CouplingSolution,
}

/// Cached per-instance machinery for evaluating the dual.
#[derive(Debug, Clone)]
pub struct DualEvaluator<'a> {
    inst: &'a BottleneckInstance,
    cover: &'a Cover,
    index: CoverIndex,
    layouts: Vec<TreeLayout>,
    coupling: CouplingSolver,
    zeta: ZetaEnvelope,
    exec: Execution,
}

impl<'a> DualEvaluator<'a> {
    pub fn new(
        inst: &'a BottleneckInstance,
        cover: &'a Cover,
        exec: Execution,
    ) -> Result<Self, SolveError> {
        cover.validate(inst.graph())?;
        let graph = inst.graph();
        let layouts = cover
            .trees
            .iter()
            .map(|t| TreeLayout::new(graph, inst.label_counts(), t))
            .collect();
        let initial = DualState::initial(inst, cover);
        let coupling = CouplingSolver::new(&chain_problems(inst, cover, &initial))?;
        Ok(Self {
            inst,
            cover,
            index: CoverIndex::new(graph, cover),
            layouts,
            coupling,
            zeta: inst.zeta_envelope(),
            exec,
        })
    }

    pub fn index(&self) -> &CoverIndex {
        &self.index
    }

    pub fn evaluate(&mut self, duals: &DualState) -> Result<DualEvaluation, SolveError> {
        let trees = par::map_range(self.exec, self.layouts.len(), |t| {
            self.layouts[t].solve(&duals.lambda[t])
        });
        let trees = trees.into_iter().collect::<Result<Vec<_>, _>>()?;
        self.coupling
            .set_costs(&chain_problems(self.inst, self.cover, duals));
        let coupling = self.coupling.solve(&self.zeta, self.exec)?;
        let tree_values: Vec<f64> = trees.iter().map(|s| s.value).collect();
        let bound = tree_values.iter().sum::<f64>() + coupling.value;
        Ok(DualEvaluation {
            bound,
            tree_values,
            tree_labels: trees.into_iter().map(|s| s.labels).collect(),
            coupling,
        })
    }
}

pub fn chain_problems(
    inst: &BottleneckInstance,
    cover: &Cover,
    duals: &DualState,
) -> Vec<ChainProblem> {
    cover
        .chains
        .iter()
        .zip(&duals.eta)
        .map(|(c, eta)| chain_problem(inst, c, eta))
        .collect()
}

/// `sum_t E^t(lambda^t) + J(eta)` at `duals`.
pub fn dual_objective(
    inst: &BottleneckInstance,
    cover: &Cover,
    duals: &DualState,
) -> Result<f64, SolveError> {
    Ok(DualEvaluator::new(inst, cover, Execution::Sequential)?
        .evaluate(duals)?
        .bound)
}

/// Supergradient of the dual at the point whose subproblem argmins are
/// given, projected so that the components for each factor sum to zero:
/// the one-hot of every argmin minus the mean one-hot over the subproblems
/// covering that factor. Has the shape of `duals`.
pub fn compute_supergradient(
    inst: &BottleneckInstance,
    cover: &Cover,
    duals: &DualState,
    tree_labels: &[Vec<usize>],
    chain_labels: &[Labeling],
) -> DualState {
    let index = CoverIndex::new(inst.graph(), cover);
    supergradient(inst, &index, duals, tree_labels, chain_labels)
}

fn supergradient(
    inst: &BottleneckInstance,
    index: &CoverIndex,
    duals: &DualState,
    tree_labels: &[Vec<usize>],
    chain_labels: &[Labeling],
) -> DualState {
    let counts = inst.label_counts();
    let graph = inst.graph();
    let mut dir = duals.zeros_like();

    fn table(dir: &mut DualState, slot: Slot, unary: bool) -> &mut Vec<f64> {
        let (costs, local): (&mut LocalCosts, usize) = match slot {
            Slot::Tree { tree, local } => (&mut dir.lambda[tree], local),
            Slot::Chain { chain, local } => (&mut dir.eta[chain], local),
        };
        if unary {
            &mut costs.unary[local]
        } else {
            &mut costs.pairwise[local]
        }
    }

    let node_label = |slot: Slot| match slot {
        Slot::Tree { tree, local } => tree_labels[tree][local],
        Slot::Chain { chain, local } => chain_labels[chain][local],
    };
    for slots in &index.node_slots {
        project(&mut dir, slots, true, node_label, table);
    }
    for (e, slots) in index.edge_slots.iter().enumerate() {
        let kj = counts[graph.edge(e).1];
        let config = |slot: Slot| match slot {
            Slot::Tree { tree, local } => {
                let (a, b) = index.tree_edge_ends[tree][local];
                tree_labels[tree][a] * kj + tree_labels[tree][b]
            }
            Slot::Chain { chain, local } => {
                let (a, b) = index.chain_edge_ends[chain][local];
                chain_labels[chain][a] * kj + chain_labels[chain][b]
            }
        };
        project(&mut dir, slots, false, config, table);
    }
    dir
}

fn project(
    dir: &mut DualState,
    slots: &[Slot],
    unary: bool,
    chosen: impl Fn(Slot) -> usize,
    table: impl for<'d> Fn(&'d mut DualState, Slot, bool) -> &'d mut Vec<f64>,
) {
    if slots.len() < 2 {
        return;
    }
    let picks: Vec<usize> = slots.iter().map(|&s| chosen(s)).collect();
    if picks.iter().all(|&p| p == picks[0]) {
        return;
    }
    let share = 1.0 / slots.len() as f64;
    for (&slot, &mine) in slots.iter().zip(&picks) {
        let t = table(dir, slot, unary);
        t[mine] += 1.0;
        for &other in &picks {
            t[other] -= share;
        }
    }
}

/// Labeling taking every node's label from the first tree covering it.
fn tree_consensus(index: &CoverIndex, tree_labels: &[Vec<usize>]) -> Labeling {
    Labeling(
        (0..index.node_slots.len())
            .map(|v| {
                let (t, local) = index.trees_covering_node(v).next().expect("covered node");
                tree_labels[t][local]
            })
            .collect(),
    )
}

/// Projected supergradient ascent on the decomposition dual.
///
/// Every iteration evaluates all tree and chain subproblems, rounds the
/// summed tree potentials (plain and restricted to the current `b*`) for an
/// upper bound, and moves along the projected supergradient.
pub fn dual_ascent(
    inst: &BottleneckInstance,
    cover: &Cover,
    config: &DualConfig,
) -> Result<DualReport, SolveError> {
    if config.tol.is_nan() || config.tol < 0.0 {
        return Err(SolveError::InvalidParameter(format!(
            "tolerance {} must be >= 0",
            config.tol
        )));
    }
    let mut eval = DualEvaluator::new(inst, cover, config.exec)?;
    let order = NodeOrder::for_graph(inst.graph(), config.order);
    let mut duals = DualState::initial(inst, cover);

    let mut best: Option<(f64, DualState, DualEvaluation)> = None;
    let mut primal: Option<RoundedPrimal> = None;
    let mut trace = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut alpha = match config.step {
        StepRule::Polyak { alpha, .. } => alpha,
        StepRule::Diminishing { .. } => 0.0,
    };
    let mut since_improved = 0usize;
    let mut iterations = 0;

    let stop = loop {
        let k = trace.len();
        let at = eval.evaluate(&duals)?;
        let bound = at.bound;
        if best.as_ref().is_none_or(|b| bound > b.0) {
            best = Some((bound, duals.clone(), at.clone()));
            since_improved = 0;
        } else {
            since_improved += 1;
        }
        let best_bound = best.as_ref().map_or(bound, |b| b.0);
        history.push(best_bound);

        let consensus = RoundedPrimal {
            labeling: tree_consensus(eval.index(), &at.tree_labels),
            energy: 0.0,
        };
        let candidates = [
            inst.evaluate_energy(&consensus.labeling)
                .map(|energy| RoundedPrimal {
                    energy,
                    ..consensus
                })
                .map_err(SolveError::from),
            round_duals(inst, cover, &duals, &order, Some(at.coupling.bottleneck)),
            round_duals(inst, cover, &duals, &order, None),
        ];
        if let Some(c) = best_of(primal.clone().map(Ok).into_iter().chain(candidates)) {
            primal = Some(c);
        }
        let ub = primal.as_ref().map_or(f64::INFINITY, |p| p.energy);

        let g = supergradient(
            inst,
            eval.index(),
            &duals,
            &at.tree_labels,
            &at.coupling.labelings,
        );
        let norm2 = g.squared_norm();
        let record = |step: f64| IterationRecord {
            iter: k,
            bound,
            best_bound,
            step,
            upper_bound: ub,
        };

        let stop = if norm2 == 0.0 {
            Some(StopReason::Consensus)
        } else if ub - best_bound <= config.tol * best_bound.abs().max(1.0) {
            Some(StopReason::GapClosed)
        } else if k >= config.stall_window
            && history[k] - history[k - config.stall_window] < config.stall_eps
        {
            Some(StopReason::Stalled)
        } else if iterations >= config.max_iters {
            Some(StopReason::MaxIters)
        } else {
            None
        };
        if let Some(reason) = stop {
            trace.push(record(0.0));
            break reason;
        }

        let fallback = |initial: f64| initial / ((k + 1) as f64).sqrt();
        let step = match config.step {
            StepRule::Polyak {
                patience,
                fallback: f0,
                ..
            } => {
                if since_improved >= patience.max(1) {
                    alpha *= 0.5;
                    since_improved = 0;
                }
                if ub < f64::INFINITY && ub > bound {
                    alpha * (ub - bound) / norm2
                } else {
                    fallback(f0)
                }
            }
            StepRule::Diminishing { initial } => fallback(initial),
        };
        trace.push(record(step));
        duals.add_scaled(step, &g);
        iterations += 1;
    };

    let (lower_bound, duals, at) = best.expect("at least one evaluation");
    Ok(DualReport {
        lower_bound,
        duals,
        tree_labelings: at.tree_labels,
        chain_labelings: at.coupling.labelings,
        bottleneck: at.coupling.bottleneck,
        trace,
        iterations,
        stop,
        primal,
    })
}
