//! Seeded instance generators.
//!
//! Randomness comes from ChaCha8 seeded with the 64-bit seed
//! (`ChaCha8Rng::seed_from_u64`), which produces the same stream on every
//! platform. Potentials are uniform on `[0, 1)`; 5% of pairwise linear costs
//! are set to infinity, except on a planted labeling that keeps every random
//! instance feasible.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SolveError;
use crate::model::{BottleneckCost, BottleneckInstance, FactorCosts, Graph};

pub const FORBIDDEN_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceKind {
    /// Three-node binary chain on which the local polytope relaxation with a
    /// bottleneck term is not tight.
    Counterexample {
        a: f64,
        eps: f64,
    },
    RandomChain {
        n: usize,
        k: usize,
    },
    RandomGrid {
        rows: usize,
        cols: usize,
        k: usize,
    },
    RandomTree {
        n: usize,
        k: usize,
    },
    /// Edge-free instance.
    RandomUnary {
        n: usize,
        k: usize,
    },
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InstanceKind::Counterexample { a, eps } => write!(f, "counterexample({a},{eps})"),
            InstanceKind::RandomChain { n, k } => write!(f, "random_chain({n},{k})"),
            InstanceKind::RandomGrid { rows, cols, k } => {
                write!(f, "random_grid({rows},{cols},{k})")
            }
            InstanceKind::RandomTree { n, k } => write!(f, "random_tree({n},{k})"),
            InstanceKind::RandomUnary { n, k } => write!(f, "random_unary({n},{k})"),
        }
    }
}

impl FromStr for InstanceKind {
    type Err = SolveError;

    /// Parses `name(arg, ...)`, e.g. `random_grid(3,3,3)` or `counterexample(1,0.5)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SolveError::InvalidParameter(format!("cannot parse instance kind `{s}`"));
        let s = s.trim();
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args_src = rest.strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<&str> = args_src
            .split(',')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .collect();
        let ints = |want: usize| -> Result<Vec<usize>, SolveError> {
            if args.len() != want {
                return Err(bad());
            }
            args.iter().map(|a| a.parse().map_err(|_| bad())).collect()
        };
        match name.trim() {
            "counterexample" => {
                if args.len() != 2 {
                    return Err(bad());
                }
                let a = args[0].parse().map_err(|_| bad())?;
                let eps = args[1].parse().map_err(|_| bad())?;
                Ok(InstanceKind::Counterexample { a, eps })
            }
            "random_chain" => ints(2).map(|v| InstanceKind::RandomChain { n: v[0], k: v[1] }),
            "random_grid" => ints(3).map(|v| InstanceKind::RandomGrid {
                rows: v[0],
                cols: v[1],
                k: v[2],
            }),
            "random_tree" => ints(2).map(|v| InstanceKind::RandomTree { n: v[0], k: v[1] }),
            "random_unary" => ints(2).map(|v| InstanceKind::RandomUnary { n: v[0], k: v[1] }),
            _ => Err(bad()),
        }
    }
}

pub fn generate(kind: InstanceKind, seed: u64) -> Result<BottleneckInstance, SolveError> {
    match kind {
        InstanceKind::Counterexample { a, eps } => counterexample(a, eps),
        InstanceKind::RandomChain { n, k } => {
            check_sizes(n, k)?;
            random_instance(Graph::path(n)?, k, seed)
        }
        InstanceKind::RandomGrid { rows, cols, k } => {
            check_sizes(rows * cols, k)?;
            random_instance(Graph::grid(rows, cols)?, k, seed)
        }
        InstanceKind::RandomTree { n, k } => {
            check_sizes(n, k)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7265_6573);
            let edges: Vec<_> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
            random_instance(Graph::new(n, &edges)?, k, seed)
        }
        InstanceKind::RandomUnary { n, k } => {
            check_sizes(n, k)?;
            random_instance(Graph::new(n, &[])?, k, seed)
        }
    }
}

fn check_sizes(n: usize, k: usize) -> Result<(), SolveError> {
    if n == 0 || k == 0 {
        return Err(SolveError::InvalidParameter(
            "node and label counts must be positive".into(),
        ));
    }
    Ok(())
}

/// The 3-node binary chain `u - v - w`: only diagonal pairs are allowed, the
/// diagonal bottleneck values are `(a, a + eps)` on `uv` and `(a + eps, a)` on
/// `vw`, and `zeta(b) = b`. Both feasible labelings cost `a + eps`.
pub fn counterexample(a: f64, eps: f64) -> Result<BottleneckInstance, SolveError> {
    if !a.is_finite() || !eps.is_finite() || eps <= 0.0 {
        return Err(SolveError::InvalidParameter(format!(
            "counterexample needs finite a and eps > 0, got a={a}, eps={eps}"
        )));
    }
    let inf = f64::INFINITY;
    let graph = Graph::path(3)?;
    let theta = FactorCosts {
        unary: vec![vec![0.0; 2]; 3],
        pairwise: vec![vec![0.0, inf, inf, 0.0]; 2],
    };
    let phi = FactorCosts {
        unary: vec![vec![0.0; 2]; 3],
        pairwise: vec![vec![a, 0.0, 0.0, a + eps], vec![a + eps, 0.0, 0.0, a]],
    };
    Ok(BottleneckInstance::new(
        graph,
        vec![2; 3],
        theta,
        phi,
        BottleneckCost::Linear(1.0),
    )?)
}

fn random_instance(graph: Graph, k: usize, seed: u64) -> Result<BottleneckInstance, SolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.node_count();
    let planted: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    let counts = vec![k; n];
    let mut theta = FactorCosts::zeros(&graph, &counts);
    let mut phi = FactorCosts::zeros(&graph, &counts);
    for u in theta.unary.iter_mut().chain(phi.unary.iter_mut()) {
        u.iter_mut().for_each(|v| *v = rng.gen());
    }
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        for xi in 0..k {
            for xj in 0..k {
                let idx = xi * k + xj;
                theta.pairwise[e][idx] = rng.gen();
                phi.pairwise[e][idx] = rng.gen();
                let forbid = rng.gen_bool(FORBIDDEN_FRACTION);
                if forbid && (xi, xj) != (planted[i], planted[j]) {
                    theta.pairwise[e][idx] = f64::INFINITY;
                }
            }
        }
    }
    Ok(BottleneckInstance::new(
        graph,
        counts,
        theta,
        phi,
        BottleneckCost::Linear(1.0),
    )?)
}
