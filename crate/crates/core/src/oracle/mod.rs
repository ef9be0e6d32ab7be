//! Ground truth and baselines: exhaustive search, greedy tracking, and
//! instance generators.

mod brute;
mod generate;
mod greedy;

pub use brute::{brute_force, brute_force_with, BruteForceResult, DEFAULT_CAP};
pub use generate::{counterexample, generate, InstanceKind, FORBIDDEN_FRACTION};
pub use greedy::{default_seeds, greedy_track};
