//! MAP inference for discrete Markov random fields with a bottleneck
//! potential: minimize `theta(x) + zeta(b)` subject to every bottleneck value
//! `phi_f(x_f)` taken by the labeling being at most `b`.
//!
//! * [`exact`] solves edge-free graphs and chains exactly.
//! * [`decomp`] bounds general graphs through a Lagrangian decomposition into
//!   tree MRFs and coupled bottleneck chains.
//! * [`rounding`] recovers labelings from the dual.
//! * [`oracle`] holds exhaustive search, a greedy baseline and generators.

pub mod decomp;
pub mod error;
pub mod exact;
pub mod format;
pub mod model;
pub mod oracle;
pub mod par;
pub mod rounding;

pub use error::SolveError;
pub use format::{load_instance, save_instance, FormatError};
pub use model::{
    BottleneckCost, BottleneckInstance, BottleneckValueSet, FactorCosts, Graph, Labeling,
    ModelError, ZetaEnvelope,
};
pub use par::Execution;
