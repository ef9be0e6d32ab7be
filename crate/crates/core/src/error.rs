use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("instance is infeasible: {0}")]
    Infeasible(String),
    #[error("no labeling satisfies bottleneck threshold {0}")]
    InfeasibleThreshold(f64),
    #[error("solver requires an edge-free graph, found {0} edges")]
    HasEdges(usize),
    #[error("solver requires a path graph 0-1-...-(n-1)")]
    NotAChain,
    #[error("graph is not a {rows}x{cols} grid")]
    NotAGrid { rows: usize, cols: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("bottleneck profile is empty")]
    EmptyProfile,
    #[error("rounding failed at node {0}: every label has infinite conditional cost")]
    RoundingFailed(usize),
    #[error("enumeration of {0} labelings exceeds the cap of {1}")]
    TooLarge(u128, u128),
    #[error("node {0} cannot be reached from the seeded region")]
    Unreachable(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
