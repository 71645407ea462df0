use thiserror::Error;

/// Errors raised by the numeric and geometric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial degree {0} exceeds the supported maximum of 6")]
    DegreeTooHigh(usize),
    #[error("moment index {0} out of range 0..=6")]
    MomentIndex(usize),
    #[error("invalid interval [{0}, {1}]")]
    Interval(f64, f64),
    #[error("no unique rate root: {0}")]
    NoUniqueRoot(String),
    #[error("degenerate polytope: {0}")]
    Degenerate(String),
    #[error("invalid labels: {0}")]
    InvalidLabels(String),
    #[error("classification mismatch: {0}")]
    ClassMismatch(String),
    #[error("invalid canonical parameters: {0}")]
    InvalidParameters(String),
    #[error("operation requires a quadrilateral, got {0} vertices")]
    NotQuadrilateral(usize),
    #[error("no solution for the Calabi ansatz: {0}")]
    NoSolutionForAnsatz(String),
    #[error("no sign change: {0}")]
    NoSignChange(String),
    #[error("parameters are not monotone")]
    NotMonotone,
    #[error("rank-deficient system: {0}")]
    RankDeficient(String),
    #[error("point {0:?} is outside the evaluation domain")]
    OutOfDomain([f64; 2]),
    #[error("invalid Reeb vector: {0}")]
    InvalidReeb(String),
}

pub type Result<T> = std::result::Result<T, Error>;
