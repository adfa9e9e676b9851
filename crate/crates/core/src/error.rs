use thiserror::Error;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("s = {s} lies outside the tabulated range [0, {max}]")]
    Extrapolation { s: f64, max: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("no ground state bracket found: {0}")]
    BracketNotFound(String),

    /// The input does not satisfy the structural hypotheses the analysis
    /// relies on (positivity, monotone decay, fast enough decay).
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("grid mismatch: expected {expected} samples, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("ill-conditioned mode fit (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
