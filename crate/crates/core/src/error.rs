use thiserror::Error;

/// Errors produced across the kernel, generators, solvers and harness.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("A is rank deficient: Cholesky pivot {pivot:e} below tolerance {tolerance:e}")]
    RankDeficient { pivot: f64, tolerance: f64 },

    #[error("measurement vector b is zero")]
    ZeroMeasurement,

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("cannot place {s} indices with separation {gap} in length {n}")]
    InfeasibleSeparation { n: usize, s: usize, gap: usize },

    #[error("subproblem is unbounded below")]
    Unbounded,

    #[error("inner ADMM did not converge in {iterations} iterations (residual {residual:e})")]
    InnerFailure { iterations: usize, residual: f64 },

    #[error("null-space oracle supports n - m <= 2, got {0}")]
    DimensionTooLarge(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed instance file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
