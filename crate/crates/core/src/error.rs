use thiserror::Error;

/// Errors produced by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel support under-resolved: {interior} fine grid points inside radius {epsilon} (need at least {required})")]
    UnderResolved {
        epsilon: f64,
        interior: usize,
        required: usize,
    },

    #[error("no root in bracket [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("exp(z*g) would overflow: |Re z| * max|g| = {0}")]
    Overflow(f64),

    #[error("operator order {n} exceeds the memory guard (max {max})")]
    MemoryGuard { n: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("linear system is numerically singular (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("malformed dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
