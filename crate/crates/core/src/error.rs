use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid system shape: n = {n}, n_A = {n_a} (need 1 <= n_A <= n/2)")]
    Shape { n: usize, n_a: usize },

    #[error("invariant violated: {what} (residual {residual:.3e}, tolerance {tolerance:.1e})")]
    InvariantViolation {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("energy constraint violated: cosh(2r) = {cosh_2r} exceeds 2N + 1 = {limit}")]
    ConstraintViolation { cosh_2r: f64, limit: f64 },

    #[error("objective evaluation failed: {0}")]
    Evaluation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
