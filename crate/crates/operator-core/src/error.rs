//! Error type shared across the operator toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("stepsize gamma must be positive and finite (got {0})")]
    InvalidGamma(f64),

    #[error("resolvent system I + gamma*B is numerically singular (gamma = {gamma})")]
    SingularSystem { gamma: f64 },

    #[error("operator graph is not maximally monotone: {0}")]
    NotMonotone(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("mean linear part is singular; no unique root")]
    SingularMean,

    #[error("root residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    RootResidual { residual: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}
