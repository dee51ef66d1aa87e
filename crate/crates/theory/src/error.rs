use algorithms::AlgorithmError;
use operator_core::OperatorError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The supposed solution is not one: the canonical selections at that
    /// point do not average to zero.
    #[error("not a root: mean of star selections has norm {residual:e} (tolerance {tolerance:e})")]
    NotARoot { residual: f64, tolerance: f64 },

    /// The spectral similarity estimate is defined for globally affine
    /// members only.
    #[error("member {member} is not globally affine")]
    NotAffine { member: usize },

    /// A set-valued member would have to be evaluated exactly at a jump,
    /// where no canonical single element exists. Reported rather than
    /// silently resolved with the midpoint.
    #[error("member {member} is set-valued at an enumeration point; selection is ambiguous")]
    AmbiguousSelection { member: usize },

    /// The state handed in does not belong to the named algorithm.
    #[error("state does not match algorithm {algorithm}")]
    StateMismatch { algorithm: &'static str },

    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),

    #[error(transparent)]
    Operator(#[from] OperatorError),
}
