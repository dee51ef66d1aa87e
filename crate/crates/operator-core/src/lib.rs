//! Representations of (set-valued) maximally monotone operators with exact
//! resolvent evaluation, plus ensemble-level quantities: mean element, exact
//! root, monotonicity/Lipschitz moduli, and a plain-text interchange format.

mod affine;
mod ensemble;
mod error;
mod operator;
mod piecewise;
mod shifted;
mod text;

pub use affine::AffineOperator;
pub use ensemble::{OperatorEnsemble, ResolventOracle};
pub use error::OperatorError;
pub use operator::Operator;
pub use piecewise::{PiecewiseScalarOperator, Segment};
pub use shifted::ShiftedScalingOperator;

/// Point in the ambient space `R^d`.
pub type Vector = nalgebra::DVector<f64>;
/// Dense `d x d` matrix.
pub type Matrix = nalgebra::DMatrix<f64>;

pub(crate) fn check_finite_vec(v: &Vector, what: &'static str) -> Result<(), OperatorError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(OperatorError::NonFinite(what))
    }
}

pub(crate) fn check_finite_mat(m: &Matrix, what: &'static str) -> Result<(), OperatorError> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(OperatorError::NonFinite(what))
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<(), OperatorError> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(OperatorError::InvalidGamma(gamma))
    }
}
