//! Closed enumeration over the supported operator kinds.

use crate::{
    AffineOperator, Matrix, OperatorError, PiecewiseScalarOperator, ShiftedScalingOperator, Vector,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Affine(AffineOperator),
    PiecewiseScalar(PiecewiseScalarOperator),
    ShiftedScaling(ShiftedScalingOperator),
}

impl Operator {
    pub fn dim(&self) -> usize {
        match self {
            Operator::Affine(op) => op.dim(),
            Operator::PiecewiseScalar(_) => 1,
            Operator::ShiftedScaling(op) => op.dim(),
        }
    }

    /// Canonical single-valued selection from `A(x)`: exact value wherever
    /// the operator is single-valued, jump-interval midpoint at a scalar
    /// breakpoint.
    pub fn evaluate_element(&self, x: &Vector) -> Result<Vector, OperatorError> {
        match self {
            Operator::Affine(op) => op.evaluate(x),
            Operator::PiecewiseScalar(op) => {
                let s = scalar(x)?;
                Ok(Vector::from_element(1, op.evaluate(s)))
            }
            Operator::ShiftedScaling(op) => op.evaluate(x),
        }
    }

    /// The unique `x` with `v` in `x + gamma*A(x)`.
    pub fn resolvent(&self, gamma: f64, v: &Vector) -> Result<Vector, OperatorError> {
        let out = match self {
            Operator::Affine(op) => op.resolvent(gamma, v)?,
            Operator::PiecewiseScalar(op) => {
                crate::check_gamma(gamma)?;
                Vector::from_element(1, op.resolvent(gamma, scalar(v)?))
            }
            Operator::ShiftedScaling(op) => op.resolvent(gamma, v)?,
        };
        crate::check_finite_vec(&out, "resolvent output")?;
        Ok(out)
    }

    /// Largest valid strong-monotonicity modulus (0 or negative means the
    /// operator is at best merely monotone).
    pub fn strong_monotonicity_modulus(&self) -> f64 {
        match self {
            Operator::Affine(op) => op.strong_monotonicity_modulus(),
            Operator::PiecewiseScalar(op) => op
                .segments()
                .iter()
                .map(|s| s.slope)
                .fold(f64::INFINITY, f64::min),
            Operator::ShiftedScaling(op) => op.mu(),
        }
    }

    /// Lipschitz constant where one exists; `None` for a scalar operator
    /// with genuine jumps (set-valued, not Lipschitz).
    pub fn lipschitz_constant(&self) -> Option<f64> {
        match self {
            Operator::Affine(op) => Some(op.lipschitz_constant()),
            Operator::PiecewiseScalar(op) => {
                let has_jump = op.breakpoints().iter().enumerate().any(|(j, &t)| {
                    op.segments()[j].eval(t) < op.segments()[j + 1].eval(t)
                });
                if has_jump {
                    None
                } else {
                    Some(op.segments().iter().map(|s| s.slope).fold(0.0, f64::max))
                }
            }
            Operator::ShiftedScaling(op) => Some(op.mu()),
        }
    }

    /// `(B, r)` with `A(x) = Bx + r` when the operator is globally affine.
    pub fn linear_form(&self) -> Option<(Matrix, Vector)> {
        match self {
            Operator::Affine(op) => Some((op.linear_part().clone(), op.offset().clone())),
            Operator::ShiftedScaling(op) => {
                let d = op.dim();
                Some((
                    Matrix::identity(d, d) * op.mu(),
                    op.offset() - op.mu() * op.center(),
                ))
            }
            Operator::PiecewiseScalar(_) => None,
        }
    }
}

impl From<AffineOperator> for Operator {
    fn from(op: AffineOperator) -> Self {
        Operator::Affine(op)
    }
}

impl From<PiecewiseScalarOperator> for Operator {
    fn from(op: PiecewiseScalarOperator) -> Self {
        Operator::PiecewiseScalar(op)
    }
}

impl From<ShiftedScalingOperator> for Operator {
    fn from(op: ShiftedScalingOperator) -> Self {
        Operator::ShiftedScaling(op)
    }
}

fn scalar(x: &Vector) -> Result<f64, OperatorError> {
    if x.len() == 1 {
        Ok(x[0])
    } else {
        Err(OperatorError::DimensionMismatch {
            expected: 1,
            got: x.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn shifted_scaling_linear_form_matches_evaluation() {
        let op = ShiftedScalingOperator::new(2.0, dvector![1.0, -1.0], dvector![0.5, 0.0]).unwrap();
        let wrapped = Operator::ShiftedScaling(op.clone());
        let (b, r) = wrapped.linear_form().unwrap();
        let x = dvector![0.3, 0.7];
        let via_form = &b * &x + &r;
        assert!((via_form - op.evaluate(&x).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn affine_roundtrip_through_enum() {
        let op: Operator = AffineOperator::new(dmatrix![2.0], dvector![1.0]).unwrap().into();
        assert_eq!(op.evaluate_element(&dvector![3.0]).unwrap(), dvector![7.0]);
        assert_eq!(op.strong_monotonicity_modulus(), 2.0);
        assert_eq!(op.lipschitz_constant(), Some(2.0));
    }
}
