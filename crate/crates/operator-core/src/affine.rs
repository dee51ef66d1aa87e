//! Affine operators `x -> Bx + r` with exact resolvents via dense LU.

use crate::{check_finite_mat, check_finite_vec, check_gamma, Matrix, OperatorError, Vector};

/// The operator `x -> Bx + r`. Monotone iff the symmetric part of `B` is
/// positive semidefinite; `mu`-strongly monotone iff its smallest eigenvalue
/// is at least `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOperator {
    b: Matrix,
    r: Vector,
}

impl AffineOperator {
    pub fn new(b: Matrix, r: Vector) -> Result<Self, OperatorError> {
        if !b.is_square() {
            return Err(OperatorError::InvalidEnsemble(format!(
                "linear part must be square, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if b.nrows() != r.len() {
            return Err(OperatorError::DimensionMismatch {
                expected: b.nrows(),
                got: r.len(),
            });
        }
        check_finite_mat(&b, "affine linear part")?;
        check_finite_vec(&r, "affine offset")?;
        Ok(Self { b, r })
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn linear_part(&self) -> &Matrix {
        &self.b
    }

    pub fn offset(&self) -> &Vector {
        &self.r
    }

    pub fn evaluate(&self, x: &Vector) -> Result<Vector, OperatorError> {
        self.check_dim(x)?;
        Ok(&self.b * x + &self.r)
    }

    /// Unique `x` with `v = x + gamma*(Bx + r)`, by dense LU with partial
    /// pivoting.
    pub fn resolvent(&self, gamma: f64, v: &Vector) -> Result<Vector, OperatorError> {
        check_gamma(gamma)?;
        self.check_dim(v)?;
        let lu = self.resolvent_lu(gamma)?;
        let rhs = v - gamma * &self.r;
        lu.solve(&rhs)
            .ok_or(OperatorError::SingularSystem { gamma })
    }

    /// Factorization of `I + gamma*B`, reusable across resolvent calls at the
    /// same stepsize.
    pub fn resolvent_lu(
        &self,
        gamma: f64,
    ) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, OperatorError> {
        check_gamma(gamma)?;
        let d = self.dim();
        let m = Matrix::identity(d, d) + gamma * &self.b;
        let lu = m.lu();
        if lu.determinant().abs() == 0.0 {
            return Err(OperatorError::SingularSystem { gamma });
        }
        Ok(lu)
    }

    /// Largest valid modulus in the strong monotonicity inequality: the
    /// smallest eigenvalue of `(B + B^T)/2`. May be nonpositive.
    pub fn strong_monotonicity_modulus(&self) -> f64 {
        let sym = (&self.b + self.b.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::new(sym);
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest singular value of `B`.
    pub fn lipschitz_constant(&self) -> f64 {
        let sv = self.b.clone().singular_values();
        sv.iter().copied().fold(0.0, f64::max)
    }

    fn check_dim(&self, x: &Vector) -> Result<(), OperatorError> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(OperatorError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn evaluate_identity_linear_part() {
        let op = AffineOperator::new(dmatrix![1.0], dvector![0.0]).unwrap();
        assert_eq!(op.evaluate(&dvector![3.0]).unwrap(), dvector![3.0]);
    }

    #[test]
    fn resolvent_skew_hand_solve() {
        // (I + B) x = v with B = [[0,1],[-1,0]] gives [[1,1],[-1,1]] x = (1,1),
        // whose solution is (0,1).
        let op =
            AffineOperator::new(dmatrix![0.0, 1.0; -1.0, 0.0], dvector![0.0, 0.0]).unwrap();
        let x = op.resolvent(1.0, &dvector![1.0, 1.0]).unwrap();
        assert!((x - dvector![0.0, 1.0]).norm() < 1e-14);
    }

    #[test]
    fn modulus_scalar_and_skew() {
        let scalar = AffineOperator::new(dmatrix![2.0], dvector![0.0]).unwrap();
        assert_eq!(scalar.strong_monotonicity_modulus(), 2.0);
        let skew =
            AffineOperator::new(dmatrix![0.0, 1.0; -1.0, 0.0], dvector![0.0, 0.0]).unwrap();
        assert!(skew.strong_monotonicity_modulus().abs() < 1e-14);
    }

    #[test]
    fn lipschitz_diagonal() {
        let op = AffineOperator::new(
            Matrix::from_diagonal(&dvector![1.0, 10.0, 100.0]),
            dvector![0.0, 0.0, 0.0],
        )
        .unwrap();
        assert!((op.lipschitz_constant() - 100.0).abs() < 1e-10);
        let scalar = AffineOperator::new(dmatrix![3.0], dvector![0.0]).unwrap();
        assert!((scalar.lipschitz_constant() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(AffineOperator::new(Matrix::zeros(2, 3), Vector::zeros(2)).is_err());
        assert!(AffineOperator::new(dmatrix![f64::NAN], dvector![0.0]).is_err());
    }
}
