//! The family `x -> mu*(x - center) + offset`, whose resolvent is available
//! in closed form. With offsets averaging to zero over an ensemble, `center`
//! is the ensemble root and the stochastic proximal iteration attains its
//! worst-case bound with equality.

use crate::{check_finite_vec, check_gamma, OperatorError, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedScalingOperator {
    mu: f64,
    center: Vector,
    offset: Vector,
}

impl ShiftedScalingOperator {
    pub fn new(mu: f64, center: Vector, offset: Vector) -> Result<Self, OperatorError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(OperatorError::NotMonotone(format!(
                "shifted scaling requires mu > 0, got {mu}"
            )));
        }
        if center.len() != offset.len() {
            return Err(OperatorError::DimensionMismatch {
                expected: center.len(),
                got: offset.len(),
            });
        }
        check_finite_vec(&center, "shifted-scaling center")?;
        check_finite_vec(&offset, "shifted-scaling offset")?;
        Ok(Self { mu, center, offset })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn evaluate(&self, x: &Vector) -> Result<Vector, OperatorError> {
        self.check_dim(x)?;
        Ok(self.mu * (x - &self.center) + &self.offset)
    }

    /// Closed form: `x = (v + gamma*mu*center - gamma*offset) / (1 + gamma*mu)`.
    pub fn resolvent(&self, gamma: f64, v: &Vector) -> Result<Vector, OperatorError> {
        check_gamma(gamma)?;
        self.check_dim(v)?;
        Ok((v + gamma * self.mu * &self.center - gamma * &self.offset) / (1.0 + gamma * self.mu))
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
