//! Finite operator families with sampling weights: mean element, exact root,
//! common moduli, and prefactorized resolvents for repeated stepping.

use crate::{check_gamma, Matrix, Operator, OperatorError, Vector};

const WEIGHT_SUM_TOL: f64 = 1e-12;
const ROOT_RESIDUAL_TOL: f64 = 1e-10;

/// The family `{A_i}` with sampling weights on the probability simplex and an
/// optional known root of the mean operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorEnsemble {
    members: Vec<Operator>,
    weights: Vec<f64>,
    root: Option<Vector>,
}

impl OperatorEnsemble {
    /// Uniform weights `1/n`.
    pub fn new(members: Vec<Operator>) -> Result<Self, OperatorError> {
        let n = members.len();
        Self::with_weights(members, vec![1.0 / n as f64; n])
    }

    pub fn with_weights(members: Vec<Operator>, weights: Vec<f64>) -> Result<Self, OperatorError> {
        if members.is_empty() {
            return Err(OperatorError::InvalidEnsemble("no members".into()));
        }
        if members.len() != weights.len() {
            return Err(OperatorError::InvalidEnsemble(format!(
                "{} members but {} weights",
                members.len(),
                weights.len()
            )));
        }
        let d = members[0].dim();
        if members.iter().any(|m| m.dim() != d) {
            return Err(OperatorError::InvalidEnsemble(
                "members have mixed dimensions".into(),
            ));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(OperatorError::InvalidEnsemble(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(OperatorError::InvalidEnsemble(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            members,
            weights,
            root: None,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn members(&self) -> &[Operator] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &Operator {
        &self.members[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        let w0 = 1.0 / self.len() as f64;
        self.weights.iter().all(|&w| (w - w0).abs() <= WEIGHT_SUM_TOL)
    }

    /// Root stored by a problem builder, if any.
    pub fn stored_root(&self) -> Option<&Vector> {
        self.root.as_ref()
    }

    pub fn set_root(&mut self, root: Vector) {
        self.root = Some(root);
    }

    /// Weighted average of the canonical member selections at `x`.
    pub fn mean_element(&self, x: &Vector) -> Result<Vector, OperatorError> {
        let mut acc = Vector::zeros(self.dim());
        for (op, &w) in self.members.iter().zip(&self.weights) {
            acc += w * op.evaluate_element(x)?;
        }
        Ok(acc)
    }

    /// `(B_bar, r_bar)` of the weighted mean operator, when all members are
    /// affine.
    pub fn mean_linear_form(&self) -> Option<(Matrix, Vector)> {
        let d = self.dim();
        let mut b_bar = Matrix::zeros(d, d);
        let mut r_bar = Vector::zeros(d);
        for (op, &w) in self.members.iter().zip(&self.weights) {
            let (b, r) = op.linear_form()?;
            b_bar += w * b;
            r_bar += w * r;
        }
        Some((b_bar, r_bar))
    }

    /// Canonical member elements at the root: `a_i* = A_i(x_star)`.
    pub fn star_elements(&self, x_star: &Vector) -> Result<Vec<Vector>, OperatorError> {
        self.members
            .iter()
            .map(|op| op.evaluate_element(x_star))
            .collect()
    }

    /// Solves `B_bar x = -r_bar` for an all-affine ensemble and verifies the
    /// residual against `1e-10 * (1 + ||r_bar||)`.
    pub fn compute_root(&self) -> Result<Vector, OperatorError> {
        let (b_bar, r_bar) = self.mean_linear_form().ok_or_else(|| {
            OperatorError::InvalidEnsemble(
                "root computation requires an all-affine ensemble".into(),
            )
        })?;
        let lu = b_bar.clone().lu();
        let x = lu.solve(&(-&r_bar)).ok_or(OperatorError::SingularMean)?;
        let residual = (&b_bar * &x + &r_bar).norm();
        let tolerance = ROOT_RESIDUAL_TOL * (1.0 + r_bar.norm());
        if residual > tolerance {
            return Err(OperatorError::RootResidual {
                residual,
                tolerance,
            });
        }
        Ok(x)
    }

    /// Stored root if present, otherwise computed.
    pub fn root_or_compute(&self) -> Result<Vector, OperatorError> {
        match &self.root {
            Some(r) => Ok(r.clone()),
            None => self.compute_root(),
        }
    }

    /// Largest modulus valid for every member simultaneously.
    pub fn modulus(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.strong_monotonicity_modulus())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest member Lipschitz constant; `None` if some member has none.
    pub fn lipschitz_constant(&self) -> Option<f64> {
        self.members
            .iter()
            .map(|m| m.lipschitz_constant())
            .try_fold(0.0_f64, |acc, l| l.map(|l| acc.max(l)))
    }
}

/// Prefactorized resolvents for one ensemble at one fixed stepsize: affine
/// members get their `I + gamma*B` LU computed once; closed-form kinds
/// dispatch directly. Immutable after construction, so concurrent calls are
/// safe and bitwise reproducible.
pub struct ResolventOracle<'a> {
    ensemble: &'a OperatorEnsemble,
    gamma: f64,
    factors: Vec<Factor>,
}

enum Factor {
    /// LU of `I + gamma*B` plus the precomputed shift `gamma*r`.
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, Vector),
    /// Kinds with closed-form resolvents.
    Direct,
}

impl<'a> ResolventOracle<'a> {
    pub fn new(ensemble: &'a OperatorEnsemble, gamma: f64) -> Result<Self, OperatorError> {
        check_gamma(gamma)?;
        let factors = ensemble
            .members()
            .iter()
            .map(|op| match op {
                Operator::Affine(a) => {
                    Ok(Factor::Lu(a.resolvent_lu(gamma)?, gamma * a.offset()))
                }
                _ => Ok(Factor::Direct),
            })
            .collect::<Result<Vec<_>, OperatorError>>()?;
        Ok(Self {
            ensemble,
            gamma,
            factors,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn ensemble(&self) -> &OperatorEnsemble {
        self.ensemble
    }

    /// Resolvent of member `i` at `v`.
    pub fn apply(&self, i: usize, v: &Vector) -> Result<Vector, OperatorError> {
        match &self.factors[i] {
            Factor::Lu(lu, gamma_r) => lu
                .solve(&(v - gamma_r))
                .ok_or(OperatorError::SingularSystem { gamma: self.gamma }),
            Factor::Direct => self.ensemble.member(i).resolvent(self.gamma, v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::AffineOperator;
    use nalgebra::{dmatrix, dvector};

    fn affine(b: Matrix, r: Vector) -> Operator {
        Operator::Affine(AffineOperator::new(b, r).unwrap())
    }

    #[test]
    fn root_scalar_family() {
        let ens = OperatorEnsemble::new(vec![
            affine(dmatrix![1.0], dvector![-4.0]),
            affine(dmatrix![1.0], dvector![-6.0]),
        ])
        .unwrap();
        assert_eq!(ens.compute_root().unwrap(), dvector![5.0]);
    }

    #[test]
    fn root_skew_plus_identity() {
        // Mean is B = [[1,1],[-1,1]], r = (1,0); the solve of Bx = -r gives
        // x = (-0.5, -0.5).
        let ens = OperatorEnsemble::new(vec![affine(
            dmatrix![1.0, 1.0; -1.0, 1.0],
            dvector![1.0, 0.0],
        )])
        .unwrap();
        let x = ens.compute_root().unwrap();
        assert!((x - dvector![-0.5, -0.5]).norm() < 1e-14);
    }

    #[test]
    fn oracle_matches_member_resolvent() {
        let ens = OperatorEnsemble::new(vec![
            affine(dmatrix![2.0, 1.0; -1.0, 3.0], dvector![0.5, -0.5]),
            affine(dmatrix![1.0, 0.0; 0.0, 1.0], dvector![1.0, 1.0]),
        ])
        .unwrap();
        let oracle = ResolventOracle::new(&ens, 0.3).unwrap();
        let v = dvector![0.7, -1.1];
        for i in 0..2 {
            let direct = ens.member(i).resolvent(0.3, &v).unwrap();
            let cached = oracle.apply(i, &v).unwrap();
            assert_eq!(direct, cached);
        }
    }

    #[test]
    fn rejects_bad_weights() {
        let m = vec![affine(dmatrix![1.0], dvector![0.0])];
        assert!(OperatorEnsemble::with_weights(m.clone(), vec![0.5]).is_err());
        assert!(OperatorEnsemble::with_weights(m, vec![-1.0, 2.0]).is_err());
    }
}
