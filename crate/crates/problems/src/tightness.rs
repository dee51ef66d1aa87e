//! The family for which the uncorrected method's bound is an equality:
//! members `A_i(x) = mu*(x - x_star) + a_i_star` with offsets averaging to
//! zero, so `x_star` is the root and the offsets are exactly the member
//! elements there.

use crate::ProblemError;
use operator_core::{Operator, OperatorEnsemble, ShiftedScalingOperator, Vector};

const OFFSET_MEAN_TOL: f64 = 1e-12;

pub fn build_tightness_instance(
    mu: f64,
    x_star: Vector,
    offsets: &[Vector],
) -> Result<OperatorEnsemble, ProblemError> {
    if offsets.is_empty() {
        return Err(ProblemError::InvalidSpec("no offsets".into()));
    }
    let d = x_star.len();
    if offsets.iter().any(|o| o.len() != d) {
        return Err(ProblemError::InvalidSpec(
            "offset dimensions must match the root".into(),
        ));
    }
    let mut mean = Vector::zeros(d);
    for o in offsets {
        mean += o;
    }
    mean /= offsets.len() as f64;
    let scale = 1.0 + offsets.iter().map(|o| o.norm()).fold(0.0, f64::max);
    if mean.norm() > OFFSET_MEAN_TOL * scale {
        return Err(ProblemError::InvalidSpec(format!(
            "offsets must average to zero, mean norm is {:.3e}",
            mean.norm()
        )));
    }
    let members = offsets
        .iter()
        .map(|o| {
            ShiftedScalingOperator::new(mu, x_star.clone(), o.clone()).map(Operator::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut ens = OperatorEnsemble::new(members)?;
    ens.set_root(x_star);
    Ok(ens)
}

/// The two-offset scalar case `{+1, -1}` around the given root.
pub fn tightness_pair(mu: f64, x_star: f64) -> OperatorEnsemble {
    build_tightness_instance(
        mu,
        Vector::from_element(1, x_star),
        &[Vector::from_element(1, 1.0), Vector::from_element(1, -1.0)],
    )
    .expect("offsets +1/-1 average to zero")
}
