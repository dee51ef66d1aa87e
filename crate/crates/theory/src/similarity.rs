//! Similarity constants: how far the ensemble members deviate from their
//! mean, relative to distance from the solution. The spectral estimate is a
//! certified upper bound for affine ensembles; the empirical probe is a
//! lower bound valid for any ensemble.

use crate::TheoryError;
use operator_core::{Matrix, OperatorEnsemble, Vector};

/// Mean of the canonical selections at a claimed root must vanish to this
/// norm before any star-based constant is trusted.
pub const ROOT_MEAN_TOL: f64 = 1e-8;

/// Canonical member selections at the root, validated to average to zero.
fn star_selections(
    ens: &OperatorEnsemble,
    x_star: &Vector,
) -> Result<Vec<Vector>, TheoryError> {
    let stars = ens.star_elements(x_star)?;
    let mut mean = Vector::zeros(ens.dim());
    for (w, a) in ens.weights().iter().zip(&stars) {
        mean += a * *w;
    }
    let residual = mean.norm();
    if residual > ROOT_MEAN_TOL {
        return Err(TheoryError::NotARoot {
            residual,
            tolerance: ROOT_MEAN_TOL,
        });
    }
    Ok(stars)
}

/// Weighted mean squared norm of the member elements at the solution,
/// `sum_i w_i * ||a_i(x_star)||^2` — the stationary noise level of the
/// uncorrected method. Uses the canonical (midpoint) selection for
/// set-valued members; errors if the selections do not average to zero.
pub fn sigma_star_sq(ens: &OperatorEnsemble, x_star: &Vector) -> Result<f64, TheoryError> {
    let stars = star_selections(ens, x_star)?;
    Ok(ens
        .weights()
        .iter()
        .zip(&stars)
        .map(|(w, a)| w * a.norm_squared())
        .sum())
}

/// Certified similarity constant for an all-affine ensemble:
/// `sqrt( sum_i w_i * s_max(B_i - B_mean)^2 )` with `s_max` the largest
/// singular value. Valid because at any common point the centered member
/// deviations are exactly `(B_i - B_mean)(x - x_star)`.
pub fn estimate_delta_spectral(ens: &OperatorEnsemble) -> Result<f64, TheoryError> {
    let mut forms: Vec<Matrix> = Vec::with_capacity(ens.len());
    for (i, m) in ens.members().iter().enumerate() {
        let (b, _) = m.linear_form().ok_or(TheoryError::NotAffine { member: i })?;
        forms.push(b);
    }
    let d = ens.dim();
    let mut b_mean = Matrix::zeros(d, d);
    for (w, b) in ens.weights().iter().zip(&forms) {
        b_mean += b * *w;
    }
    let mut acc = 0.0;
    for (w, b) in ens.weights().iter().zip(&forms) {
        let dev: Matrix = b - &b_mean;
        let s_max = dev.singular_values().max();
        acc += w * s_max * s_max;
    }
    Ok(acc.sqrt())
}

/// Largest observed deviation ratio over the probe points:
/// `max_x sqrt( sum_i w_i * ||a_i(x) - a_mean(x) - a_i_star||^2 / ||x - x_star||^2 )`.
/// A lower bound on the best similarity constant; probes equal to the root
/// are skipped. For affine ensembles this never exceeds the spectral
/// estimate (up to the root residual).
pub fn empirical_similarity(
    ens: &OperatorEnsemble,
    x_star: &Vector,
    probes: &[Vector],
) -> Result<f64, TheoryError> {
    let stars = star_selections(ens, x_star)?;
    let mut best = 0.0_f64;
    for x in probes {
        let dist_sq = (x - x_star).norm_squared();
        if dist_sq == 0.0 {
            continue;
        }
        let a_mean = ens.mean_element(x)?;
        let mut acc = 0.0;
        for ((w, m), a_star) in ens.weights().iter().zip(ens.members()).zip(&stars) {
            let dev = m.evaluate_element(x)? - &a_mean - a_star;
            acc += w * dev.norm_squared();
        }
        best = best.max((acc / dist_sq).sqrt());
    }
    Ok(best)
}
