//! One-stop constant estimation for a problem instance: modulus, Lipschitz
//! scale, similarity constants, stationary noise, and the optimal stepsize
//! and contraction factor of every variance-reduced method.

use crate::{
    empirical_similarity, estimate_delta_spectral, lsvrp_rate, point_saga_rate, sigma_star_sq,
    sppm_oc_rate, RateReport, TheoryError,
};
use operator_core::{OperatorEnsemble, Vector};

/// Estimated constants and derived tunings for one ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    pub members: usize,
    pub dim: usize,
    /// Smallest member strong-monotonicity modulus.
    pub mu: f64,
    /// Largest member Lipschitz constant; `None` if some member has jumps.
    pub lipschitz: Option<f64>,
    /// Certified similarity for all-affine ensembles; `None` otherwise.
    pub delta_spectral: Option<f64>,
    /// Probe-based lower bound on the similarity constant.
    pub delta_empirical: f64,
    /// The constant the rate reports below are built from: the spectral
    /// value when certified, the empirical value otherwise.
    pub delta_used: f64,
    pub sigma_star_sq: f64,
    /// Refresh probability the anchor-method report is evaluated at.
    pub lsvrp_p: f64,
    pub sppm_oc: RateReport,
    pub lsvrp: RateReport,
    pub point_saga: RateReport,
}

/// Estimates every constant of the report at once. `lsvrp_p` defaults to
/// `1/n`, the refresh rate whose expected snapshot cost matches the table
/// method. The probe set is the caller's; for affine ensembles any probes
/// give an empirical value below the certified spectral one.
pub fn estimate_constants(
    ens: &OperatorEnsemble,
    x_star: &Vector,
    probes: &[Vector],
    lsvrp_p: Option<f64>,
) -> Result<ConstantsReport, TheoryError> {
    let mu = ens.modulus();
    if !(mu.is_finite() && mu > 0.0) {
        return Err(TheoryError::InvalidParameter(format!(
            "ensemble modulus must be positive for the rate theory, got {mu}"
        )));
    }
    let delta_spectral = match estimate_delta_spectral(ens) {
        Ok(d) => Some(d),
        Err(TheoryError::NotAffine { .. }) => None,
        Err(e) => return Err(e),
    };
    let delta_empirical = empirical_similarity(ens, x_star, probes)?;
    let delta_used = delta_spectral.unwrap_or(delta_empirical);
    let p = lsvrp_p.unwrap_or(1.0 / ens.len() as f64);
    Ok(ConstantsReport {
        members: ens.len(),
        dim: ens.dim(),
        mu,
        lipschitz: ens.lipschitz_constant(),
        delta_spectral,
        delta_empirical,
        delta_used,
        sigma_star_sq: sigma_star_sq(ens, x_star)?,
        lsvrp_p: p,
        sppm_oc: sppm_oc_rate(None, mu, delta_used)?,
        lsvrp: lsvrp_rate(None, mu, delta_used, p)?,
        point_saga: point_saga_rate(None, mu, delta_used, ens.len())?,
    })
}
