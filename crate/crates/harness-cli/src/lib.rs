//! Command-line driver for the stochastic proximal point toolkit: synthetic
//! problem generation, seeded experiment runs, constant estimation,
//! contraction-certificate verification, and reproduction of the reference
//! figure data as CSV.
//!
//! The binary is `sppm-vr`; this library holds the command implementations
//! so they can be exercised directly in tests. Exit-code contract: 0 on
//! success, 1 on any validation error (bad flags, bad config, missing
//! files), 2 when `verify` finds a violated check.

pub mod checks;
pub mod config;
pub mod constants;
pub mod experiment;
pub mod figures;
pub mod generate;
pub mod meta;

use anyhow::{bail, Context, Result};
use nalgebra::DVector;
use operator_core::OperatorEnsemble;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use theory::TheoryError;

/// What a command run amounts to, separated from hard errors so `main` can
/// map it onto the exit-code contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

/// Every driver starts at `x* + START_OFFSET * (1, ..., 1)` unless a command
/// documents otherwise: far enough from the solution for transients to be
/// visible, close enough that no stepsize overflows.
pub const START_OFFSET: f64 = 3.0;

pub fn start_point(root: &DVector<f64>) -> DVector<f64> {
    root + DVector::from_element(root.len(), START_OFFSET)
}

/// Probe-cloud seed shared by every command that estimates similarity, so
/// their reports agree on the same instance.
pub const PROBE_SEED: u64 = 17;

/// Radii of the probe shells used for empirical similarity estimation.
const PROBE_RADII: [f64; 3] = [0.1, 1.0, 10.0];
/// Probes per shell.
const PROBES_PER_RADIUS: usize = 16;

/// Deterministic probe cloud around the solution: `PROBES_PER_RADIUS`
/// points on each of three shells, directions drawn from a seeded normal.
pub fn probe_points(root: &DVector<f64>, seed: u64) -> Vec<DVector<f64>> {
    let dim = root.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::with_capacity(PROBE_RADII.len() * PROBES_PER_RADIUS);
    for radius in PROBE_RADII {
        for _ in 0..PROBES_PER_RADIUS {
            let direction: DVector<f64> =
                DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
            let norm = direction.norm();
            if norm == 0.0 {
                continue;
            }
            probes.push(root + direction * (radius / norm));
        }
    }
    probes
}

/// The similarity constants of an ensemble: the spectral estimate (defined
/// for all-affine ensembles), the probe-based empirical estimate, and the
/// one stepsize selection uses (spectral when available — it certifies the
/// single-point deviation bound — otherwise empirical).
#[derive(Debug, Clone, Copy)]
pub struct Similarity {
    pub spectral: Option<f64>,
    pub empirical: f64,
    pub used: f64,
}

pub fn similarity(
    ens: &OperatorEnsemble,
    root: &DVector<f64>,
    probe_seed: u64,
) -> Result<Similarity> {
    let spectral = match theory::estimate_delta_spectral(ens) {
        Ok(d) => Some(d),
        Err(TheoryError::NotAffine { .. }) => None,
        Err(e) => return Err(e).context("spectral similarity estimate failed"),
    };
    let probes = probe_points(root, probe_seed);
    let empirical = theory::empirical_similarity(ens, root, &probes)
        .context("empirical similarity estimate failed")?;
    Ok(Similarity {
        spectral,
        empirical,
        used: spectral.unwrap_or(empirical),
    })
}

/// Theory-optimal stepsize for a variance-reduced method; a validation
/// error for the uncorrected method (no finite optimum exists) and for the
/// `delta = 0` degenerate case (any stepsize contracts, so the choice is
/// the caller's).
pub fn auto_gamma(
    algorithm: algorithms::Algorithm,
    mu: f64,
    delta: f64,
    n: usize,
) -> Result<f64> {
    use algorithms::Algorithm;
    let gamma = match algorithm {
        Algorithm::Sppm => bail!(
            "the uncorrected method converges only to a neighborhood whose size grows \
             with the stepsize; there is no optimal choice — give it an explicit gamma"
        ),
        Algorithm::SppmOc => theory::sppm_oc_rate(None, mu, delta)?.optimal_gamma,
        Algorithm::Lsvrp { p } => theory::lsvrp_rate(None, mu, delta, p)?.optimal_gamma,
        Algorithm::PointSaga => theory::point_saga_rate(None, mu, delta, n)?.optimal_gamma,
    };
    if !gamma.is_finite() {
        bail!(
            "optimal stepsize is unbounded; any gamma contracts (similarity constant is 0) — \
             give an explicit gamma"
        );
    }
    Ok(gamma)
}

/// Contraction factor of a method at a given stepsize, when the rate theory
/// yields one below 1; `None` otherwise (no reference curve worth drawing).
pub fn contraction_factor(
    algorithm: algorithms::Algorithm,
    gamma: f64,
    mu: f64,
    delta: f64,
    n: usize,
) -> Option<f64> {
    use algorithms::Algorithm;
    let report = match algorithm {
        Algorithm::Sppm => return None,
        Algorithm::SppmOc => theory::sppm_oc_rate(Some(gamma), mu, delta),
        Algorithm::Lsvrp { p } => theory::lsvrp_rate(Some(gamma), mu, delta, p),
        Algorithm::PointSaga => theory::point_saga_rate(Some(gamma), mu, delta, n),
    };
    match report {
        Ok(r) if r.contraction_factor < 1.0 => Some(r.contraction_factor),
        _ => None,
    }
}
