//! Closed-form convergence guarantees and the stepsizes that optimize them.
//!
//! The uncorrected method gets an error *bound* (geometric decay into a
//! stepsize-dependent neighborhood); each variance-reduced method gets a
//! [`RateReport`] describing the geometric contraction of its potential,
//! the stepsize minimizing that contraction, and the resulting leading
//! constant of the iteration complexity.

use crate::TheoryError;

/// One method's convergence guarantee at a given (or optimal) stepsize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    /// Per-iteration contraction of the relevant potential (squared error
    /// for the online-corrected method, Lyapunov value for the others).
    pub contraction_factor: f64,
    /// Size of the residual neighborhood the error settles into. Zero for
    /// all variance-reduced methods: they converge exactly.
    pub neighborhood: f64,
    /// Stepsize minimizing the contraction factor. `f64::INFINITY` when
    /// the members coincide exactly (similarity 0): any stepsize contracts,
    /// and larger is strictly better.
    pub optimal_gamma: f64,
    /// Leading constant of the iteration count per digit of accuracy at the
    /// optimal stepsize: iterations scale as `constant * log(1/eps)`.
    pub iteration_complexity_constant: f64,
}

pub(crate) fn check_finite_positive(name: &str, v: f64) -> Result<(), TheoryError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(TheoryError::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

pub(crate) fn check_finite_nonnegative(name: &str, v: f64) -> Result<(), TheoryError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(TheoryError::InvalidParameter(format!(
            "{name} must be nonnegative and finite, got {v}"
        )))
    }
}

pub(crate) fn check_probability(p: f64) -> Result<(), TheoryError> {
    if p.is_finite() && p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(TheoryError::InvalidParameter(format!(
            "refresh probability must lie in (0, 1], got {p}"
        )))
    }
}

fn check_gamma_choice(gamma: Option<f64>) -> Result<(), TheoryError> {
    match gamma {
        Some(g) => check_finite_positive("gamma", g),
        None => Ok(()),
    }
}

/// Expected squared error of the plain stochastic proximal iteration after
/// `k` steps from an initial squared error `init_err_sq`, as the pair
/// `(exact, simplified)`:
///
/// ```text
/// exact      = q^k * init + (1 - q^k) * t
/// simplified = q^k * init + t,            t = gamma^2 * sigma_star_sq / (c - 1)
/// ```
///
/// with `c = (1 + gamma*mu)^2` and `q = 1/c`. The `simplified` form replaces
/// the partial geometric sum by its limit `t = gamma*sigma_star_sq /
/// (2*mu + gamma*mu^2)`, so `exact <= simplified` always — the shared tail
/// term makes that ordering hold even in floating point.
pub fn sppm_bound(
    k: u64,
    gamma: f64,
    mu: f64,
    sigma_star_sq: f64,
    init_err_sq: f64,
) -> Result<(f64, f64), TheoryError> {
    check_finite_positive("gamma", gamma)?;
    check_finite_positive("mu", mu)?;
    check_finite_nonnegative("sigma_star_sq", sigma_star_sq)?;
    check_finite_nonnegative("init_err_sq", init_err_sq)?;
    let gm = gamma * mu;
    let c = (1.0 + gm) * (1.0 + gm);
    // c - 1 computed without cancellation: (1+gm)^2 - 1 = gm*(2 + gm).
    let tail = gamma * gamma * sigma_star_sq / (gm * (2.0 + gm));
    let decay = c.powf(-(k as f64));
    let exact = decay * init_err_sq + (1.0 - decay) * tail;
    let simplified = decay * init_err_sq + tail;
    Ok((exact, simplified))
}

/// Rate of the online-corrected method: squared-error contraction
/// `(1 + gamma^2*delta^2) / (1 + gamma*mu)^2`, minimized at
/// `gamma = mu/delta^2` where it equals `delta^2 / (delta^2 + mu^2)`.
///
/// `gamma = None` evaluates the factor at the optimal stepsize.
pub fn sppm_oc_rate(gamma: Option<f64>, mu: f64, delta: f64) -> Result<RateReport, TheoryError> {
    check_finite_positive("mu", mu)?;
    check_finite_nonnegative("delta", delta)?;
    check_gamma_choice(gamma)?;
    let optimal_gamma = if delta > 0.0 {
        mu / (delta * delta)
    } else {
        f64::INFINITY
    };
    let g = gamma.unwrap_or(optimal_gamma);
    let contraction_factor = if g.is_infinite() {
        // delta = 0 and no stepsize given: the factor 1/(1+g*mu)^2 has
        // infimum 0, not attained.
        0.0
    } else {
        let one_plus = 1.0 + g * mu;
        (1.0 + g * g * delta * delta) / (one_plus * one_plus)
    };
    Ok(RateReport {
        contraction_factor,
        neighborhood: 0.0,
        optimal_gamma,
        iteration_complexity_constant: delta * delta / (mu * mu) + 1.0,
    })
}

/// Rate of the loopless anchor method: Lyapunov contraction
/// `max{ 1/(1+gamma*mu), 1 - p + gamma*delta^2*p / (mu*(1+gamma*mu)) }`,
/// minimized where the branches meet, at
/// `gamma = mu / (delta^2 + mu^2*(1-p)/p)`; the optimal factor is
/// `(p*delta^2 + (1-p)*mu^2) / (p*delta^2 + mu^2)`.
pub fn lsvrp_rate(
    gamma: Option<f64>,
    mu: f64,
    delta: f64,
    p: f64,
) -> Result<RateReport, TheoryError> {
    check_finite_positive("mu", mu)?;
    check_finite_nonnegative("delta", delta)?;
    check_probability(p)?;
    check_gamma_choice(gamma)?;
    let denom = delta * delta + mu * mu * (1.0 - p) / p;
    let optimal_gamma = if denom > 0.0 { mu / denom } else { f64::INFINITY };
    let g = gamma.unwrap_or(optimal_gamma);
    let contraction_factor = if g.is_infinite() {
        0.0
    } else {
        let one_plus = 1.0 + g * mu;
        let anchor_branch = 1.0 - p + g * delta * delta * p / (mu * one_plus);
        (1.0 / one_plus).max(anchor_branch)
    };
    Ok(RateReport {
        contraction_factor,
        neighborhood: 0.0,
        optimal_gamma,
        iteration_complexity_constant: delta * delta / (mu * mu) + 1.0 / p,
    })
}

/// Rate of the table method over `n` members: Lyapunov contraction
/// `max{ 1/(1+gamma*mu), 1 - 1/n + gamma*delta_tilde^2 / (n*mu*(1+gamma*mu)) }`,
/// minimized at `gamma = mu / (delta_tilde^2 + (n-1)*mu^2)`; the optimal
/// factor is `(delta_tilde^2 + (n-1)*mu^2) / (delta_tilde^2 + n*mu^2)`.
pub fn point_saga_rate(
    gamma: Option<f64>,
    mu: f64,
    delta_tilde: f64,
    n: usize,
) -> Result<RateReport, TheoryError> {
    check_finite_positive("mu", mu)?;
    check_finite_nonnegative("delta_tilde", delta_tilde)?;
    check_gamma_choice(gamma)?;
    if n == 0 {
        return Err(TheoryError::InvalidParameter(
            "member count must be at least 1".into(),
        ));
    }
    let nf = n as f64;
    let denom = delta_tilde * delta_tilde + (nf - 1.0) * mu * mu;
    let optimal_gamma = if denom > 0.0 { mu / denom } else { f64::INFINITY };
    let g = gamma.unwrap_or(optimal_gamma);
    let contraction_factor = if g.is_infinite() {
        0.0
    } else {
        let one_plus = 1.0 + g * mu;
        let table_branch = 1.0 - 1.0 / nf + g * delta_tilde * delta_tilde / (nf * mu * one_plus);
        (1.0 / one_plus).max(table_branch)
    };
    Ok(RateReport {
        contraction_factor,
        neighborhood: 0.0,
        optimal_gamma,
        iteration_complexity_constant: delta_tilde * delta_tilde / (mu * mu) + nf,
    })
}
