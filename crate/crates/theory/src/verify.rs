//! Machine checking of the per-step contraction guarantees.
//!
//! Each method's guarantee has the form "the conditional expectation of the
//! next potential is at most a factor times the current one". Because the
//! sampling distributions here are finite, that conditional expectation can
//! be computed *exactly* by enumerating every outcome through the very same
//! transition kernels the solvers run — there is no gap between the object
//! that is verified and the object that is executed.

use crate::rates::{
    check_finite_nonnegative, check_finite_positive, lsvrp_rate, point_saga_rate,
};
use crate::{sigma_star_sq, TheoryError};
use algorithms::{
    lsvrp_apply, point_saga_apply, sppm_apply, sppm_oc_apply, Algorithm, CallCounter, LsvrpState,
    PointSagaState, SppmOcState, SppmState,
};
use operator_core::{Operator, OperatorEnsemble, ResolventOracle, Vector};

/// Relative tolerance under which an enumerated expectation still counts as
/// satisfying its bound (floating-point headroom only).
pub const STEP_CHECK_REL_TOL: f64 = 1e-9;

/// Outcome of one per-step contraction check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCheck {
    /// Exact conditional expectation of the next potential.
    pub lhs: f64,
    /// The guaranteed contraction of the current potential.
    pub rhs: f64,
    /// `lhs <= rhs * (1 + STEP_CHECK_REL_TOL)`.
    pub holds: bool,
    /// `rhs - lhs`; negative means the bound is violated.
    pub slack: f64,
}

impl StepCheck {
    fn from_sides(lhs: f64, rhs: f64) -> Self {
        StepCheck {
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + STEP_CHECK_REL_TOL),
            slack: rhs - lhs,
        }
    }
}

/// Borrowed view of one method's state, for potential evaluation and step
/// verification.
#[derive(Debug, Clone, Copy)]
pub enum MethodState<'a> {
    Sppm(&'a SppmState),
    SppmOc(&'a SppmOcState),
    Lsvrp(&'a LsvrpState),
    PointSaga(&'a PointSagaState),
}

/// The potential each method's guarantee contracts: plain squared error for
/// the memoryless methods, the composite Lyapunov value for the anchor and
/// table methods. The refresh probability is taken from the algorithm tag;
/// the member count from the state's table.
pub fn lyapunov(
    algorithm: Algorithm,
    state: &MethodState<'_>,
    x_star: &Vector,
    gamma: f64,
    mu: f64,
) -> Result<f64, TheoryError> {
    check_finite_positive("gamma", gamma)?;
    check_finite_positive("mu", mu)?;
    match (algorithm, *state) {
        (Algorithm::Sppm, MethodState::Sppm(s)) => Ok(s.sq_error(x_star)),
        (Algorithm::SppmOc, MethodState::SppmOc(s)) => Ok(s.sq_error(x_star)),
        (Algorithm::Lsvrp { p }, MethodState::Lsvrp(s)) => {
            crate::rates::check_probability(p)?;
            Ok(s.lyapunov(x_star, gamma, mu, p))
        }
        (Algorithm::PointSaga, MethodState::PointSaga(s)) => {
            Ok(s.lyapunov(x_star, gamma, mu)?)
        }
        (algorithm, _) => Err(TheoryError::StateMismatch {
            algorithm: algorithm.name(),
        }),
    }
}

/// Fail if any set-valued member is exactly at a jump of its graph at `x`:
/// the enumeration would have to pick one element arbitrarily there.
fn check_unambiguous(ens: &OperatorEnsemble, x: &Vector) -> Result<(), TheoryError> {
    if x.len() != 1 {
        return Ok(());
    }
    for (i, m) in ens.members().iter().enumerate() {
        if let Operator::PiecewiseScalar(op) = m {
            let (lo, hi) = op.value_interval(x[0]);
            if lo != hi {
                return Err(TheoryError::AmbiguousSelection { member: i });
            }
        }
    }
    Ok(())
}

/// Exact one-step contraction check for the given method at the given
/// state.
///
/// The left-hand side is the exact conditional expectation of the next
/// potential, obtained by running the transition kernel once per outcome —
/// every member index, and for the anchor method both coin results weighted
/// `p` / `1-p`. The right-hand side is the method's guaranteed factor
/// (built from `mu` and the similarity constant `delta`) applied to the
/// current potential. For the plain method the right-hand side is the
/// one-step error bound `(||x - x_star||^2 + gamma^2*sigma_star^2) /
/// (1+gamma*mu)^2`, which the equal-resolvent family attains with equality.
///
/// `mu` is explicit rather than read off the ensemble because a useful
/// modulus can hold for the mean operator even where the member-wise
/// modulus degenerates (set-valued members with flat pieces).
pub fn verify_step_inequality(
    algorithm: Algorithm,
    state: &MethodState<'_>,
    ens: &OperatorEnsemble,
    x_star: &Vector,
    gamma: f64,
    mu: f64,
    delta: f64,
) -> Result<StepCheck, TheoryError> {
    check_finite_positive("gamma", gamma)?;
    check_finite_positive("mu", mu)?;
    check_finite_nonnegative("delta", delta)?;
    if x_star.len() != ens.dim() {
        return Err(TheoryError::InvalidParameter(format!(
            "solution dimension {} does not match ensemble dimension {}",
            x_star.len(),
            ens.dim()
        )));
    }
    let oracle = ResolventOracle::new(ens, gamma)?;
    let weights = ens.weights();
    // Enumeration must not pollute any real cost accounting.
    let mut scratch = CallCounter::default();
    let one_plus = 1.0 + gamma * mu;

    match (algorithm, *state) {
        (Algorithm::Sppm, MethodState::Sppm(s)) => {
            let current = s.sq_error(x_star);
            let mut lhs = 0.0;
            for (i, w) in weights.iter().enumerate() {
                let next = sppm_apply(s.clone(), &oracle, i, &mut scratch)?;
                lhs += w * next.sq_error(x_star);
            }
            let noise = sigma_star_sq(ens, x_star)?;
            let rhs = (current + gamma * gamma * noise) / (one_plus * one_plus);
            Ok(StepCheck::from_sides(lhs, rhs))
        }
        (Algorithm::SppmOc, MethodState::SppmOc(s)) => {
            check_unambiguous(ens, &s.x)?;
            let current = s.sq_error(x_star);
            let mut lhs = 0.0;
            for (i, w) in weights.iter().enumerate() {
                let next = sppm_oc_apply(s.clone(), &oracle, i, &mut scratch)?;
                lhs += w * next.sq_error(x_star);
            }
            let rhs =
                (1.0 + gamma * gamma * delta * delta) / (one_plus * one_plus) * current;
            Ok(StepCheck::from_sides(lhs, rhs))
        }
        (Algorithm::Lsvrp { p }, MethodState::Lsvrp(s)) => {
            crate::rates::check_probability(p)?;
            check_unambiguous(ens, &s.w)?;
            let current = s.lyapunov(x_star, gamma, mu, p);
            let mut lhs = 0.0;
            for (i, w) in weights.iter().enumerate() {
                let tails = lsvrp_apply(s.clone(), &oracle, i, false, &mut scratch)?;
                // The refreshed mean is evaluated at the new iterate, which
                // both coin outcomes share.
                check_unambiguous(ens, &tails.x)?;
                let heads = lsvrp_apply(s.clone(), &oracle, i, true, &mut scratch)?;
                lhs += w
                    * (p * heads.lyapunov(x_star, gamma, mu, p)
                        + (1.0 - p) * tails.lyapunov(x_star, gamma, mu, p));
            }
            let factor = lsvrp_rate(Some(gamma), mu, delta, p)?.contraction_factor;
            Ok(StepCheck::from_sides(lhs, factor * current))
        }
        (Algorithm::PointSaga, MethodState::PointSaga(s)) => {
            if s.table.len() != ens.len() {
                return Err(TheoryError::InvalidParameter(format!(
                    "state table holds {} entries for an ensemble of {}",
                    s.table.len(),
                    ens.len()
                )));
            }
            if !ens.is_uniform() {
                return Err(TheoryError::InvalidParameter(
                    "the table method requires uniform weights".into(),
                ));
            }
            let current = s.lyapunov(x_star, gamma, mu)?;
            let n = ens.len() as f64;
            let mut lhs = 0.0;
            for i in 0..ens.len() {
                let next = point_saga_apply(s.clone(), &oracle, i, &mut scratch)?;
                lhs += next.lyapunov(x_star, gamma, mu)? / n;
            }
            let factor = point_saga_rate(Some(gamma), mu, delta, ens.len())?.contraction_factor;
            Ok(StepCheck::from_sides(lhs, factor * current))
        }
        (algorithm, _) => Err(TheoryError::StateMismatch {
            algorithm: algorithm.name(),
        }),
    }
}

/// Exact expected squared distance to the common center of an
/// equal-resolvent family, after 0..=k_max plain stochastic proximal steps
/// from `x0`. Entry `k` of the result is `E||x^k - center||^2`.
///
/// Every member must be a shifted scaling with one shared modulus and
/// center. All member resolvents then share the linear coefficient
/// `1/(1+gamma*mu)`, so conditional expectations close over the pair (mean
/// iterate, expected squared distance) and the member enumeration performed
/// each step propagates both *exactly* — no sampling, no bound. When the
/// member offsets average to zero this curve is what the closed-form error
/// bound claims to dominate; it matches the bound's exact form with
/// equality, which is how that form is validated here.
pub fn sppm_exact_expected_error(
    ens: &OperatorEnsemble,
    gamma: f64,
    x0: &Vector,
    k_max: u64,
) -> Result<Vec<f64>, TheoryError> {
    check_finite_positive("gamma", gamma)?;
    let mut mu = None;
    let mut center: Option<Vector> = None;
    let mut offsets = Vec::with_capacity(ens.len());
    for (i, m) in ens.members().iter().enumerate() {
        let Operator::ShiftedScaling(op) = m else {
            return Err(TheoryError::InvalidParameter(format!(
                "member {i} is not a shifted scaling"
            )));
        };
        match (&mu, &center) {
            (None, _) => {
                mu = Some(op.mu());
                center = Some(op.center().clone());
            }
            (Some(m0), Some(c0)) => {
                if (op.mu() - m0).abs() > 1e-12 * m0.abs() || (op.center() - c0).norm() > 1e-12 {
                    return Err(TheoryError::InvalidParameter(format!(
                        "member {i} does not share the family's modulus and center"
                    )));
                }
            }
            _ => unreachable!(),
        }
        offsets.push(op.offset().clone());
    }
    let (Some(mu), Some(center)) = (mu, center) else {
        return Err(TheoryError::InvalidParameter("empty ensemble".into()));
    };
    if x0.len() != center.len() {
        return Err(TheoryError::InvalidParameter(format!(
            "start dimension {} does not match ensemble dimension {}",
            x0.len(),
            center.len()
        )));
    }

    let contraction = 1.0 / (1.0 + gamma * mu);
    let mut mean_dev = x0 - &center;
    let mut sq = mean_dev.norm_squared();
    let mut curve = Vec::with_capacity(k_max as usize + 1);
    curve.push(sq);
    for _ in 0..k_max {
        let mut sq_next = 0.0;
        let mut mean_next = Vector::zeros(mean_dev.len());
        for (w, o) in ens.weights().iter().zip(&offsets) {
            sq_next +=
                w * (sq - 2.0 * gamma * o.dot(&mean_dev) + gamma * gamma * o.norm_squared());
            mean_next += (&mean_dev - gamma * o) * *w;
        }
        sq = sq_next * contraction * contraction;
        mean_dev = mean_next * contraction;
        curve.push(sq);
    }
    Ok(curve)
}
