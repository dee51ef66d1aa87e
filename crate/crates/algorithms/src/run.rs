//! Generic driver: initialize a state, step it for a fixed number of
//! iterations (or until a target error), and record squared error, Lyapunov
//! value, and cumulative operator calls. Multi-trial runs aggregate
//! independent seeded trials; aggregation is sequential in trial order, so
//! results are identical with and without data parallelism.

use crate::{
    lsvrp_step, point_saga_step, sppm_oc_step, sppm_step, AlgorithmError, CallCounter,
    EnsembleStats, LsvrpState, PointSagaState, SamplerRng, SppmOcState, SppmState, StatsRow,
    Trace, TraceRow,
};
use operator_core::{OperatorEnsemble, ResolventOracle, Vector};

/// Steps between exact recomputations of the table method's running mean.
const MEAN_REFRESH_INTERVAL: u64 = 10_000;

/// Residual above which a supplied root earns a warning.
const ROOT_WARN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Sppm,
    SppmOc,
    Lsvrp { p: f64 },
    PointSaga,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Sppm => "sppm",
            Algorithm::SppmOc => "sppm-oc",
            Algorithm::Lsvrp { .. } => "lsvrp",
            Algorithm::PointSaga => "point-saga",
        }
    }
}

/// Reference curve recorded next to the measurements:
/// `bound(k) = offset + factor^k * (V0 - offset)` with `V0` the initial
/// Lyapunov value. `offset = 0` gives a plain geometric envelope; a positive
/// offset expresses convergence to a neighborhood of that radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCurve {
    pub factor: f64,
    pub offset: f64,
}

impl BoundCurve {
    pub fn geometric(factor: f64) -> Self {
        Self { factor, offset: 0.0 }
    }

    pub fn at(&self, k: u64, v0: f64) -> f64 {
        self.offset + self.factor.powi(k as i32) * (v0 - self.offset)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gamma: f64,
    pub iters: u64,
    pub seed: u64,
    pub x0: Vector,
    /// Supplied solution wins over the ensemble's stored or computed root; a
    /// residual above 1e-6 is recorded as a warning.
    pub x_star: Option<Vector>,
    /// Modulus used in Lyapunov weights; defaults to the ensemble's.
    pub mu: Option<f64>,
    pub bound: Option<BoundCurve>,
    /// Track per-member shadow points for the table method's Lyapunov value.
    pub track_shadow: bool,
    /// Record every this-many iterations (k = 0 and the final row always).
    pub record_every: u64,
    /// Stop early once the squared error falls to this value.
    pub target_error: Option<f64>,
}

impl RunConfig {
    pub fn new(gamma: f64, iters: u64, seed: u64, x0: Vector) -> Self {
        Self {
            gamma,
            iters,
            seed,
            x0,
            x_star: None,
            mu: None,
            bound: None,
            track_shadow: true,
            record_every: 1,
            target_error: None,
        }
    }
}

enum AnyState {
    Sppm(SppmState),
    SppmOc(SppmOcState),
    Lsvrp(LsvrpState),
    PointSaga(PointSagaState),
}

impl AnyState {
    fn init(
        algorithm: Algorithm,
        ens: &OperatorEnsemble,
        config: &RunConfig,
        counter: &mut CallCounter,
    ) -> Result<Self, AlgorithmError> {
        let x0 = config.x0.clone();
        Ok(match algorithm {
            Algorithm::Sppm => AnyState::Sppm(SppmState::new(x0)),
            Algorithm::SppmOc => AnyState::SppmOc(SppmOcState::new(x0)),
            Algorithm::Lsvrp { .. } => AnyState::Lsvrp(LsvrpState::init(ens, x0, counter)?),
            Algorithm::PointSaga => {
                AnyState::PointSaga(PointSagaState::init(ens, x0, config.track_shadow, counter)?)
            }
        })
    }

    fn step(
        self,
        algorithm: Algorithm,
        oracle: &ResolventOracle,
        rng: &mut SamplerRng,
        counter: &mut CallCounter,
    ) -> Result<Self, AlgorithmError> {
        Ok(match (self, algorithm) {
            (AnyState::Sppm(s), Algorithm::Sppm) => {
                AnyState::Sppm(sppm_step(s, oracle, rng, counter)?)
            }
            (AnyState::SppmOc(s), Algorithm::SppmOc) => {
                AnyState::SppmOc(sppm_oc_step(s, oracle, rng, counter)?)
            }
            (AnyState::Lsvrp(s), Algorithm::Lsvrp { p }) => {
                AnyState::Lsvrp(lsvrp_step(s, oracle, p, rng, counter)?)
            }
            (AnyState::PointSaga(s), Algorithm::PointSaga) => {
                AnyState::PointSaga(point_saga_step(s, oracle, rng, counter)?)
            }
            _ => unreachable!("state kind fixed by the algorithm"),
        })
    }

    fn x(&self) -> &Vector {
        match self {
            AnyState::Sppm(s) => &s.x,
            AnyState::SppmOc(s) => &s.x,
            AnyState::Lsvrp(s) => &s.x,
            AnyState::PointSaga(s) => &s.x,
        }
    }

    fn sq_error(&self, x_star: &Vector) -> f64 {
        (self.x() - x_star).norm_squared()
    }

    /// Composite potential for the variance-reduced methods with memory,
    /// plain squared error otherwise (or when shadow points are off).
    fn lyapunov(&self, algorithm: Algorithm, x_star: &Vector, gamma: f64, mu: f64) -> f64 {
        match (self, algorithm) {
            (AnyState::Lsvrp(s), Algorithm::Lsvrp { p }) => s.lyapunov(x_star, gamma, mu, p),
            (AnyState::PointSaga(s), _) if s.shadow_w.is_some() => {
                s.lyapunov(x_star, gamma, mu).expect("shadow tracked")
            }
            _ => self.sq_error(x_star),
        }
    }

    fn maintain(&mut self, k: u64) {
        if k % MEAN_REFRESH_INTERVAL == 0 {
            if let AnyState::PointSaga(s) = self {
                s.recompute_mean();
            }
        }
    }
}

// The negated comparisons are load-bearing: NaN must fail validation.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn validate(
    algorithm: Algorithm,
    ens: &OperatorEnsemble,
    config: &RunConfig,
) -> Result<(), AlgorithmError> {
    if !(config.gamma > 0.0 && config.gamma.is_finite()) {
        return Err(AlgorithmError::InvalidConfig(format!(
            "stepsize {} must be positive and finite",
            config.gamma
        )));
    }
    if let Algorithm::Lsvrp { p } = algorithm {
        if !(p > 0.0 && p <= 1.0) {
            return Err(AlgorithmError::InvalidConfig(format!(
                "coin probability {p} outside (0, 1]"
            )));
        }
    }
    if config.x0.len() != ens.dim() {
        return Err(AlgorithmError::InvalidConfig(format!(
            "start point has dimension {}, ensemble has {}",
            config.x0.len(),
            ens.dim()
        )));
    }
    if config.record_every == 0 {
        return Err(AlgorithmError::InvalidConfig(
            "record_every must be at least 1".into(),
        ));
    }
    if let Some(t) = config.target_error {
        if !(t > 0.0) {
            return Err(AlgorithmError::InvalidConfig(format!(
                "target error {t} must be positive"
            )));
        }
    }
    Ok(())
}

fn resolve_root(
    ens: &OperatorEnsemble,
    config: &RunConfig,
    warnings: &mut Vec<String>,
) -> Result<Vector, AlgorithmError> {
    match &config.x_star {
        Some(x) => {
            if x.len() != ens.dim() {
                return Err(AlgorithmError::InvalidConfig(
                    "supplied solution has the wrong dimension".into(),
                ));
            }
            let residual = ens.mean_element(x)?.norm();
            if residual > ROOT_WARN_TOL {
                warnings.push(format!(
                    "supplied solution has mean-element residual {residual:.3e} (> {ROOT_WARN_TOL:.0e}); using it anyway"
                ));
            }
            Ok(x.clone())
        }
        None => Ok(ens.root_or_compute()?),
    }
}

/// Executes one seeded run and records a trace.
pub fn run(
    algorithm: Algorithm,
    ens: &OperatorEnsemble,
    config: &RunConfig,
) -> Result<Trace, AlgorithmError> {
    validate(algorithm, ens, config)?;
    let mut warnings = Vec::new();
    let x_star = resolve_root(ens, config, &mut warnings)?;
    let oracle = ResolventOracle::new(ens, config.gamma)?;
    let mu = config.mu.unwrap_or_else(|| ens.modulus());
    let mut rng = SamplerRng::new(config.seed);
    let mut counter = CallCounter::new();

    let mut state = AnyState::init(algorithm, ens, config, &mut counter)?;
    let v0 = state.lyapunov(algorithm, &x_star, config.gamma, mu);
    let mut rows = Vec::new();
    let record = |rows: &mut Vec<TraceRow>, k: u64, counter: &CallCounter, state: &AnyState| {
        rows.push(TraceRow {
            k,
            member_calls: counter.member_calls,
            full_calls: counter.full_calls,
            sq_error: state.sq_error(&x_star),
            lyapunov: state.lyapunov(algorithm, &x_star, config.gamma, mu),
            bound_value: config.bound.map(|b| b.at(k, v0)),
        });
    };
    record(&mut rows, 0, &counter, &state);

    for k in 1..=config.iters {
        state = state.step(algorithm, &oracle, &mut rng, &mut counter)?;
        state.maintain(k);
        let reached = config
            .target_error
            .is_some_and(|t| state.sq_error(&x_star) <= t);
        if k % config.record_every == 0 || k == config.iters || reached {
            record(&mut rows, k, &counter, &state);
        }
        if reached {
            break;
        }
    }

    Ok(Trace {
        rows,
        warnings,
        final_x: state.x().clone(),
    })
}

fn trial_config(config: &RunConfig, trial: u64) -> RunConfig {
    let mut c = config.clone();
    c.seed = config.seed.wrapping_add(trial);
    c
}

/// Runs `trials` independent seeded trials (seed = base + trial index) and
/// aggregates them. Uses the data-parallel pool when the `parallel` feature
/// is on; results are identical either way.
pub fn run_trials(
    algorithm: Algorithm,
    ens: &OperatorEnsemble,
    config: &RunConfig,
    trials: usize,
) -> Result<EnsembleStats, AlgorithmError> {
    check_trials(config, trials)?;
    #[cfg(feature = "parallel")]
    let traces = {
        use rayon::prelude::*;
        (0..trials as u64)
            .into_par_iter()
            .map(|t| run(algorithm, ens, &trial_config(config, t)))
            .collect::<Result<Vec<_>, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let traces = (0..trials as u64)
        .map(|t| run(algorithm, ens, &trial_config(config, t)))
        .collect::<Result<Vec<_>, _>>()?;
    aggregate(traces, trials)
}

/// Sequential twin of [`run_trials`], available regardless of features; the
/// benchmark suite compares the two.
pub fn run_trials_serial(
    algorithm: Algorithm,
    ens: &OperatorEnsemble,
    config: &RunConfig,
    trials: usize,
) -> Result<EnsembleStats, AlgorithmError> {
    check_trials(config, trials)?;
    let traces = (0..trials as u64)
        .map(|t| run(algorithm, ens, &trial_config(config, t)))
        .collect::<Result<Vec<_>, _>>()?;
    aggregate(traces, trials)
}

fn check_trials(config: &RunConfig, trials: usize) -> Result<(), AlgorithmError> {
    if trials == 0 {
        return Err(AlgorithmError::InvalidConfig("trials must be at least 1".into()));
    }
    if config.target_error.is_some() {
        return Err(AlgorithmError::InvalidConfig(
            "early stopping applies to single runs; aggregated trials need a fixed grid".into(),
        ));
    }
    Ok(())
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn aggregate(traces: Vec<Trace>, trials: usize) -> Result<EnsembleStats, AlgorithmError> {
    let len = traces.iter().map(|t| t.rows.len()).min().unwrap_or(0);
    let tn = trials as f64;
    let mut rows = Vec::with_capacity(len);
    let mut column = vec![0.0; trials];
    for j in 0..len {
        let k = traces[0].rows[j].k;
        debug_assert!(traces.iter().all(|t| t.rows[j].k == k));
        let mut sum_member = 0.0;
        let mut sum_full = 0.0;
        let mut sum_err = 0.0;
        let mut sum_lyap = 0.0;
        for (c, t) in column.iter_mut().zip(&traces) {
            let r = &t.rows[j];
            sum_member += r.member_calls as f64;
            sum_full += r.full_calls as f64;
            sum_err += r.sq_error;
            sum_lyap += r.lyapunov;
            *c = r.sq_error;
        }
        let mean_err = sum_err / tn;
        let var = if trials > 1 {
            let ss: f64 = column.iter().map(|&e| (e - mean_err).powi(2)).sum();
            ss / (tn - 1.0)
        } else {
            0.0
        };
        let mut sorted = column.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
        rows.push(StatsRow {
            k,
            mean_member_calls: sum_member / tn,
            mean_full_calls: sum_full / tn,
            mean_sq_error: mean_err,
            var_sq_error: var,
            p10_sq_error: percentile(&sorted, 0.10),
            p90_sq_error: percentile(&sorted, 0.90),
            mean_lyapunov: sum_lyap / tn,
            bound_value: traces[0].rows[j].bound_value,
        });
    }
    let warnings = traces.first().map(|t| t.warnings.clone()).unwrap_or_default();
    Ok(EnsembleStats {
        rows,
        trials,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use operator_core::{Operator, ShiftedScalingOperator};

    fn tightness_pair() -> OperatorEnsemble {
        let plus = ShiftedScalingOperator::new(1.0, dvector![0.0], dvector![1.0]).unwrap();
        let minus = ShiftedScalingOperator::new(1.0, dvector![0.0], dvector![-1.0]).unwrap();
        OperatorEnsemble::new(vec![Operator::from(plus), Operator::from(minus)]).unwrap()
    }

    #[test]
    fn zero_iterations_gives_initial_row() {
        let ens = tightness_pair();
        let config = RunConfig::new(1.0, 0, 1, dvector![3.0]);
        let trace = run(Algorithm::Sppm, &ens, &config).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.rows[0].k, 0);
        assert_eq!(trace.rows[0].sq_error, 9.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let ens = tightness_pair();
        let config = RunConfig::new(0.5, 100, 99, dvector![2.0]);
        let a = run(Algorithm::Lsvrp { p: 0.3 }, &ens, &config).unwrap();
        let b = run(Algorithm::Lsvrp { p: 0.3 }, &ens, &config).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.final_x, b.final_x);
    }

    #[test]
    fn rejects_bad_configs() {
        let ens = tightness_pair();
        let good = RunConfig::new(1.0, 1, 0, dvector![1.0]);

        let mut c = good.clone();
        c.gamma = -1.0;
        assert!(run(Algorithm::Sppm, &ens, &c).is_err());

        assert!(run(Algorithm::Lsvrp { p: 0.0 }, &ens, &good).is_err());
        assert!(run(Algorithm::Lsvrp { p: 1.5 }, &ens, &good).is_err());

        let mut c = good.clone();
        c.x0 = dvector![1.0, 2.0];
        assert!(run(Algorithm::Sppm, &ens, &c).is_err());

        let mut c = good;
        c.record_every = 0;
        assert!(run(Algorithm::Sppm, &ens, &c).is_err());
    }

    #[test]
    fn warns_on_bad_supplied_root() {
        let ens = tightness_pair();
        let mut config = RunConfig::new(1.0, 1, 0, dvector![1.0]);
        config.x_star = Some(dvector![0.5]);
        let trace = run(Algorithm::Sppm, &ens, &config).unwrap();
        assert_eq!(trace.warnings.len(), 1);
        config.x_star = Some(dvector![0.0]);
        let trace = run(Algorithm::Sppm, &ens, &config).unwrap();
        assert!(trace.warnings.is_empty());
    }

    #[test]
    fn target_error_stops_early() {
        // Deterministic single member: error shrinks by 4x per step from 9.
        let ens = OperatorEnsemble::new(vec![Operator::from(
            ShiftedScalingOperator::new(1.0, dvector![0.0], dvector![0.0]).unwrap(),
        )])
        .unwrap();
        let mut config = RunConfig::new(1.0, 1000, 0, dvector![3.0]);
        config.target_error = Some(1e-3);
        let trace = run(Algorithm::Sppm, &ens, &config).unwrap();
        let last = trace.rows.last().unwrap();
        assert!(last.sq_error <= 1e-3);
        assert!(last.k < 1000);
        // 9 / 4^k <= 1e-3 first at k = 7.
        assert_eq!(last.k, 7);
    }

    #[test]
    fn parallel_and_serial_agree_exactly() {
        let ens = tightness_pair();
        let mut config = RunConfig::new(0.3, 50, 7, dvector![2.0]);
        config.bound = Some(BoundCurve::geometric(0.9));
        for algorithm in [
            Algorithm::Sppm,
            Algorithm::SppmOc,
            Algorithm::Lsvrp { p: 0.4 },
            Algorithm::PointSaga,
        ] {
            let par = run_trials(algorithm, &ens, &config, 16).unwrap();
            let ser = run_trials_serial(algorithm, &ens, &config, 16).unwrap();
            assert_eq!(par.rows, ser.rows);
        }
    }

    #[test]
    fn stats_have_expected_grid() {
        let ens = tightness_pair();
        let mut config = RunConfig::new(0.5, 20, 3, dvector![4.0]);
        config.record_every = 5;
        let stats = run_trials(Algorithm::Sppm, &ens, &config, 8).unwrap();
        let ks: Vec<u64> = stats.rows.iter().map(|r| r.k).collect();
        assert_eq!(ks, vec![0, 5, 10, 15, 20]);
        assert_eq!(stats.trials, 8);
    }
}
