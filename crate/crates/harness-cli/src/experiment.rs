//! `run`: execute a configured experiment — one problem, a list of
//! algorithms — and write one CSV per algorithm plus metadata sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use operator_core::{OperatorEnsemble, Vector};

use crate::config::{load_problem, AlgorithmSpec, ExperimentConfig, GammaSpec};
use crate::meta::{sha256_hex, InstanceMeta, RunMeta, SourceMeta};
use crate::{
    auto_gamma, contraction_factor, similarity, start_point, Outcome, Similarity, PROBE_SEED,
    START_OFFSET,
};

/// Command-line overrides; each one, when present, wins over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<usize>,
    pub iters: Option<u64>,
    pub target_error: Option<f64>,
}

pub fn cmd_run(config_path: &Path, overrides: &Overrides) -> Result<Outcome> {
    let (mut cfg, base) = ExperimentConfig::load(config_path)?;
    if let Some(s) = overrides.seed {
        cfg.seeds = s;
    }
    if let Some(o) = &overrides.out {
        cfg.output_dir = o.clone();
    }
    if let Some(t) = overrides.trials {
        cfg.trials = t;
    }
    if let Some(i) = overrides.iters {
        cfg.iterations = i;
    }
    if let Some(e) = overrides.target_error {
        cfg.target_error = Some(e);
    }
    validate(&cfg)?;

    let loaded = load_problem(&cfg.problem, &base)?;
    let ens = loaded.ensemble;
    let root = ens
        .root_or_compute()
        .context("cannot solve the instance for its root")?;
    let mu = ens.modulus();
    if !(mu > 0.0) {
        bail!("the run driver needs a positive strong-monotonicity modulus, got mu = {mu}");
    }
    let sim = similarity(&ens, &root, PROBE_SEED)?;
    let sigma_star_sq = theory::sigma_star_sq(&ens, &root)
        .context("stationary noise estimate failed")?;
    let x0 = start_point(&root);

    let out = cfg.output_dir.clone();
    fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let ensemble_hash = sha256_hex(&ens.to_text());
    crate::meta::write_toml(
        &out.join("instance.meta.toml"),
        &InstanceMeta::collect(&ens, loaded.source.clone()),
    )?;
    if matches!(loaded.source, SourceMeta::Generated { .. }) {
        // Inline-spec runs stay self-contained: the exact instance rides
        // along with its results.
        fs::write(out.join("ensemble.txt"), ens.to_text())
            .context("cannot write the generated ensemble")?;
    }

    println!(
        "run: {} algorithms on {} members (dimension {}), {} trial(s)",
        cfg.algorithms.len(),
        ens.len(),
        ens.dim(),
        cfg.trials
    );
    for (idx, spec) in cfg.algorithms.iter().enumerate() {
        run_one(
            idx,
            spec,
            &cfg,
            &ens,
            &root,
            &x0,
            mu,
            &sim,
            sigma_star_sq,
            &ensemble_hash,
            &out,
        )?;
    }
    println!("wrote {}", out.display());
    Ok(Outcome::Success)
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.trials == 0 {
        bail!("a run needs at least one trial, got trials = 0");
    }
    if cfg.algorithms.is_empty() {
        bail!("the config lists no algorithms");
    }
    if cfg.iterations == 0 {
        bail!("a run needs at least one iteration");
    }
    if let Some(t) = cfg.target_error {
        if !(t.is_finite() && t > 0.0) {
            bail!("target error must be positive and finite, got {t}");
        }
        if cfg.trials > 1 {
            bail!(
                "a target error needs trials = 1: aggregated trials run on a \
                 fixed iteration grid"
            );
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    idx: usize,
    spec: &AlgorithmSpec,
    cfg: &ExperimentConfig,
    ens: &OperatorEnsemble,
    root: &Vector,
    x0: &Vector,
    mu: f64,
    sim: &Similarity,
    sigma_star_sq: f64,
    ensemble_hash: &str,
    out: &Path,
) -> Result<()> {
    let algorithm = spec
        .to_algorithm()
        .with_context(|| format!("algorithms[{idx}]"))?;
    let gamma = match spec.gamma {
        GammaSpec::Fixed(g) => {
            if !(g.is_finite() && g > 0.0) {
                bail!(
                    "algorithms[{idx}] ({}): stepsize must be positive and finite, got {g}",
                    algorithm.name()
                );
            }
            g
        }
        GammaSpec::Auto => auto_gamma(algorithm, mu, sim.used, ens.len())
            .with_context(|| format!("algorithms[{idx}] ({})", algorithm.name()))?,
    };
    let label = format!("{idx:02}_{}", algorithm.name());

    let mut rc = algorithms::RunConfig::new(gamma, cfg.iterations, cfg.seeds, x0.clone());
    rc.x_star = Some(root.clone());
    rc.mu = Some(mu);
    rc.record_every = (cfg.iterations / 1000).max(1);
    rc.target_error = cfg.target_error;
    rc.bound = bound_for(algorithm, gamma, mu, sim.used, sigma_star_sq, ens.len());

    let (csv, warnings, summary) = if cfg.trials == 1 {
        let trace = algorithms::run(algorithm, ens, &rc)?;
        let summary = format!(
            "final sq_error {:.6e} at k = {}",
            trace.last_sq_error(),
            trace.rows.last().map_or(0, |r| r.k)
        );
        (trace.to_csv()?, trace.warnings, summary)
    } else {
        let stats = algorithms::run_trials(algorithm, ens, &rc, cfg.trials)?;
        let last = stats.rows.last();
        let summary = format!(
            "mean final sq_error {:.6e} over {} trials",
            last.map_or(f64::NAN, |r| r.mean_sq_error),
            cfg.trials
        );
        (stats.to_csv()?, stats.warnings, summary)
    };
    let csv_path = out.join(format!("{label}.csv"));
    fs::write(&csv_path, csv).with_context(|| format!("cannot write {}", csv_path.display()))?;

    let meta = RunMeta {
        algorithm: algorithm.name().to_string(),
        label: label.clone(),
        requested_gamma: spec.gamma.describe(),
        gamma,
        p: match algorithm {
            algorithms::Algorithm::Lsvrp { p } => Some(p),
            _ => None,
        },
        iterations: cfg.iterations,
        trials: cfg.trials,
        base_seed: cfg.seeds,
        record_every: rc.record_every,
        start_offset: START_OFFSET,
        target_error: cfg.target_error,
        contraction_factor: contraction_factor(algorithm, gamma, mu, sim.used, ens.len()),
        ensemble_sha256: ensemble_hash.to_string(),
    };
    crate::meta::write_toml(&out.join(format!("{label}.meta.toml")), &meta)?;

    println!("  {label}: gamma {gamma:.6e} — {summary}");
    for w in warnings {
        eprintln!("  warning ({label}): {w}");
    }
    Ok(())
}

/// Reference curve recorded alongside the data: the closed-form error bound
/// for the uncorrected method, a geometric envelope at the rate-theory
/// factor for the others (when that factor is contractive).
pub(crate) fn bound_for(
    algorithm: algorithms::Algorithm,
    gamma: f64,
    mu: f64,
    delta: f64,
    sigma_star_sq: f64,
    n: usize,
) -> Option<algorithms::BoundCurve> {
    match algorithm {
        algorithms::Algorithm::Sppm => {
            let gm = gamma * mu;
            Some(algorithms::BoundCurve {
                factor: ((1.0 + gm) * (1.0 + gm)).recip(),
                // (1+gm)^2 - 1 written as gm*(2+gm): no cancellation.
                offset: gamma * gamma * sigma_star_sq / (gm * (2.0 + gm)),
            })
        }
        _ => contraction_factor(algorithm, gamma, mu, delta, n)
            .map(algorithms::BoundCurve::geometric),
    }
}
