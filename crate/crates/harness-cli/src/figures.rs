//! `reproduce`: the two reference experiments as CSV data.
//!
//! Figure 1 contrasts the uncorrected method's stepsize-dependent plateaus
//! with the variance-reduced methods' exact convergence, mean and
//! percentiles over trials on an iteration grid. Figure 2 races every
//! variance-reduced method to a target error and reports cumulative
//! operator call units (one member evaluation or resolvent apply = 1, one
//! full-operator evaluation = n).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use operator_core::{OperatorEnsemble, Vector};
use serde::Serialize;

use crate::experiment::bound_for;
use crate::meta::{sha256_hex, write_toml, InstanceMeta, SourceMeta};
use crate::{auto_gamma, contraction_factor, similarity, start_point, Outcome, PROBE_SEED, START_OFFSET};
use algorithms::Algorithm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
}

impl Figure {
    fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
        }
    }
}

/// Command-line knobs; `None` means the figure's reference setting.
#[derive(Debug, Clone, Default)]
pub struct FigOptions {
    pub seed: u64,
    pub out: PathBuf,
    pub iters: Option<u64>,
    pub trials: Option<usize>,
    pub target_error: Option<f64>,
}

const FIG1_ITERS: u64 = 50_000;
const FIG1_TRIALS: usize = 20;
const FIG1_SPPM_GAMMAS: [f64; 3] = [1e-3, 1e-2, 1e-1];
const FIG2_CAP_ITERS: u64 = 500_000;
const FIG2_TARGET: f64 = 1e-10;
const FIG2_RECORD_EVERY: u64 = 20;
const FIG2_LSVRP_PS: [f64; 4] = [1.0, 0.1, 0.05, 0.005];

pub fn cmd_reproduce(figure: Figure, opts: &FigOptions) -> Result<Outcome> {
    let setup = Setup::build(opts)?;
    match figure {
        Figure::Fig1 => fig1(&setup, opts),
        Figure::Fig2 => fig2(&setup, opts),
    }
}

/// Instance, constants, and output directory shared by both figures.
struct Setup {
    ens: OperatorEnsemble,
    root: Vector,
    x0: Vector,
    mu: f64,
    delta: f64,
    sigma_star_sq: f64,
    ensemble_hash: String,
    spec: problems::SaddleSpec,
}

impl Setup {
    fn build(opts: &FigOptions) -> Result<Self> {
        let spec = problems::SaddleSpec::default_with_seed(opts.seed);
        let ens = problems::generate_saddle_instance(&spec)?;
        let root = ens
            .root_or_compute()
            .context("cannot solve the instance for its root")?;
        let mu = ens.modulus();
        let delta = similarity(&ens, &root, PROBE_SEED)?.used;
        let sigma_star_sq = theory::sigma_star_sq(&ens, &root)?;
        let x0 = start_point(&root);
        let ensemble_hash = sha256_hex(&ens.to_text());
        fs::create_dir_all(&opts.out)
            .with_context(|| format!("cannot create {}", opts.out.display()))?;
        Ok(Setup {
            ens,
            root,
            x0,
            mu,
            delta,
            sigma_star_sq,
            ensemble_hash,
            spec,
        })
    }

    fn gamma_for(&self, algorithm: Algorithm) -> Result<f64> {
        auto_gamma(algorithm, self.mu, self.delta, self.ens.len())
    }

    fn curve_config(
        &self,
        algorithm: Algorithm,
        gamma: f64,
        iters: u64,
        seed: u64,
    ) -> algorithms::RunConfig {
        let mut rc = algorithms::RunConfig::new(gamma, iters, seed, self.x0.clone());
        rc.x_star = Some(self.root.clone());
        rc.mu = Some(self.mu);
        rc.bound = bound_for(
            algorithm,
            gamma,
            self.mu,
            self.delta,
            self.sigma_star_sq,
            self.ens.len(),
        );
        rc
    }
}

#[derive(Debug, Clone, Serialize)]
struct CurveMeta {
    method: String,
    label: String,
    gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contraction_factor: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct FigMeta {
    figure: String,
    seed: u64,
    iterations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_error: Option<f64>,
    record_every: u64,
    start_offset: f64,
    ensemble_sha256: String,
    curves: Vec<CurveMeta>,
}

fn curve_meta(setup: &Setup, algorithm: Algorithm, label: &str, gamma: f64) -> CurveMeta {
    CurveMeta {
        method: algorithm.name().to_string(),
        label: label.to_string(),
        gamma,
        p: match algorithm {
            Algorithm::Lsvrp { p } => Some(p),
            _ => None,
        },
        contraction_factor: contraction_factor(
            algorithm,
            gamma,
            setup.mu,
            setup.delta,
            setup.ens.len(),
        ),
    }
}

fn write_instance_meta(setup: &Setup, out: &Path) -> Result<()> {
    write_toml(
        &out.join("instance.meta.toml"),
        &InstanceMeta::collect(&setup.ens, SourceMeta::generated(&setup.spec)),
    )
}

fn fig1(setup: &Setup, opts: &FigOptions) -> Result<Outcome> {
    if opts.target_error.is_some() {
        bail!("fig1 runs a fixed iteration grid; a target error only applies to fig2");
    }
    let iters = opts.iters.unwrap_or(FIG1_ITERS);
    let trials = opts.trials.unwrap_or(FIG1_TRIALS);
    if trials == 0 || iters == 0 {
        bail!("fig1 needs at least one trial and one iteration");
    }
    let record_every = (iters / 1000).max(1);

    let mut curves: Vec<(Algorithm, f64, String)> = Vec::new();
    for g in FIG1_SPPM_GAMMAS {
        curves.push((Algorithm::Sppm, g, format!("sppm_g{g:e}")));
    }
    let oc = Algorithm::SppmOc;
    curves.push((oc, setup.gamma_for(oc)?, "sppm-oc_gopt".into()));
    let lsvrp = Algorithm::Lsvrp { p: 0.05 };
    curves.push((lsvrp, setup.gamma_for(lsvrp)?, "lsvrp_p0.05_gopt".into()));

    let n = setup.ens.len() as f64;
    let mut combined = csv_writer();
    combined
        .write_record([
            "method",
            "label",
            "k",
            "call_units",
            "mean_sq_error",
            "p10_sq_error",
            "p90_sq_error",
            "bound_value",
        ])
        .context("cannot write the combined header")?;

    let mut metas = Vec::new();
    for (algorithm, gamma, label) in &curves {
        let mut rc = setup.curve_config(*algorithm, *gamma, iters, opts.seed);
        rc.record_every = record_every;
        let stats = algorithms::run_trials(*algorithm, &setup.ens, &rc, trials)?;
        for w in &stats.warnings {
            eprintln!("  warning ({label}): {w}");
        }
        fs::write(opts.out.join(format!("{label}.csv")), stats.to_csv()?)
            .with_context(|| format!("cannot write the {label} curve"))?;
        for row in &stats.rows {
            let call_units = row.mean_member_calls + n * row.mean_full_calls;
            combined
                .write_record([
                    algorithm.name(),
                    label,
                    &row.k.to_string(),
                    &format!("{call_units}"),
                    &format!("{:e}", row.mean_sq_error),
                    &format!("{:e}", row.p10_sq_error),
                    &format!("{:e}", row.p90_sq_error),
                    &row.bound_value.map_or(String::new(), |b| format!("{b:e}")),
                ])
                .context("cannot write a combined row")?;
        }
        let last = stats.rows.last().map_or(f64::NAN, |r| r.mean_sq_error);
        println!("  {label}: gamma {gamma:.4e}, mean final sq_error {last:.6e}");
        metas.push(curve_meta(setup, *algorithm, label, *gamma));
    }

    finish_csv(combined, &opts.out.join("fig1.csv"))?;
    write_instance_meta(setup, &opts.out)?;
    write_toml(
        &opts.out.join("fig1.meta.toml"),
        &FigMeta {
            figure: Figure::Fig1.name().into(),
            seed: opts.seed,
            iterations: iters,
            trials: Some(trials),
            target_error: None,
            record_every,
            start_offset: START_OFFSET,
            ensemble_sha256: setup.ensemble_hash.clone(),
            curves: metas,
        },
    )?;
    println!("wrote {}", opts.out.display());
    Ok(Outcome::Success)
}

fn fig2(setup: &Setup, opts: &FigOptions) -> Result<Outcome> {
    if opts.trials.is_some() {
        bail!("fig2 draws one sample path per method; --trials does not apply");
    }
    let cap = opts.iters.unwrap_or(FIG2_CAP_ITERS);
    let target = opts.target_error.unwrap_or(FIG2_TARGET);
    if !(target.is_finite() && target > 0.0) {
        bail!("target error must be positive and finite, got {target}");
    }
    if cap == 0 {
        bail!("fig2 needs a positive iteration cap");
    }

    let mut curves: Vec<(Algorithm, f64, String)> = Vec::new();
    let oc = Algorithm::SppmOc;
    curves.push((oc, setup.gamma_for(oc)?, "sppm-oc_gopt".into()));
    for p in FIG2_LSVRP_PS {
        let alg = Algorithm::Lsvrp { p };
        curves.push((alg, setup.gamma_for(alg)?, format!("lsvrp_p{p}_gopt")));
    }
    let ps = Algorithm::PointSaga;
    curves.push((ps, setup.gamma_for(ps)?, "point-saga_gopt".into()));

    let n = setup.ens.len() as u64;
    let mut combined = csv_writer();
    combined
        .write_record(["method", "label", "k", "call_units", "sq_error"])
        .context("cannot write the combined header")?;

    let mut metas = Vec::new();
    for (algorithm, gamma, label) in &curves {
        let mut rc = setup.curve_config(*algorithm, *gamma, cap, opts.seed);
        rc.record_every = FIG2_RECORD_EVERY;
        rc.target_error = Some(target);
        let trace = algorithms::run(*algorithm, &setup.ens, &rc)?;
        for w in &trace.warnings {
            eprintln!("  warning ({label}): {w}");
        }
        fs::write(opts.out.join(format!("{label}.csv")), trace.to_csv()?)
            .with_context(|| format!("cannot write the {label} curve"))?;
        for row in &trace.rows {
            let call_units = row.member_calls + n * row.full_calls;
            combined
                .write_record([
                    algorithm.name(),
                    label,
                    &row.k.to_string(),
                    &call_units.to_string(),
                    &format!("{:e}", row.sq_error),
                ])
                .context("cannot write a combined row")?;
        }
        match trace.rows.last() {
            Some(last) if last.sq_error <= target => println!(
                "  {label}: gamma {gamma:.4e}, reached {target:e} at k = {} \
                 with {} call units",
                last.k,
                last.member_calls + n * last.full_calls
            ),
            Some(last) => println!(
                "  {label}: gamma {gamma:.4e}, target {target:e} NOT reached \
                 within {cap} iterations (final sq_error {:.6e})",
                last.sq_error
            ),
            None => {}
        }
        metas.push(curve_meta(setup, *algorithm, label, *gamma));
    }

    finish_csv(combined, &opts.out.join("fig2.csv"))?;
    write_instance_meta(setup, &opts.out)?;
    write_toml(
        &opts.out.join("fig2.meta.toml"),
        &FigMeta {
            figure: Figure::Fig2.name().into(),
            seed: opts.seed,
            iterations: cap,
            trials: None,
            target_error: Some(target),
            record_every: FIG2_RECORD_EVERY,
            start_offset: START_OFFSET,
            ensemble_sha256: setup.ensemble_hash.clone(),
            curves: metas,
        },
    )?;
    println!("wrote {}", opts.out.display());
    Ok(Outcome::Success)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish_csv(writer: csv::Writer<Vec<u8>>, path: &Path) -> Result<()> {
    let bytes = writer
        .into_inner()
        .context("cannot finish the combined CSV")?;
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_labels_follow_the_reference_naming() {
        assert_eq!(format!("sppm_g{:e}", 1e-3), "sppm_g1e-3");
        assert_eq!(format!("sppm_g{:e}", 1e-1), "sppm_g1e-1");
        assert_eq!(format!("lsvrp_p{}_gopt", 0.05), "lsvrp_p0.05_gopt");
        assert_eq!(format!("lsvrp_p{}_gopt", 1.0), "lsvrp_p1_gopt");
    }
}
