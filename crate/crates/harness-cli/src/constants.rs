//! `estimate`: measure the constants of a problem instance and report the
//! stepsize tuning they imply for every method.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use theory::RateReport;

use crate::config::problem_from_config_or_default;
use crate::{similarity, Outcome, Similarity, PROBE_SEED};

pub fn cmd_estimate(
    config: Option<&Path>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<Outcome> {
    let loaded = problem_from_config_or_default(config, seed)?;
    let ens = loaded.ensemble;
    let root = ens
        .root_or_compute()
        .context("cannot solve the instance for its root")?;
    let text = render(&ens, &root)?;
    print!("{text}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let path = dir.join("constants.txt");
        fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(Outcome::Success)
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.10e}"),
        None => "n/a".into(),
    }
}

/// Builds the report text: an instance block of `key = value` lines (so it
/// greps and parses cleanly) plus, when the modulus allows it, the
/// per-method tuning table.
pub fn render(ens: &operator_core::OperatorEnsemble, root: &operator_core::Vector) -> Result<String> {
    let sim = similarity(ens, root, PROBE_SEED)?;
    let sigma_star_sq =
        theory::sigma_star_sq(ens, root).context("stationary noise estimate failed")?;
    let mu = ens.modulus();

    let mut s = String::new();
    let _ = writeln!(s, "instance");
    let _ = writeln!(s, "  members         = {}", ens.len());
    let _ = writeln!(s, "  dimension       = {}", ens.dim());
    let _ = writeln!(s, "  mu              = {mu:.10e}");
    let _ = writeln!(s, "  lipschitz       = {}", fmt_opt(ens.lipschitz_constant()));
    let _ = writeln!(s, "  delta_spectral  = {}", fmt_opt(sim.spectral));
    let _ = writeln!(s, "  delta_empirical = {:.10e}", sim.empirical);
    let _ = writeln!(
        s,
        "  delta_used      = {:.10e}  ({})",
        sim.used,
        if sim.spectral.is_some() {
            "spectral"
        } else {
            "empirical"
        }
    );
    let _ = writeln!(s, "  sigma_star_sq   = {sigma_star_sq:.10e}");
    let _ = writeln!(s);

    if mu > 0.0 {
        append_rate_table(&mut s, ens, &sim, mu)?;
    } else {
        let _ = writeln!(
            s,
            "method tunings: not reported — the rate theory needs a positive \
             strong-monotonicity modulus and this instance has mu = 0"
        );
    }
    Ok(s)
}

fn append_rate_table(
    s: &mut String,
    ens: &operator_core::OperatorEnsemble,
    sim: &Similarity,
    mu: f64,
) -> Result<()> {
    let n = ens.len();
    let p = 1.0 / n as f64;
    let rows: [(&str, RateReport); 3] = [
        ("sppm-oc", theory::sppm_oc_rate(None, mu, sim.used)?),
        ("lsvrp", theory::lsvrp_rate(None, mu, sim.used, p)?),
        ("point-saga", theory::point_saga_rate(None, mu, sim.used, n)?),
    ];
    let _ = writeln!(
        s,
        "method tunings at delta_used (lsvrp p = {p:.10e}; complexity is the\nleading constant of iterations per log(1/error))"
    );
    let _ = writeln!(
        s,
        "  sppm        any gamma > 0 contracts to a gamma-dependent neighborhood; \
         no finite optimum"
    );
    for (name, r) in rows {
        if r.optimal_gamma.is_infinite() {
            let _ = writeln!(s, "  {name:<11} optimal gamma unbounded; any gamma contracts");
        } else {
            let _ = writeln!(
                s,
                "  {name:<11} gamma = {:.10e}  factor = {:.10e}  complexity = {:.4e}",
                r.optimal_gamma, r.contraction_factor, r.iteration_complexity_constant
            );
        }
    }
    Ok(())
}
