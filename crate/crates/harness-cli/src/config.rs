//! The experiment configuration document and its resolution into runnable
//! pieces. One TOML file describes the problem (a file path or an inline
//! generator spec), the algorithm list, and the run budget; unknown keys are
//! rejected so typos fail loudly instead of silently running defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use operator_core::OperatorEnsemble;
use problems::{generate_saddle_instance, SaddleSpec};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer};

use crate::meta::SourceMeta;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSource,
    /// `[[algorithms]]` tables; may be empty for commands that only need
    /// the problem (generate, estimate, verify).
    #[serde(default)]
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_iterations")]
    pub iterations: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Base seed; trial `t` runs with seed `seeds + t`.
    #[serde(default)]
    pub seeds: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub target_error: Option<f64>,
}

fn default_iterations() -> u64 {
    1000
}

fn default_trials() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Parses the file and remembers its directory so a relative problem
    /// path resolves against the config location, not the working dir.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: ExperimentConfig = toml::from_str(&text).map_err(|e| {
            let mut msg = format!("config {} is not valid: {e}", path.display());
            if e.to_string().contains("ProblemSource") {
                // The untagged-enum error hides the real cause; the usual
                // one is TOML key placement.
                msg.push_str(
                    "\nhint: [problem] takes either `path = \"...\"` or generator \
                     fields (n, d_y, d_z, seed, eig_base, normal_mean, normal_var); \
                     top-level settings (iterations, trials, seeds, output_dir, \
                     target_error) must appear before the [problem] table",
                );
            }
            anyhow::anyhow!(msg)
        })?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok((config, base))
    }
}

/// Where the problem comes from: `{ path = "..." }` loads a serialized
/// ensemble, any other table is an inline generator spec (all fields
/// optional, defaulting to the reference scale).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProblemSource {
    File(FileProblem),
    Spec(SpecProblem),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileProblem {
    pub path: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecProblem {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_d_y")]
    pub d_y: usize,
    #[serde(default = "default_d_z")]
    pub d_z: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eig_base")]
    pub eig_base: f64,
    #[serde(default = "default_normal_mean")]
    pub normal_mean: f64,
    #[serde(default = "default_normal_var")]
    pub normal_var: f64,
}

fn default_n() -> usize {
    200
}

fn default_d_y() -> usize {
    3
}

fn default_d_z() -> usize {
    4
}

fn default_eig_base() -> f64 {
    10.0
}

fn default_normal_mean() -> f64 {
    1.0
}

fn default_normal_var() -> f64 {
    5.0
}

impl Default for SpecProblem {
    fn default() -> Self {
        Self {
            n: default_n(),
            d_y: default_d_y(),
            d_z: default_d_z(),
            seed: 0,
            eig_base: default_eig_base(),
            normal_mean: default_normal_mean(),
            normal_var: default_normal_var(),
        }
    }
}

impl SpecProblem {
    pub fn to_saddle_spec(&self) -> SaddleSpec {
        SaddleSpec {
            n: self.n,
            d_y: self.d_y,
            d_z: self.d_z,
            seed: self.seed,
            eig_base: self.eig_base,
            normal_mean: self.normal_mean,
            normal_var: self.normal_var,
        }
    }
}

/// One `[[algorithms]]` entry: a method name, a stepsize (number or
/// `"auto"` for the theory-optimal choice), and the coin probability for
/// the anchor method.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: String,
    #[serde(default)]
    pub gamma: GammaSpec,
    #[serde(default)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GammaSpec {
    #[default]
    Auto,
    Fixed(f64),
}

impl GammaSpec {
    pub fn describe(&self) -> String {
        match self {
            GammaSpec::Auto => "auto".to_string(),
            GammaSpec::Fixed(g) => g.to_string(),
        }
    }
}

impl<'de> Deserialize<'de> for GammaSpec {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(g) => Ok(GammaSpec::Fixed(g)),
            Raw::Text(s) if s == "auto" => Ok(GammaSpec::Auto),
            Raw::Text(s) => Err(D::Error::custom(format!(
                "gamma must be a number or \"auto\", got `{s}`"
            ))),
        }
    }
}

impl AlgorithmSpec {
    /// Maps the entry onto an algorithm, enforcing that `p` appears exactly
    /// when the method uses a coin.
    pub fn to_algorithm(&self) -> Result<algorithms::Algorithm> {
        use algorithms::Algorithm;
        match self.name.as_str() {
            "lsvrp" => {
                let p = self.p.ok_or_else(|| {
                    anyhow::anyhow!("algorithm `lsvrp` needs an explicit coin probability `p`")
                })?;
                if !(p > 0.0 && p <= 1.0) {
                    bail!("coin probability {p} outside (0, 1]");
                }
                Ok(Algorithm::Lsvrp { p })
            }
            name => {
                if self.p.is_some() {
                    bail!("`p` only applies to `lsvrp`, not `{name}`");
                }
                match name {
                    "sppm" => Ok(Algorithm::Sppm),
                    "sppm-oc" => Ok(Algorithm::SppmOc),
                    "point-saga" => Ok(Algorithm::PointSaga),
                    other => bail!(
                        "unknown algorithm `{other}` (expected sppm, sppm-oc, lsvrp, point-saga)"
                    ),
                }
            }
        }
    }
}

/// A problem together with where it came from, for metadata sidecars.
pub struct LoadedProblem {
    pub ensemble: OperatorEnsemble,
    pub source: SourceMeta,
}

/// The problem for commands that can run without a config file: an explicit
/// config wins, otherwise the reference-scale generator spec. `seed`
/// overrides the generator seed; it has no effect on file problems.
pub fn problem_from_config_or_default(
    config: Option<&Path>,
    seed: Option<u64>,
) -> Result<LoadedProblem> {
    match config {
        Some(path) => {
            let (cfg, base) = ExperimentConfig::load(path)?;
            let mut source = cfg.problem;
            if let (Some(s), ProblemSource::Spec(sp)) = (seed, &mut source) {
                sp.seed = s;
            }
            load_problem(&source, &base)
        }
        None => {
            let mut sp = SpecProblem::default();
            if let Some(s) = seed {
                sp.seed = s;
            }
            load_problem(&ProblemSource::Spec(sp), Path::new("."))
        }
    }
}

pub fn load_problem(source: &ProblemSource, base_dir: &Path) -> Result<LoadedProblem> {
    match source {
        ProblemSource::File(file) => {
            let path = if file.path.is_absolute() {
                file.path.clone()
            } else {
                base_dir.join(&file.path)
            };
            let text = fs::read_to_string(&path)
                .with_context(|| format!("cannot read problem file {}", path.display()))?;
            let ensemble = OperatorEnsemble::from_text(&text)
                .with_context(|| format!("problem file {} is not valid", path.display()))?;
            Ok(LoadedProblem {
                ensemble,
                source: SourceMeta::file(&path),
            })
        }
        ProblemSource::Spec(spec) => {
            let spec = spec.to_saddle_spec();
            let ensemble = generate_saddle_instance(&spec)?;
            Ok(LoadedProblem {
                ensemble,
                source: SourceMeta::generated(&spec),
            })
        }
    }
}
