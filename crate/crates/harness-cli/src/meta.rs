//! Metadata sidecars: every artifact directory records what instance it was
//! built from (spec or file, constants, solution, content hash) and how
//! each run was configured, as plain TOML next to the CSVs. Nothing here is
//! time-dependent, so reruns with the same inputs produce byte-identical
//! sidecars.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use operator_core::OperatorEnsemble;
use problems::SaddleSpec;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceMeta {
    Generated {
        n: usize,
        d_y: usize,
        d_z: usize,
        seed: u64,
        eig_base: f64,
        normal_mean: f64,
        normal_var: f64,
    },
    File {
        path: String,
    },
}

impl SourceMeta {
    pub fn generated(spec: &SaddleSpec) -> Self {
        SourceMeta::Generated {
            n: spec.n,
            d_y: spec.d_y,
            d_z: spec.d_z,
            seed: spec.seed,
            eig_base: spec.eig_base,
            normal_mean: spec.normal_mean,
            normal_var: spec.normal_var,
        }
    }

    pub fn file(path: &Path) -> Self {
        SourceMeta::File {
            path: path.display().to_string(),
        }
    }
}

/// Sidecar for an instance: provenance, basic constants, the solution, and
/// the SHA-256 of the canonical ensemble serialization.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceMeta {
    pub members: usize,
    pub dimension: usize,
    pub mu: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_spectral: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_star_sq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<Vec<f64>>,
    pub ensemble_sha256: String,
    pub source: SourceMeta,
}

impl InstanceMeta {
    pub fn collect(ens: &OperatorEnsemble, source: SourceMeta) -> Self {
        let root = ens.root_or_compute().ok();
        let sigma_star_sq = root
            .as_ref()
            .and_then(|r| theory::sigma_star_sq(ens, r).ok());
        InstanceMeta {
            members: ens.len(),
            dimension: ens.dim(),
            mu: ens.modulus(),
            lipschitz: ens.lipschitz_constant(),
            delta_spectral: theory::estimate_delta_spectral(ens).ok(),
            sigma_star_sq,
            root: root.map(|r| r.iter().copied().collect()),
            ensemble_sha256: sha256_hex(&ens.to_text()),
            source,
        }
    }
}

/// Sidecar for one run output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub algorithm: String,
    pub label: String,
    /// What the config asked for: a number or "auto".
    pub requested_gamma: String,
    /// What actually ran.
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub iterations: u64,
    pub trials: usize,
    pub base_seed: u64,
    pub record_every: u64,
    /// Start point rule: `x* + start_offset * ones`.
    pub start_offset: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_error: Option<f64>,
    /// Rate-theory contraction factor at the stepsize that ran, when < 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction_factor: Option<f64>,
    /// Binds the run to its instance sidecar.
    pub ensemble_sha256: String,
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string_pretty(value).context("cannot serialize metadata")?;
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_hex() {
        let h = sha256_hex("abc");
        assert_eq!(
            h,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn instance_meta_serializes_to_toml() {
        let ens = problems::tightness_pair(1.0, 0.0);
        let meta = InstanceMeta::collect(&ens, SourceMeta::file(Path::new("x.txt")));
        let text = toml::to_string_pretty(&meta).unwrap();
        assert!(text.contains("members = 2"));
        assert!(text.contains("kind = \"file\""));
        assert!(text.contains("ensemble_sha256"));
        // Both members share the linear part mu*I, so the spectral
        // similarity estimate is exactly zero; the noise level is not.
        assert!(text.contains("delta_spectral = 0.0"));
        assert!(text.contains("sigma_star_sq = 1.0"));
    }
}
