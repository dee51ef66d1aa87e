//! Seeded, deterministic builders for the benchmark problems: randomized
//! quadratic saddle ensembles with prescribed spectra, a two-member scalar
//! example with set-valued members and known similarity constant, and the
//! shifted-scaling family whose plain-method bound is tight.

mod saddle;
mod scalar_pair;
mod tightness;

pub use saddle::{generate_saddle_instance, random_matrix_with_spectrum, SaddleSpec};
pub use scalar_pair::build_scalar_pair;
pub use tightness::{build_tightness_instance, tightness_pair};

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Operator(#[from] operator_core::OperatorError),
}
