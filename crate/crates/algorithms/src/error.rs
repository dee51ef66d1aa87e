use operator_core::OperatorError;

#[derive(Debug, thiserror::Error)]
pub enum AlgorithmError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Operator(#[from] OperatorError),

    /// Point-SAGA Lyapunov values need the per-member shadow points.
    #[error("shadow points are not tracked; enable tracking at initialization")]
    ShadowNotTracked,

    #[error("trace serialization: {0}")]
    Trace(String),
}
