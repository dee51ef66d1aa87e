//! Four stochastic proximal-point iterations over a finite monotone-operator
//! ensemble: the plain method, its online-corrected variant, loopless
//! anchor-based variance reduction, and table-based variance reduction. Step
//! functions are pure transitions over explicit state; a generic driver
//! records error/Lyapunov traces with exact operator-call accounting.

mod counter;
mod error;
mod rng;
mod run;
mod state;
mod step;
mod trace;

pub use counter::CallCounter;
pub use error::AlgorithmError;
pub use rng::SamplerRng;
pub use run::{run, run_trials, run_trials_serial, Algorithm, BoundCurve, RunConfig};
pub use state::{LsvrpState, PointSagaState, SppmOcState, SppmState};
pub use step::{
    lsvrp_apply, lsvrp_step, point_saga_apply, point_saga_step, sppm_apply, sppm_oc_apply,
    sppm_oc_step, sppm_step,
};
pub use trace::{
    read_rows_csv, read_stats_csv, write_rows_csv, write_stats_csv, EnsembleStats, StatsRow,
    Trace, TraceRow, STATS_HEADER, TRACE_HEADER,
};
