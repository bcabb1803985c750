//! SG, RSG, DA_p, RSG-DA_p, R²SG and the decreasing-step baseline.

mod baseline;
mod dap;
mod doubling;
mod schedule;
mod sg;
mod trace;

pub use baseline::baseline_sg_decreasing;
pub use dap::{dap_run, pnorm_prox, rsg_dap, rsg_dap_initial_step};
pub use doubling::r2sg;
pub use schedule::{compute_inner_iters, compute_stage_count, DoublingConfig, LambdaMode, RestartConfig};
pub use sg::{rsg, rsg_initial_step, sg_run};
pub use trace::{SolveTrace, StageSummary, Stride, TraceOptions, TraceRecord};

/// Returned point together with the run's trace.
#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub point: Vec<f64>,
    pub trace: SolveTrace,
}
