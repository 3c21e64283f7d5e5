//! Explicit time stepping of the composite graph/pole-chart state.

mod extinction;
mod run;
mod state;
mod trajectory;

pub use extinction::{estimate_extinction, MIN_TAIL};
pub use run::{run, run_with, RunOptions, StopCriteria};
pub use state::{FlowState, GridTarget, DEFAULT_STITCH_TOLERANCE, MIN_NODES};
pub use trajectory::{Record, RunError, StopReason, Trajectory};

/// Smallest linearized diffusion coefficient of the state.
pub fn parabolicity_monitor(state: &FlowState) -> f64 {
    state.parabolicity()
}
