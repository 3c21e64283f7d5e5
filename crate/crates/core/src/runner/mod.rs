//! Configuration, execution and persistence of experiments.
//!
//! A run writes three files into its output directory: `series.csv` with
//! one row per trajectory record, `snapshots.jsonl` with one profile and
//! its rescaled form per line, and `summary.json`. A sweep runs one such
//! directory per `(α1, α2)` cell and aggregates them into `sweep.csv`.

use std::path::PathBuf;

mod artifacts;
mod config;
mod export;
mod invariants;
mod single;
mod sweep;

pub use artifacts::{load_profile, read_snapshots, SeriesRow, SnapshotLine, SERIES_COLUMNS};
pub use config::{
    InitialShape, RunConfig, SnapshotConfig, SolverConfig, StopConfig, SweepConfig, Tolerances, MIN_CONFIG_NODES,
};
pub use export::{export_plotdata, PLOT_FILES};
pub use invariants::{check_invariants, Check, InvariantReport};
pub use single::{run_single, Extinction, InvariantCounters, Summary};
pub use sweep::{run_sweep, SweepRow};

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "AXIFLOW_OUT";

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("invalid configuration: {field}: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("missing artifacts in {}: {}", dir.display(), missing.join(", "))]
    MissingArtifacts { dir: PathBuf, missing: Vec<String> },

    #[error(transparent)]
    Model(#[from] crate::Error),

    /// The solver failed; whatever it recorded was written before returning.
    #[error("run failed: {0}")]
    Run(#[from] crate::solver::RunError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

pub(crate) fn io_error(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> RunnerError {
    let context = context.into();
    move |source| RunnerError::Io { context, source }
}
