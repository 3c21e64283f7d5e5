use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::params::FlowParams;

use super::config::SweepConfig;
use super::single::{execute, Summary};
use super::{io_error, RunnerError};

/// One line of `sweep.csv`. Empty fields mean the quantity is unavailable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha1: f64,
    pub alpha2: f64,
    /// Cell directory, relative to the sweep directory.
    pub dir: String,
    pub status: String,
    pub stop_reason: Option<String>,
    pub omega: Option<f64>,
    pub q: Option<f64>,
    pub final_t: Option<f64>,
    pub final_min_curvature: Option<f64>,
    pub convexity: Option<usize>,
    pub evenness: Option<usize>,
    pub parabolicity: Option<usize>,
    pub stitch: Option<usize>,
    pub volume: Option<usize>,
    pub barrier: Option<usize>,
    pub error: Option<String>,
}

impl SweepRow {
    fn from_summary(alpha1: f64, alpha2: f64, dir: String, s: &Summary) -> Self {
        let c = s.invariants;
        Self {
            alpha1,
            alpha2,
            dir,
            status: s.status.clone(),
            stop_reason: s.stop_reason.map(|r| r.as_str().to_owned()),
            omega: s.extinction.omega,
            q: s.extinction.q,
            final_t: Some(s.final_time),
            final_min_curvature: s.final_min_curvature,
            convexity: Some(c.convexity),
            evenness: Some(c.evenness),
            parabolicity: Some(c.parabolicity),
            stitch: Some(c.stitch),
            volume: Some(c.volume),
            barrier: Some(c.barrier),
            error: s.error.clone(),
        }
    }

    fn failed(alpha1: f64, alpha2: f64, dir: String, error: String) -> Self {
        Self {
            alpha1,
            alpha2,
            dir,
            status: "failed".into(),
            stop_reason: None,
            omega: None,
            q: None,
            final_t: None,
            final_min_curvature: None,
            convexity: None,
            evenness: None,
            parabolicity: None,
            stitch: None,
            volume: None,
            barrier: None,
            error: Some(error),
        }
    }
}

fn cell_dir(alpha1: f64, alpha2: f64) -> String {
    format!("a1_{alpha1}_a2_{alpha2}")
}

/// Runs every cell in its own directory under `cfg.out` on `cfg.jobs`
/// threads and writes `sweep.csv`, sorted by `(α1, α2)`. Failing cells are
/// recorded in the table and do not stop the others.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, RunnerError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out).map_err(io_error(format!("creating {}", cfg.out.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| RunnerError::InvalidConfig {
            field: "jobs".into(),
            message: e.to_string(),
        })?;
    let cells = cfg.cells();
    let rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(a1, a2)| {
                let dir = cell_dir(a1, a2);
                let mut run = cfg.template.clone();
                run.out = cfg.out.join(&dir);
                let outcome = FlowParams::new(a1, a2)
                    .map_err(RunnerError::from)
                    .and_then(|p| {
                        run.params = p;
                        execute(&run)
                    });
                match outcome {
                    Ok((summary, _)) => SweepRow::from_summary(a1, a2, dir, &summary),
                    Err(e) => SweepRow::failed(a1, a2, dir, e.to_string()),
                }
            })
            .collect()
    });
    write_table(&cfg.out.join("sweep.csv"), &rows)?;
    Ok(rows)
}

fn write_table(path: &Path, rows: &[SweepRow]) -> Result<(), RunnerError> {
    let context = format!("writing {}", path.display());
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(context.clone())(e.into()))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_error(context.clone())(e.into()))?;
    }
    w.flush().map_err(io_error(context))
}
