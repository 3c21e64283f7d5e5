use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::profile::{evenness_defect, squared_integral};
use crate::rescale::rescale;

use super::artifacts::{read_snapshots, SeriesRow};
use super::config::{read_json, Tolerances};
use super::single::Summary;
use super::{io_error, RunnerError};

/// Tolerance on the rescaled volume.
const RESCALED_VOLUME_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub checks: Vec<Check>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, failures: usize, total: usize, worst: impl std::fmt::Display) -> Check {
    Check {
        name,
        passed: failures == 0,
        detail: format!("{failures} of {total} violate; worst {worst}"),
    }
}

/// Re-derives the invariants of a finished run from its artifacts.
pub fn check_invariants(dir: &Path) -> Result<InvariantReport, RunnerError> {
    let absent: Vec<String> = ["series.csv", "snapshots.jsonl"]
        .into_iter()
        .filter(|f| !dir.join(f).is_file())
        .map(String::from)
        .collect();
    if !absent.is_empty() {
        return Err(RunnerError::MissingArtifacts {
            dir: dir.to_path_buf(),
            missing: absent,
        });
    }
    let summary_path = dir.join("summary.json");
    let summary: Option<Summary> = if summary_path.is_file() {
        Some(read_json(&summary_path)?)
    } else {
        None
    };
    let tol = summary
        .as_ref()
        .map_or_else(Tolerances::default, |s| s.config.tolerances.clone());

    let series = dir.join("series.csv");
    let rows: Vec<SeriesRow> = csv::Reader::from_path(&series)
        .and_then(|mut r| r.deserialize().collect())
        .map_err(|e| io_error(format!("reading {}", series.display()))(e.into()))?;
    let snapshots = read_snapshots(&dir.join("snapshots.jsonl"))?;

    let mut checks = Vec::new();

    let shrinking = rows.windows(2).filter(|w| !(w[1].volume < w[0].volume)).count();
    checks.push(check("volume_decreasing", shrinking, rows.len().saturating_sub(1), ""));

    let kmin = |r: &SeriesRow| r.kr_min.min(r.ka_min);
    let concave = rows.iter().filter(|r| !(kmin(r) > 0.0)).count();
    let worst = rows.iter().map(kmin).fold(f64::INFINITY, f64::min);
    checks.push(check("convexity", concave, rows.len(), format!("min curvature {worst:e}")));

    let curves = snapshots.iter().map(|s| s.curve()).collect::<crate::Result<Vec<_>>>()?;
    let defects: Vec<f64> = curves.iter().map(evenness_defect).collect();
    let worst = defects.iter().copied().fold(0.0, f64::max);
    let uneven = defects.iter().filter(|&&d| d > tol.symmetry).count();
    checks.push(check("evenness", uneven, defects.len(), format!("defect {worst:e}")));

    let mut volume_bad = 0;
    let mut volume_worst = 0.0_f64;
    let mut interval_bad = 0;
    let mut drift_bad = 0;
    let mut drift_worst = 0.0_f64;
    for ((s, curve), defect) in snapshots.iter().zip(&curves).zip(&defects) {
        let (Some(y), Some(u), Some(c), Some(d)) = (&s.rescaled_nodes, &s.rescaled_values, s.c, s.d) else {
            continue;
        };
        let err = (PI * squared_integral(y, u) - PI).abs();
        volume_worst = volume_worst.max(err);
        volume_bad += usize::from(!(err <= RESCALED_VOLUME_TOLERANCE));
        let even = *defect <= tol.symmetry && (s.p - curve.midpoint()).abs() <= 1e-13 * curve.width();
        interval_bad += usize::from(even && (c, d) != (-0.5, 0.5));
        let again = rescale(curve, s.p)?;
        let drift = again
            .ynodes
            .iter()
            .zip(y)
            .chain(again.uvalues.iter().zip(u))
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max);
        drift_worst = drift_worst.max(drift);
        drift_bad += usize::from(drift > 1e-10);
    }
    let n = snapshots.len();
    checks.push(check("rescaled_volume", volume_bad, n, format!("error {volume_worst:e}")));
    checks.push(check("rescaled_interval", interval_bad, n, ""));
    checks.push(check("round_trip", drift_bad, n, format!("relative {drift_worst:e}")));

    if let Some(s) = &summary {
        let total = s.invariants.total();
        checks.push(Check {
            name: "run_counters",
            passed: total == 0 && s.status == "ok",
            detail: format!("status {}, {total} counted violations {:?}", s.status, s.invariants),
        });
    }
    Ok(InvariantReport { checks })
}
