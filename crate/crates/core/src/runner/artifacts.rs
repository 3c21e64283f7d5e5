use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::profile::ProfileCurve;
use crate::rescale::rescale;
use crate::solver::Record;

use super::{io_error, RunnerError};

/// Header of `series.csv`, in order.
pub const SERIES_COLUMNS: [&str; 13] = [
    "t", "V", "diam", "kr_min", "kr_max", "ka_min", "ka_max", "speed_max", "a", "b", "u_max", "uxx_min", "uxx_max",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    #[serde(rename = "V")]
    pub volume: f64,
    #[serde(rename = "diam")]
    pub diameter: f64,
    pub kr_min: f64,
    pub kr_max: f64,
    pub ka_min: f64,
    pub ka_max: f64,
    pub speed_max: f64,
    pub a: f64,
    pub b: f64,
    pub u_max: f64,
    pub uxx_min: f64,
    pub uxx_max: f64,
}

impl From<&Record> for SeriesRow {
    fn from(r: &Record) -> Self {
        Self {
            t: r.t,
            volume: r.volume,
            diameter: r.diameter,
            kr_min: r.kr_min,
            kr_max: r.kr_max,
            ka_min: r.ka_min,
            ka_max: r.ka_max,
            speed_max: r.speed_max,
            a: r.a,
            b: r.b,
            u_max: r.u_max,
            uxx_min: r.uxx_min,
            uxx_max: r.uxx_max,
        }
    }
}

/// One line of `snapshots.jsonl`. The rescaled fields are `null` when the
/// profile could not be rescaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotLine {
    pub t: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub p: f64,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub rescaled_nodes: Option<Vec<f64>>,
    pub rescaled_values: Option<Vec<f64>>,
}

impl SnapshotLine {
    pub fn new(curve: &ProfileCurve, p: f64) -> Self {
        let r = rescale(curve, p).ok();
        Self {
            t: curve.t(),
            nodes: curve.nodes().to_vec(),
            values: curve.values().to_vec(),
            p,
            c: r.as_ref().map(|r| r.c),
            d: r.as_ref().map(|r| r.d),
            rescaled_nodes: r.as_ref().map(|r| r.ynodes.clone()),
            rescaled_values: r.map(|r| r.uvalues),
        }
    }

    pub fn curve(&self) -> crate::Result<ProfileCurve> {
        ProfileCurve::new(self.t, self.nodes.clone(), self.values.clone())
    }
}

pub(crate) fn write_series(path: &Path, records: &[Record]) -> Result<(), RunnerError> {
    let context = format!("writing {}", path.display());
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(context.clone())(e.into()))?;
    for r in records {
        w.serialize(SeriesRow::from(r))
            .map_err(|e| io_error(context.clone())(e.into()))?;
    }
    if records.is_empty() {
        w.write_record(SERIES_COLUMNS)
            .map_err(|e| io_error(context.clone())(e.into()))?;
    }
    w.flush().map_err(io_error(context))
}

pub(crate) fn write_snapshots(path: &Path, snapshots: &[ProfileCurve], p: f64) -> Result<(), RunnerError> {
    let context = format!("writing {}", path.display());
    let mut w = BufWriter::new(File::create(path).map_err(io_error(context.clone()))?);
    for curve in snapshots {
        let line = serde_json::to_string(&SnapshotLine::new(curve, p)).expect("snapshot serializes");
        writeln!(w, "{line}").map_err(io_error(context.clone()))?;
    }
    w.flush().map_err(io_error(context))
}

pub fn read_snapshots(path: &Path) -> Result<Vec<SnapshotLine>, RunnerError> {
    let file = File::open(path).map_err(io_error(format!("reading {}", path.display())))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(k, line)| {
            let line = line.map_err(io_error(format!("reading {}", path.display())))?;
            serde_json::from_str(&line).map_err(|e| RunnerError::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", k + 1),
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct ProfileFile {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

/// Reads a profile from a JSON object with `nodes` and `values`; other
/// fields are ignored, so any line of `snapshots.jsonl` qualifies. With
/// several non-empty lines, line `line` (from zero) is used. The profile is
/// stamped with time zero.
pub fn load_profile(path: &Path, line: usize) -> Result<ProfileCurve, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(io_error(format!("reading {}", path.display())))?;
    let parse = |s: &str| {
        serde_json::from_str::<ProfileFile>(s).map_err(|e| RunnerError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    };
    let file = match parse(&text) {
        Ok(f) if line == 0 => f,
        whole => {
            let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
            if lines.len() <= 1 {
                whole?;
                return Err(RunnerError::Parse {
                    path: path.to_path_buf(),
                    message: format!("line {line} requested from a single profile"),
                });
            }
            let chosen = lines.get(line).ok_or_else(|| RunnerError::Parse {
                path: path.to_path_buf(),
                message: format!("line {line} requested but the file has {} profiles", lines.len()),
            })?;
            parse(chosen)?
        }
    };
    Ok(ProfileCurve::new(0.0, file.nodes, file.values)?)
}
