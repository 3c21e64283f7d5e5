use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::params::FlowParams;
use crate::profile::ProfileCurve;

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Diameter,
    Volume,
    TMax,
    /// The shrinking interval could no longer hold the minimum node count.
    GridExhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Diameter => "diameter",
            StopReason::Volume => "volume",
            StopReason::TMax => "t_max",
            StopReason::GridExhausted => "grid_exhausted",
        }
    }
}

/// Observables of one state. Curvature extrema range over the graph nodes
/// above the overlap and all evolved chart nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub volume: f64,
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
    pub evenness: f64,
    /// Smallest linearized diffusion coefficient.
    pub parabolicity: f64,
    /// `max |κ_rad/κ_axi − 1|`.
    pub umbilic_defect: f64,
    pub stitch: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: FlowParams,
    pub records: Vec<Record>,
    pub snapshots: Vec<ProfileCurve>,
    pub stop: Option<StopReason>,
    pub steps: usize,
    pub regrids: usize,
}

impl Trajectory {
    pub fn new(params: FlowParams) -> Self {
        Self {
            params,
            records: Vec::new(),
            snapshots: Vec::new(),
            stop: None,
            steps: 0,
            regrids: 0,
        }
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    /// Time of the last record.
    pub fn final_time(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{source} (after {} steps, t = {})", trajectory.steps, trajectory.final_time())]
pub struct RunError {
    pub source: Error,
    pub trajectory: Box<Trajectory>,
}
