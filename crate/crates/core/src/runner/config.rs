use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::params::FlowParams;
use crate::solver::RunOptions;

use super::RunnerError;

/// Smallest accepted node count.
pub const MIN_CONFIG_NODES: usize = 50;

/// Body the run starts from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialShape {
    Sphere {
        radius: f64,
        #[serde(default)]
        center: f64,
    },
    Spheroid {
        /// Semi-axis along the axis of symmetry.
        axial: f64,
        /// Equatorial radius.
        equatorial: f64,
        #[serde(default)]
        center: f64,
    },
    /// A JSON object with `nodes` and `values`, or a JSON-lines file of such
    /// objects from which line `line` is taken.
    Profile {
        path: PathBuf,
        #[serde(default)]
        line: usize,
    },
}

/// Stop thresholds; `null` picks the default derived from the initial body.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopConfig {
    pub diameter_floor: Option<f64>,
    pub volume_floor: Option<f64>,
    pub t_max: Option<f64>,
}

/// When profiles are stored. Without explicit `times`, `count` equally
/// spaced times cover `[0, horizon·T]`, with `T` the extinction time of the
/// largest concentric sphere inside the initial body (a lower bound on the
/// extinction time of the body).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnapshotConfig {
    pub count: usize,
    pub horizon: f64,
    pub times: Option<Vec<f64>>,
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        Self {
            count: 5,
            horizon: 0.95,
            times: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted disagreement of the charts on their overlap.
    pub stitch: f64,
    /// Largest accepted evenness defect.
    pub symmetry: f64,
    /// Principal curvatures must stay above this.
    pub convexity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            stitch: crate::solver::DEFAULT_STITCH_TOLERANCE,
            symmetry: 1e-10,
            convexity: 1e-12,
        }
    }
}

/// Cadences of the integrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub record_every: usize,
    pub regrid_every: usize,
    pub regrid_shrink: f64,
    pub stitch_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = RunOptions::default();
        Self {
            record_every: o.record_every,
            regrid_every: o.regrid_every,
            regrid_shrink: o.regrid_shrink,
            stitch_every: o.stitch_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: FlowParams,
    pub initial: InitialShape,
    pub nodes: usize,
    pub cfl: f64,
    pub stop: StopConfig,
    pub snapshots: SnapshotConfig,
    pub tolerances: Tolerances,
    /// Reject initial profiles whose evenness defect exceeds
    /// `tolerances.symmetry`.
    pub assert_even: bool,
    pub solver: SolverConfig,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: FlowParams::new(1.0, 1.0).expect("valid default"),
            initial: InitialShape::Sphere {
                radius: 1.0,
                center: 0.0,
            },
            nodes: 400,
            cfl: RunOptions::default().cfl,
            stop: StopConfig::default(),
            snapshots: SnapshotConfig::default(),
            tolerances: Tolerances::default(),
            assert_even: true,
            solver: SolverConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> RunnerError {
    RunnerError::InvalidConfig {
        field: field.into(),
        message: message.into(),
    }
}

fn positive(field: &str, value: f64) -> Result<(), RunnerError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive, got {value}")))
    }
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunnerError::Io {
        context: format!("reading {}", path.display()),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| RunnerError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, RunnerError> {
        let cfg: Self = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        if self.nodes < MIN_CONFIG_NODES {
            return Err(invalid(
                "nodes",
                format!("must be at least {MIN_CONFIG_NODES}, got {}", self.nodes),
            ));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(invalid("cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        match &self.initial {
            InitialShape::Sphere { radius, center } => {
                positive("initial.radius", *radius)?;
                if !center.is_finite() {
                    return Err(invalid("initial.center", "must be finite"));
                }
            }
            InitialShape::Spheroid {
                axial,
                equatorial,
                center,
            } => {
                positive("initial.axial", *axial)?;
                positive("initial.equatorial", *equatorial)?;
                if !center.is_finite() {
                    return Err(invalid("initial.center", "must be finite"));
                }
            }
            InitialShape::Profile { .. } => {}
        }
        for (field, value) in [
            ("stop.diameter_floor", self.stop.diameter_floor),
            ("stop.volume_floor", self.stop.volume_floor),
        ] {
            if let Some(v) = value {
                positive(field, v)?;
            }
        }
        if let Some(t) = self.stop.t_max {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid("stop.t_max", format!("must be nonnegative, got {t}")));
            }
        }
        if !(self.snapshots.horizon > 0.0 && self.snapshots.horizon <= 1.0) {
            return Err(invalid(
                "snapshots.horizon",
                format!("must lie in (0, 1], got {}", self.snapshots.horizon),
            ));
        }
        if let Some(times) = &self.snapshots.times {
            if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
                return Err(invalid("snapshots.times", format!("{t} is not a nonnegative time")));
            }
        }
        positive("tolerances.stitch", self.tolerances.stitch)?;
        positive("tolerances.symmetry", self.tolerances.symmetry)?;
        positive("tolerances.convexity", self.tolerances.convexity)?;
        let s = &self.solver;
        for (field, value) in [
            ("solver.record_every", s.record_every),
            ("solver.regrid_every", s.regrid_every),
            ("solver.stitch_every", s.stitch_every),
        ] {
            if value == 0 {
                return Err(invalid(field, "must be positive"));
            }
        }
        if !(s.regrid_shrink > 0.0 && s.regrid_shrink < 1.0) {
            return Err(invalid(
                "solver.regrid_shrink",
                format!("must lie in (0, 1), got {}", s.regrid_shrink),
            ));
        }
        Ok(())
    }

    pub(crate) fn run_options(&self, snapshot_times: Vec<f64>) -> RunOptions {
        RunOptions {
            cfl: self.cfl,
            record_every: self.solver.record_every,
            snapshot_times,
            regrid_every: self.solver.regrid_every,
            regrid_shrink: self.solver.regrid_shrink,
            stitch_tolerance: self.tolerances.stitch,
            stitch_every: self.solver.stitch_every,
            ..RunOptions::default()
        }
    }
}

/// A grid of exponents run against one template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    /// Settings shared by every cell; its `params` and `out` are replaced.
    pub template: RunConfig,
    pub jobs: usize,
    pub out: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alpha1: Vec::new(),
            alpha2: Vec::new(),
            template: RunConfig::default(),
            jobs: 1,
            out: PathBuf::from("sweep"),
        }
    }
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self, RunnerError> {
        let cfg: Self = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        for (field, grid) in [("alpha1", &self.alpha1), ("alpha2", &self.alpha2)] {
            if grid.is_empty() {
                return Err(invalid(field, "grid is empty"));
            }
            for &a in grid {
                positive(field, a)?;
            }
        }
        if self.jobs == 0 {
            return Err(invalid("jobs", "must be positive"));
        }
        self.template.validate()
    }

    /// Sorted, deduplicated `(α1, α2)` cells.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let sorted = |g: &[f64]| {
            let mut g = g.to_vec();
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        };
        let a2 = sorted(&self.alpha2);
        sorted(&self.alpha1)
            .into_iter()
            .flat_map(|a| a2.iter().map(move |&b| (a, b)))
            .collect()
    }
}
