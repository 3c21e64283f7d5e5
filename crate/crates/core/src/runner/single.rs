use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::barriers::{barrier_radius, barrier_sphere, extinction_time};
use crate::profile::{diameter, evenness_defect, volume, ProfileCurve};
use crate::region::Region;
use crate::rescale::convergence_monitor;
use crate::shapes::Spheroid;
use crate::solver::{estimate_extinction, run_with, FlowState, Record, RunError, StopCriteria, StopReason, Trajectory};

use super::artifacts::{write_series, write_snapshots};
use super::config::{InitialShape, RunConfig};
use super::{io_error, RunnerError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extinction {
    pub omega: Option<f64>,
    pub q: Option<f64>,
    pub error: Option<String>,
}

/// Records (or snapshots, for `barrier`) that broke an invariant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantCounters {
    /// Smallest principal curvature at or below `tolerances.convexity`.
    pub convexity: usize,
    /// Evenness defect above `tolerances.symmetry`.
    pub evenness: usize,
    /// Smallest diffusion coefficient not positive.
    pub parabolicity: usize,
    /// Chart disagreement above `tolerances.stitch`.
    pub stitch: usize,
    /// Volume not below the previous record's.
    pub volume: usize,
    /// Snapshot sticking out of the closed-form barrier sphere by more than
    /// one grid spacing.
    pub barrier: usize,
}

impl InvariantCounters {
    pub fn total(&self) -> usize {
        self.convexity + self.evenness + self.parabolicity + self.stitch + self.volume + self.barrier
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// The effective configuration.
    pub config: RunConfig,
    pub status: String,
    pub error: Option<String>,
    pub stop_reason: Option<StopReason>,
    pub stop: StopCriteria,
    pub snapshot_times: Vec<f64>,
    pub steps: usize,
    pub regrids: usize,
    pub records: usize,
    pub snapshots: usize,
    pub initial_volume: f64,
    pub initial_diameter: f64,
    pub final_time: f64,
    pub final_record: Option<Record>,
    /// Smaller principal curvature of the final record.
    pub final_min_curvature: Option<f64>,
    pub extinction: Extinction,
    pub barrier_radius: f64,
    /// Radius of the concentric sphere that encloses the initial body and
    /// moves slower than it everywhere.
    pub barrier_sphere_radius: f64,
    /// Hausdorff distance between the last two rescaled snapshots.
    pub hausdorff_drift: Option<f64>,
    pub invariants: InvariantCounters,
}

fn initial_state(cfg: &RunConfig) -> Result<FlowState, RunnerError> {
    let shape = |center, axial, equatorial| -> Result<FlowState, RunnerError> {
        let s = Spheroid::new(center, axial, equatorial)?;
        Ok(FlowState::from_spheroid(&s, cfg.params, cfg.nodes)?)
    };
    match &cfg.initial {
        InitialShape::Sphere { radius, center } => shape(*center, *radius, *radius),
        InitialShape::Spheroid {
            axial,
            equatorial,
            center,
        } => shape(*center, *axial, *equatorial),
        InitialShape::Profile { path, line } => {
            let curve = super::artifacts::load_profile(path, *line)?;
            let defect = evenness_defect(&curve);
            if cfg.assert_even && defect > cfg.tolerances.symmetry {
                return Err(RunnerError::InvalidConfig {
                    field: "initial".into(),
                    message: format!(
                        "profile evenness defect {defect:e} exceeds tolerances.symmetry = {:e}",
                        cfg.tolerances.symmetry
                    ),
                });
            }
            Ok(FlowState::from_curve(&curve, cfg.params, cfg.nodes)?)
        }
    }
}

fn stop_criteria(cfg: &RunConfig, state: &FlowState) -> StopCriteria {
    let d = StopCriteria::defaults_for(state);
    StopCriteria {
        diameter_floor: cfg.stop.diameter_floor.unwrap_or(d.diameter_floor),
        volume_floor: cfg.stop.volume_floor.unwrap_or(d.volume_floor),
        t_max: cfg.stop.t_max.unwrap_or(d.t_max),
    }
}

fn snapshot_times(cfg: &RunConfig, curve: &ProfileCurve, center: f64) -> Vec<f64> {
    if let Some(times) = &cfg.snapshots.times {
        return times.clone();
    }
    let count = cfg.snapshots.count;
    let inradius = Region::new(curve.nodes(), curve.values()).inradius(center);
    let horizon = cfg.snapshots.horizon * extinction_time(inradius, &cfg.params);
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|k| horizon * k as f64 / (count - 1) as f64).collect(),
    }
}

fn count_invariants(cfg: &RunConfig, traj: &Trajectory, barrier: &crate::barriers::SphereState) -> InvariantCounters {
    let tol = &cfg.tolerances;
    let mut c = InvariantCounters::default();
    for (k, r) in traj.records.iter().enumerate() {
        c.convexity += usize::from(!(r.kr_min.min(r.ka_min) > tol.convexity));
        c.evenness += usize::from(!(r.evenness <= tol.symmetry));
        c.parabolicity += usize::from(!(r.parabolicity > 0.0));
        c.stitch += usize::from(!(r.stitch <= tol.stitch));
        if k > 0 {
            c.volume += usize::from(!(r.volume < traj.records[k - 1].volume));
        }
    }
    for s in &traj.snapshots {
        let spacing = s.width() / (s.len() - 1) as f64;
        let outside = match barrier.evolved(&traj.params, s.t()) {
            Some(sphere) => sphere.excess(s) > spacing,
            None => true,
        };
        c.barrier += usize::from(outside);
    }
    c
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), RunnerError> {
    let text = serde_json::to_string_pretty(value).expect("summary serializes");
    std::fs::write(path, text + "\n").map_err(io_error(format!("writing {}", path.display())))
}

/// Runs, writes artifacts and returns the summary together with the solver
/// failure, if any. Artifacts are written in both cases.
pub(crate) fn execute(cfg: &RunConfig) -> Result<(Summary, Option<RunError>), RunnerError> {
    cfg.validate()?;
    let state = initial_state(cfg)?;
    let curve = state.curve();
    let center = state.center();
    let stop = stop_criteria(cfg, &state);
    let times = snapshot_times(cfg, &curve, center);
    let r_star = barrier_radius(&curve, &cfg.params)?;
    let barrier = barrier_sphere(&curve, &cfg.params, center)?;

    std::fs::create_dir_all(&cfg.out).map_err(io_error(format!("creating {}", cfg.out.display())))?;
    let options = cfg.run_options(times.clone());
    let (traj, failure) = match run_with(state, &stop, &options) {
        Ok(traj) => (traj, None),
        Err(e) => (*e.trajectory.clone(), Some(e)),
    };

    write_series(&cfg.out.join("series.csv"), &traj.records)?;
    write_snapshots(&cfg.out.join("snapshots.jsonl"), &traj.snapshots, center)?;

    let extinction = match estimate_extinction(&traj) {
        Ok((omega, q)) => Extinction {
            omega: Some(omega),
            q: Some(q),
            error: None,
        },
        Err(e) => Extinction {
            omega: None,
            q: None,
            error: Some(e.to_string()),
        },
    };
    let hausdorff_drift = convergence_monitor(&traj, center)
        .ok()
        .and_then(|m| m.len().checked_sub(2).map(|k| m[k].1));
    let last = traj.last().copied();
    let summary = Summary {
        config: cfg.clone(),
        status: if failure.is_some() { "failed" } else { "ok" }.into(),
        error: failure.as_ref().map(|e| e.to_string()),
        stop_reason: traj.stop,
        stop,
        snapshot_times: times,
        steps: traj.steps,
        regrids: traj.regrids,
        records: traj.records.len(),
        snapshots: traj.snapshots.len(),
        initial_volume: volume(&curve),
        initial_diameter: diameter(&curve),
        final_time: traj.final_time(),
        final_record: last,
        final_min_curvature: last.map(|r| r.kr_min.min(r.ka_min)),
        extinction,
        barrier_radius: r_star,
        barrier_sphere_radius: barrier.radius,
        hausdorff_drift,
        invariants: count_invariants(cfg, &traj, &barrier),
    };
    write_json(&cfg.out.join("summary.json"), &summary)?;
    Ok((summary, failure))
}

/// Runs one configuration into `cfg.out`. A solver failure is returned as
/// [`RunnerError::Run`] after the partial artifacts have been written.
pub fn run_single(cfg: &RunConfig) -> Result<Summary, RunnerError> {
    match execute(cfg)? {
        (summary, None) => Ok(summary),
        (_, Some(e)) => Err(RunnerError::Run(e)),
    }
}
