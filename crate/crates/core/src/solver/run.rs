use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{diameter, evenness_defect, volume};

use super::state::{Field, FlowState};
use super::trajectory::{Record, RunError, StopReason, Trajectory};

/// Conditions that end a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopCriteria {
    pub diameter_floor: f64,
    pub volume_floor: f64,
    pub t_max: f64,
}

impl StopCriteria {
    /// 1% of the initial diameter, `1e-6` of the initial volume, and ten
    /// times the extinction time of the smallest concentric sphere that
    /// contains the initial body.
    pub fn defaults_for(state: &FlowState) -> Self {
        let curve = state.curve();
        let p = state.params().degree();
        let m = state.center();
        let r = curve
            .nodes()
            .iter()
            .zip(curve.values())
            .map(|(x, u)| ((x - m) * (x - m) + u * u).sqrt())
            .fold(0.0_f64, f64::max);
        Self {
            diameter_floor: 0.01 * diameter(&curve),
            volume_floor: 1e-6 * volume(&curve),
            t_max: 10.0 * r.powf(p + 1.0) / (p + 1.0),
        }
    }
}

/// Numerical controls of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub cfl: f64,
    pub record_every: usize,
    /// Times at which the profile is stored; the step is shortened to land
    /// on each of them.
    pub snapshot_times: Vec<f64>,
    pub regrid_every: usize,
    /// Relative shrinkage of `b − a` since the last regrid that forces a
    /// new one.
    pub regrid_shrink: f64,
    pub stitch_tolerance: f64,
    /// Steps between overlap checks; every record is checked as well.
    pub stitch_every: usize,
    /// Abort when the smallest diffusion coefficient drops below this.
    pub parabolicity_floor: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            cfl: 0.8,
            record_every: 250,
            snapshot_times: Vec::new(),
            regrid_every: 50,
            regrid_shrink: 0.02,
            stitch_tolerance: super::state::DEFAULT_STITCH_TOLERANCE,
            stitch_every: 10,
            parabolicity_floor: 0.0,
        }
    }
}

const TIP_CLEARANCE: f64 = 0.25;

pub(crate) fn record(state: &FlowState, field: &Field) -> Result<Record> {
    let curve = state.curve();
    let samples = state.curvature_samples(field);
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&(f64, f64, f64)) -> f64| {
        samples.iter().map(pick).fold(init, f)
    };
    let uxx = field.graph.iter().map(|g| g.uxx);
    Ok(Record {
        t: state.t(),
        volume: volume(&curve),
        diameter: diameter(&curve),
        kr_min: fold(f64::min, f64::INFINITY, |s| s.0),
        kr_max: fold(f64::max, f64::NEG_INFINITY, |s| s.0),
        ka_min: fold(f64::min, f64::INFINITY, |s| s.1),
        ka_max: fold(f64::max, f64::NEG_INFINITY, |s| s.1),
        speed_max: fold(f64::max, f64::NEG_INFINITY, |s| s.2),
        a: state.a(),
        b: state.b(),
        u_max: state.u_max(),
        uxx_min: uxx.clone().fold(f64::INFINITY, f64::min),
        uxx_max: uxx.fold(f64::NEG_INFINITY, f64::max),
        evenness: evenness_defect(&curve),
        parabolicity: field.min_diffusion,
        umbilic_defect: samples.iter().map(|s| (s.0 / s.1 - 1.0).abs()).fold(0.0, f64::max),
        stitch: state.stitch_defect()?,
        spacing: state.spacing(),
    })
}

fn stop_reason(state: &FlowState, stop: &StopCriteria) -> Option<StopReason> {
    if state.t() >= stop.t_max {
        return Some(StopReason::TMax);
    }
    let lower = (state.b() - state.a()).max(2.0 * state.u_max());
    if lower < stop.diameter_floor && diameter(&state.curve()) < stop.diameter_floor {
        return Some(StopReason::Diameter);
    }
    // the enclosing cylinder bounds the volume from above
    let cylinder = std::f64::consts::PI * state.u_max() * state.u_max() * (state.b() - state.a());
    if cylinder < stop.volume_floor && volume(&state.curve()) < stop.volume_floor {
        return Some(StopReason::Volume);
    }
    None
}

/// Integrates with default [`RunOptions`].
pub fn run(initial: FlowState, stop: &StopCriteria) -> std::result::Result<Trajectory, RunError> {
    run_with(initial, stop, &RunOptions::default())
}

/// Steps until one of the stop criteria holds. Records are taken at the
/// initial state, every `record_every` steps, at each snapshot time and at
/// the final state.
pub fn run_with(
    initial: FlowState,
    stop: &StopCriteria,
    options: &RunOptions,
) -> std::result::Result<Trajectory, RunError> {
    let mut traj = Trajectory::new(*initial.params());
    let result = integrate(initial, stop, options, &mut traj);
    match result {
        Ok(()) => Ok(traj),
        Err(source) => Err(RunError {
            source,
            trajectory: Box::new(traj),
        }),
    }
}

fn integrate(initial: FlowState, stop: &StopCriteria, options: &RunOptions, traj: &mut Trajectory) -> Result<()> {
    if !(options.cfl > 0.0 && options.cfl <= 1.0) {
        return Err(Error::InvalidParams(format!("cfl must lie in (0, 1], got {}", options.cfl)));
    }
    if options.record_every == 0 || options.regrid_every == 0 || options.stitch_every == 0 {
        return Err(Error::InvalidParams("record, regrid and stitch cadences must be positive".into()));
    }
    let mut snapshots: Vec<f64> = options
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t >= initial.t())
        .collect();
    snapshots.sort_by(f64::total_cmp);
    snapshots.dedup();
    let mut next_snapshot = 0;

    let mut state = initial;
    let mut field = state.field()?;
    traj.records.push(record(&state, &field)?);
    if snapshots.first() == Some(&state.t()) {
        traj.snapshots.push(state.curve());
        next_snapshot = 1;
    }
    let mut regrid_width = state.b() - state.a();
    let mut since_regrid = 0;
    let mut last_recorded = 0;

    let reason = loop {
        if let Some(reason) = stop_reason(&state, stop) {
            break reason;
        }
        if field.min_diffusion < options.parabolicity_floor {
            return Err(Error::DegenerateState(format!(
                "smallest diffusion coefficient {:e} fell below {:e} at t = {}",
                field.min_diffusion,
                options.parabolicity_floor,
                state.t()
            )));
        }
        let mut dt = options.cfl * field.dt_max;
        let mut target = None;
        if let Some(&ts) = snapshots.get(next_snapshot) {
            if state.t() + dt >= ts {
                dt = ts - state.t();
                target = Some(ts);
            }
        }
        if state.t() + dt >= stop.t_max {
            dt = stop.t_max - state.t();
            target = Some(stop.t_max);
        }
        let mut next = state.advance(&field, dt)?;
        if let Some(t) = target {
            next = next.with_time(t);
        }
        state = next;
        traj.steps += 1;
        if traj.steps.is_multiple_of(options.stitch_every) {
            state.check_stitch(options.stitch_tolerance)?;
        }
        since_regrid += 1;

        let shrunk = state.b() - state.a() < (1.0 - options.regrid_shrink) * regrid_width;
        if since_regrid >= options.regrid_every || shrunk || state.tip_clearance() < TIP_CLEARANCE {
            match state.regrid() {
                Ok(r) => state = r,
                Err(Error::TooFewNodes { .. }) => {
                    field = state.field()?;
                    break StopReason::GridExhausted;
                }
                Err(e) => return Err(e),
            }
            traj.regrids += 1;
            since_regrid = 0;
            regrid_width = state.b() - state.a();
        }
        field = state.field()?;

        let at_snapshot = snapshots.get(next_snapshot).is_some_and(|&ts| state.t() >= ts);
        if at_snapshot {
            traj.snapshots.push(state.curve());
            next_snapshot += 1;
        }
        if at_snapshot || traj.steps.is_multiple_of(options.record_every) {
            let rec = record(&state, &field)?;
            if rec.stitch > options.stitch_tolerance {
                return Err(Error::StitchBroken {
                    defect: rec.stitch,
                    tolerance: options.stitch_tolerance,
                });
            }
            traj.records.push(rec);
            last_recorded = traj.steps;
        }
    };
    if last_recorded != traj.steps {
        traj.records.push(record(&state, &field)?);
    }
    traj.stop = Some(reason);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::FlowParams;
    use crate::shapes::Spheroid;

    fn sphere(n: usize) -> FlowState {
        FlowState::from_spheroid(&Spheroid::sphere(0.0, 1.0).unwrap(), FlowParams::new(1.0, 1.0).unwrap(), n)
            .unwrap()
    }

    #[test]
    fn zero_t_max_takes_no_steps() {
        let s = sphere(101);
        let stop = StopCriteria {
            t_max: 0.0,
            ..StopCriteria::defaults_for(&s)
        };
        let traj = run(s, &stop).unwrap();
        assert_eq!(traj.steps, 0);
        assert_eq!(traj.records.len(), 1);
        assert_eq!(traj.stop, Some(StopReason::TMax));
    }

    #[test]
    fn defaults_for_unit_sphere() {
        let stop = StopCriteria::defaults_for(&sphere(101));
        assert!((stop.diameter_floor - 0.02).abs() < 1e-12);
        assert!((stop.t_max - 10.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn snapshots_land_on_requested_times() {
        let s = sphere(101);
        let stop = StopCriteria {
            t_max: 0.05,
            ..StopCriteria::defaults_for(&s)
        };
        let options = RunOptions {
            snapshot_times: vec![0.0, 0.01, 0.02],
            ..RunOptions::default()
        };
        let traj = run_with(s, &stop, &options).unwrap();
        let times: Vec<f64> = traj.snapshots.iter().map(|c| c.t()).collect();
        assert_eq!(times, vec![0.0, 0.01, 0.02]);
        assert_eq!(traj.final_time(), 0.05);
        assert!(traj.records.windows(2).all(|w| w[1].t > w[0].t && w[1].volume < w[0].volume));
    }

    #[test]
    fn bad_cfl_is_reported_with_empty_trajectory() {
        let s = sphere(101);
        let stop = StopCriteria::defaults_for(&s);
        let err = run_with(
            s,
            &stop,
            &RunOptions {
                cfl: 1.5,
                ..RunOptions::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err.source, Error::InvalidParams(_)));
        assert!(err.trajectory.records.is_empty());
    }
}
