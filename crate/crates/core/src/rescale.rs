//! Volume-normalizing rescaling of profiles about a fixed axis point `p`.
//!
//! `ũ(y) = sqrt(π(b − a)/V) · u((b − a) y + p)` on
//! `I = ((a − p)/(b − a), (b − p)/(b − a))`, which makes `π∫ũ² dy = π`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::profile::{mean_value_point, squared_integral, volume, ProfileCurve};
use crate::region::{hausdorff, Region};
use crate::solver::Trajectory;

/// Volumes at or below this are rejected.
pub const VOLUME_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct RescaledProfile {
    pub t: f64,
    pub c: f64,
    pub d: f64,
    pub ynodes: Vec<f64>,
    pub uvalues: Vec<f64>,
    pub p: f64,
}

impl RescaledProfile {
    /// `π ∫ ũ² dy`.
    pub fn volume(&self) -> f64 {
        PI * squared_integral(&self.ynodes, &self.uvalues)
    }

    fn region(&self) -> Region<'_> {
        Region::new(&self.ynodes, &self.uvalues)
    }
}

fn check(curve: &ProfileCurve, p: f64) -> Result<f64> {
    if !(curve.a() < p && p < curve.b()) {
        return Err(Error::DegenerateInput(format!(
            "p = {p} is outside ({}, {})",
            curve.a(),
            curve.b()
        )));
    }
    let v = volume(curve);
    if !(v > VOLUME_FLOOR && v.is_finite()) {
        return Err(Error::DegenerateInput(format!("volume {v:e} is below the floor")));
    }
    Ok(v)
}

/// Distances `p − a` and `b − p`. A point within rounding of the midpoint
/// gets two equal halves so that even profiles land on `(−½, ½)` exactly.
fn halves(curve: &ProfileCurve, p: f64) -> (f64, f64) {
    if (p - curve.midpoint()).abs() <= 1e-13 * curve.width() {
        let h = 0.5 * curve.width();
        (h, h)
    } else {
        (p - curve.a(), curve.b() - p)
    }
}

/// `(c, d)` for the curve rescaled about `p`.
pub fn rescaled_interval(curve: &ProfileCurve, p: f64) -> Result<(f64, f64)> {
    check(curve, p)?;
    let (l, r) = halves(curve, p);
    let w = l + r;
    Ok((-l / w, r / w))
}

fn assemble(curve: &ProfileCurve, p: f64, c: f64, d: f64, ymap: impl Fn(f64) -> f64, amplitude: f64) -> RescaledProfile {
    let n = curve.len();
    let mut ynodes: Vec<f64> = curve.nodes().iter().map(|&x| ymap(x)).collect();
    ynodes[0] = c;
    ynodes[n - 1] = d;
    RescaledProfile {
        t: curve.t(),
        c,
        d,
        ynodes,
        uvalues: curve.values().iter().map(|u| amplitude * u).collect(),
        p,
    }
}

/// Rescales about `p` using the interval width.
pub fn rescale(curve: &ProfileCurve, p: f64) -> Result<RescaledProfile> {
    let v = check(curve, p)?;
    let (l, r) = halves(curve, p);
    let w = l + r;
    let amplitude = (PI * w / v).sqrt();
    Ok(assemble(curve, p, -l / w, r / w, |x| (x - p) / w, amplitude))
}

/// Rescales about `p` through the mean-value point `x_t` with
/// `π(b − a)u²(x_t) = V`: amplitude `1/u(x_t)` and axis factor
/// `π u²(x_t)/V`. Agrees with [`rescale`] up to the root solve.
pub fn rescale_mean_value(curve: &ProfileCurve, p: f64) -> Result<RescaledProfile> {
    let v = check(curve, p)?;
    let xt = mean_value_point(curve).map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let q = curve.squared_interpolant().eval(xt);
    let factor = PI * q / v;
    let (l, r) = halves(curve, p);
    Ok(assemble(curve, p, -l * factor, r * factor, |x| (x - p) * factor, 1.0 / q.sqrt()))
}

/// Hausdorff distance between the closed meridian regions
/// `{c ≤ y ≤ d, |z| ≤ ũ(y)}`, with `ũ` interpolated linearly between nodes.
/// Exact for the polygons: both regions are convex, so each one-sided
/// distance is attained at a vertex.
pub fn hausdorff_distance(a: &RescaledProfile, b: &RescaledProfile) -> f64 {
    hausdorff(&a.region(), &b.region())
}

/// `(t, distance to the last rescaled snapshot)` for every snapshot.
pub fn convergence_monitor(traj: &Trajectory, p: f64) -> Result<Vec<(f64, f64)>> {
    if traj.snapshots.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least two snapshots, got {}",
            traj.snapshots.len()
        )));
    }
    let rescaled = traj
        .snapshots
        .iter()
        .map(|c| rescale(c, p))
        .collect::<Result<Vec<_>>>()?;
    let last = rescaled.last().expect("two snapshots");
    Ok(rescaled.iter().map(|r| (r.t, hausdorff_distance(r, last))).collect())
}
