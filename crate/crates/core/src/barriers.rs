//! Shrinking spheres in closed form and the comparisons built on them.
//!
//! On a sphere of radius `r` both principal curvatures equal `1/r`, so the
//! radius obeys `r' = −r^{−p}` with `p = α1 + α2` and
//! `r(t) = (r0^{p+1} − (p+1) t)^{1/(p+1)}`.

use crate::error::{Error, Result};
use crate::params::FlowParams;
use crate::profile::ProfileCurve;
use crate::region::Region;
use crate::shapes::Spheroid;
use crate::solver::{FlowState, Trajectory};

/// Relative tolerance on snapshot times when two runs are compared.
pub const SNAPSHOT_TIME_TOLERANCE: f64 = 1e-9;

/// Result of evolving a sphere for a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereRadius {
    Radius(f64),
    Extinct,
}

impl SphereRadius {
    pub fn radius(self) -> Option<f64> {
        match self {
            SphereRadius::Radius(r) => Some(r),
            SphereRadius::Extinct => None,
        }
    }
}

/// `r(t)` for initial radius `r0`.
pub fn sphere_radius_at(r0: f64, params: &FlowParams, t: f64) -> SphereRadius {
    let e = params.degree() + 1.0;
    let rest = r0.powf(e) - e * t;
    if rest <= 0.0 || t >= extinction_time(r0, params) {
        SphereRadius::Extinct
    } else {
        SphereRadius::Radius(rest.powf(1.0 / e))
    }
}

/// `r0^{p+1}/(p+1)`.
pub fn extinction_time(r0: f64, params: &FlowParams) -> f64 {
    let e = params.degree() + 1.0;
    r0.powf(e) / e
}

/// A sphere centered on the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereState {
    pub center: f64,
    pub radius: f64,
}

impl SphereState {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
            return Err(Error::InvalidCurve(format!("sphere radius {radius} is not positive")));
        }
        Ok(Self { center, radius })
    }

    /// Normal speed `(1/r)^{α1+α2}`.
    pub fn speed(&self, params: &FlowParams) -> f64 {
        self.radius.powf(-params.degree())
    }

    pub fn extinction_time(&self, params: &FlowParams) -> f64 {
        extinction_time(self.radius, params)
    }

    /// The sphere after time `t`, or `None` once it has vanished.
    pub fn evolved(&self, params: &FlowParams, t: f64) -> Option<SphereState> {
        sphere_radius_at(self.radius, params, t)
            .radius()
            .map(|radius| SphereState {
                center: self.center,
                radius,
            })
    }

    /// Uniform `n`-node profile stamped with time `t`.
    pub fn profile(&self, n: usize, t: f64) -> Result<ProfileCurve> {
        Spheroid::sphere(self.center, self.radius)?.profile(n, t)
    }

    /// `max_i (|(x_i, u_i) − (center, 0)| − r)`: positive when some node of
    /// the curve lies outside the sphere.
    pub fn excess(&self, curve: &ProfileCurve) -> f64 {
        curve
            .nodes()
            .iter()
            .zip(curve.values())
            .map(|(x, u)| (x - self.center).hypot(*u) - self.radius)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `(min speed)^{−1/(α1+α2)}`: every sphere of larger radius moves strictly
/// slower than the curve everywhere. Speeds are sampled on the graph away
/// from the poles and on the pole charts near them, where three-point
/// differences of the graph are unreliable.
pub fn barrier_radius(curve: &ProfileCurve, params: &FlowParams) -> Result<f64> {
    let slowest = FlowState::from_curve(curve, *params, curve.len())?.min_speed()?;
    if !(slowest > 0.0 && slowest.is_finite()) {
        return Err(Error::DegenerateState(format!("minimum speed {slowest:e} is not positive")));
    }
    Ok(slowest.powf(-1.0 / params.degree()))
}

/// Sphere about `center` that both contains the curve and satisfies the
/// speed comparison: its radius is the larger of the circumradius and
/// [`barrier_radius`].
pub fn barrier_sphere(curve: &ProfileCurve, params: &FlowParams, center: f64) -> Result<SphereState> {
    let reach = curve
        .nodes()
        .iter()
        .zip(curve.values())
        .map(|(x, u)| (x - center).hypot(*u))
        .fold(0.0_f64, f64::max);
    SphereState::new(center, reach.max(barrier_radius(curve, params)?))
}

/// Closed-form evolution of `sphere` sampled at `times` with `n` nodes; only
/// snapshots are filled in, and times past extinction are dropped.
pub fn sphere_trajectory(sphere: &SphereState, params: FlowParams, times: &[f64], n: usize) -> Result<Trajectory> {
    let mut traj = Trajectory::new(params);
    for &t in times {
        if let Some(s) = sphere.evolved(&params, t) {
            traj.snapshots.push(s.profile(n, t)?);
        }
    }
    Ok(traj)
}

/// For each common snapshot time, how far `inner`'s meridian region sticks
/// out of `outer`'s. Snapshot lists must agree in time on their common
/// prefix; a run that stopped earlier simply contributes fewer times.
pub fn nesting_excess(inner: &Trajectory, outer: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let (a, b) = (&inner.snapshots, &outer.snapshots);
    if a.is_empty() || b.is_empty() {
        return Err(Error::IncompatibleSnapshots("a trajectory has no snapshots".into()));
    }
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (ca, cb))| {
            let tol = SNAPSHOT_TIME_TOLERANCE * ca.t().abs().max(1.0);
            if (ca.t() - cb.t()).abs() > tol {
                return Err(Error::IncompatibleSnapshots(format!(
                    "snapshot {k} is at t = {} in one run and t = {} in the other",
                    ca.t(),
                    cb.t()
                )));
            }
            let ra = Region::new(ca.nodes(), ca.values());
            let rb = Region::new(cb.nodes(), cb.values());
            Ok((ca.t(), ra.excess_over(&rb)))
        })
        .collect()
}

/// Whether `inner` lies inside `outer` at every common snapshot, allowing
/// an overshoot of `tolerance`.
pub fn nesting_check_within(inner: &Trajectory, outer: &Trajectory, tolerance: f64) -> Result<bool> {
    Ok(nesting_excess(inner, outer)?.iter().all(|&(_, e)| e <= tolerance))
}

/// [`nesting_check_within`] up to rounding.
pub fn nesting_check(inner: &Trajectory, outer: &Trajectory) -> Result<bool> {
    let scale = outer
        .snapshots
        .iter()
        .map(|c| c.width())
        .fold(0.0_f64, f64::max);
    nesting_check_within(inner, outer, 1e-12 * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(a1: f64, a2: f64) -> FlowParams {
        FlowParams::new(a1, a2).unwrap()
    }

    /// Classical RK4 on `r' = −r^{−p}`.
    fn integrate(r0: f64, p: f64, t: f64, steps: usize) -> f64 {
        let f = |r: f64| -r.powf(-p);
        let h = t / steps as f64;
        let mut r = r0;
        for _ in 0..steps {
            let k1 = f(r);
            let k2 = f(r + 0.5 * h * k1);
            let k3 = f(r + 0.5 * h * k2);
            let k4 = f(r + h * k3);
            r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        r
    }

    #[test]
    fn radius_law() {
        let p = params(1.0, 1.0);
        let r = sphere_radius_at(1.0, &p, 0.1).radius().unwrap();
        assert_relative_eq!(r, 0.7_f64.powf(1.0 / 3.0), max_relative = 1e-15);
        assert_relative_eq!(r, 0.88790, epsilon = 1e-5);
        assert_relative_eq!(r, integrate(1.0, 2.0, 0.1, 10_000), max_relative = 1e-12);
        assert_relative_eq!(extinction_time(1.0, &p), 1.0 / 3.0);
        assert_eq!(sphere_radius_at(1.0, &p, 1.0 / 3.0), SphereRadius::Extinct);

        let h = params(0.5, 0.5);
        let r = sphere_radius_at(1.0, &h, 0.3).radius().unwrap();
        assert_relative_eq!(r, 0.4_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(r, integrate(1.0, 1.0, 0.3, 10_000), max_relative = 1e-12);
        assert_relative_eq!(extinction_time(1.0, &h), 0.5);

        for (a1, a2) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.25)] {
            assert_eq!(sphere_radius_at(1.0, &params(a1, a2), 0.0), SphereRadius::Radius(1.0));
        }
    }

    #[test]
    fn barrier_radii() {
        let p = params(1.0, 1.0);
        let sphere = Spheroid::sphere(1.0, 1.0).unwrap().profile(401, 0.0).unwrap();
        assert_relative_eq!(barrier_radius(&sphere, &p).unwrap(), 1.0, epsilon = 1e-3);
        assert_relative_eq!(barrier_radius(&sphere, &params(0.5, 2.0)).unwrap(), 1.0, epsilon = 1e-3);
        let big = sphere.dilated(2.0, 1.0);
        assert_relative_eq!(barrier_radius(&big, &p).unwrap(), 2.0, epsilon = 2e-3);
        let spheroid = Spheroid::new(1.0, 1.0, 0.5).unwrap().profile(401, 0.0).unwrap();
        assert_relative_eq!(barrier_radius(&spheroid, &p).unwrap(), 1.0, epsilon = 1e-3);
        let s = barrier_sphere(&spheroid, &p, 1.0).unwrap();
        assert!(s.excess(&spheroid) <= 1e-12);
    }

    #[test]
    fn closed_form_spheres_nest() {
        let p = params(1.0, 1.0);
        let times = [0.0, 0.1, 0.3];
        let small = sphere_trajectory(&SphereState::new(0.0, 1.0).unwrap(), p, &times, 201).unwrap();
        let large = sphere_trajectory(&SphereState::new(0.0, 1.2).unwrap(), p, &times, 201).unwrap();
        assert!(nesting_check(&small, &large).unwrap());
        assert!(!nesting_check(&large, &small).unwrap());
        assert!(nesting_check(&small, &small).unwrap());
        let r = |t: &Trajectory| t.snapshots[2].max_height();
        assert_relative_eq!(r(&small), 0.46416, epsilon = 1e-5);
        assert_relative_eq!(r(&large), 0.939024, epsilon = 1e-6);
    }

    #[test]
    fn extinct_snapshots_are_dropped() {
        let p = params(1.0, 1.0);
        let traj = sphere_trajectory(&SphereState::new(0.0, 1.0).unwrap(), p, &[0.0, 0.2, 0.4], 51).unwrap();
        assert_eq!(traj.snapshots.len(), 2);
    }

    #[test]
    fn misaligned_snapshots_are_rejected() {
        let p = params(1.0, 1.0);
        let s = SphereState::new(0.0, 1.0).unwrap();
        let a = sphere_trajectory(&s, p, &[0.0, 0.1], 51).unwrap();
        let b = sphere_trajectory(&s, p, &[0.0, 0.11], 51).unwrap();
        assert!(matches!(nesting_check(&a, &b), Err(Error::IncompatibleSnapshots(_))));
        let empty = Trajectory::new(p);
        assert!(matches!(nesting_check(&a, &empty), Err(Error::IncompatibleSnapshots(_))));
    }

    #[test]
    fn sphere_excess_sign() {
        let s = SphereState::new(0.0, 1.0).unwrap();
        let inside = SphereState::new(0.0, 0.9).unwrap().profile(51, 0.0).unwrap();
        assert_relative_eq!(s.excess(&inside), -0.1, epsilon = 1e-12);
        assert!(s.excess(&inside.dilated(1.2, 0.0)) > 0.0);
    }
}
