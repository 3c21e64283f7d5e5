use std::f64::consts::PI;

use axiflow::barriers::{barrier_sphere, sphere_radius_at};
use axiflow::rescale::{hausdorff_distance, rescale, RescaledProfile};
use axiflow::solver::{run, run_with, FlowState, RunOptions, StopCriteria, Trajectory};
use axiflow::{FlowParams, ProfileCurve, Spheroid};

fn unit_params() -> FlowParams {
    FlowParams::new(1.0, 1.0).unwrap()
}

fn superellipse(x: f64) -> f64 {
    let s = x / 2.0;
    0.6 * (1.0 - s.powi(4)).max(0.0).sqrt()
}

fn limit(y: f64) -> f64 {
    (1.5 - 6.0 * y * y).max(0.0).sqrt()
}

/// `∫ f² dx` on `[a, b]` by the midpoint rule on `m` cells.
fn squared_midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    (0..m).map(|k| f(a + (k as f64 + 0.5) * h).powi(2)).sum::<f64>() * h
}

/// Closed meridian region of an analytic profile on `[c, d]`.
struct Analytic<F: Fn(f64) -> f64> {
    c: f64,
    d: f64,
    f: F,
}

impl<F: Fn(f64) -> f64> Analytic<F> {
    fn boundary(&self, step: f64) -> Vec<(f64, f64)> {
        let m = ((self.d - self.c) / step).ceil() as usize;
        let mut pts = Vec::new();
        for k in 0..=m {
            let y = self.c + (self.d - self.c) * k as f64 / m as f64;
            let u = (self.f)(y);
            pts.push((y, u));
            pts.push((y, -u));
        }
        pts
    }

    fn contains(&self, (y, z): (f64, f64)) -> bool {
        self.c <= y && y <= self.d && z.abs() <= (self.f)(y)
    }
}

fn one_sided<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(a: &Analytic<F>, b: &Analytic<G>, step: f64) -> f64 {
    let target = b.boundary(step);
    a.boundary(step)
        .into_iter()
        .filter(|&p| !b.contains(p))
        .map(|(y, z)| {
            target
                .iter()
                .map(|&(ty, tz)| (y - ty).hypot(z - tz))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

#[test]
fn hausdorff_matches_dense_sampling() {
    let n = 401;
    let sphere = rescale(&Spheroid::sphere(0.0, 1.0).unwrap().profile(n, 0.0).unwrap(), 0.0).unwrap();
    let curve = ProfileCurve::from_fn(0.0, -2.0, 2.0, n, superellipse).unwrap();
    let bar = rescale(&curve, 0.0).unwrap();
    let computed = hausdorff_distance(&sphere, &bar);

    // independent construction of the rescaled superellipse
    let volume = PI * squared_midpoint(superellipse, -2.0, 2.0, 200_000);
    let amp = (PI * 4.0 / volume).sqrt();
    let a = Analytic { c: -0.5, d: 0.5, f: limit };
    let b = Analytic {
        c: -0.5,
        d: 0.5,
        f: |y: f64| amp * superellipse(4.0 * y),
    };
    let step = 1e-3;
    let brute = one_sided(&a, &b, step).max(one_sided(&b, &a, step));
    let spacing = 1.0 / (n - 1) as f64;
    assert!(computed > 0.05, "{computed}");
    assert!(
        (computed - brute).abs() <= 2.0 * spacing,
        "computed {computed}, brute force {brute}"
    );
    assert_eq!(computed, hausdorff_distance(&bar, &sphere));
}

/// Solid body of revolution sampled on a grid in the meridian half-plane
/// and rotated by `angles` equally spaced angles.
fn cloud(r: &RescaledProfile, step: f64, angles: usize) -> Vec<[f64; 3]> {
    let height = |y: f64| {
        let j = r.ynodes.partition_point(|&v| v < y).clamp(1, r.ynodes.len() - 1);
        let (y0, y1) = (r.ynodes[j - 1], r.ynodes[j]);
        let (u0, u1) = (r.uvalues[j - 1], r.uvalues[j]);
        u0 + (u1 - u0) * (y - y0) / (y1 - y0)
    };
    let mut meridian = Vec::new();
    let m = ((r.d - r.c) / step).ceil() as usize;
    for k in 0..=m {
        let y = r.c + (r.d - r.c) * k as f64 / m as f64;
        let top = height(y);
        let levels = (top / step).ceil() as usize;
        for l in 0..=levels {
            meridian.push((y, top * l as f64 / levels.max(1) as f64));
        }
    }
    let mut pts = Vec::new();
    for (y, rho) in meridian {
        for a in 0..angles {
            let th = 2.0 * PI * a as f64 / angles as f64;
            pts.push([y, rho * th.cos(), rho * th.sin()]);
        }
    }
    pts
}

fn cloud_one_sided(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    a.iter()
        .map(|p| {
            b.iter()
                .map(|q| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

#[test]
fn meridian_hausdorff_agrees_with_point_clouds() {
    let n = 41;
    let sphere = rescale(&Spheroid::sphere(0.0, 1.0).unwrap().profile(n, 0.0).unwrap(), 0.0).unwrap();
    let curve = ProfileCurve::from_fn(0.0, -2.0, 2.0, n, superellipse).unwrap();
    let bar = rescale(&curve, 0.0).unwrap();
    let step = 0.04;
    let (ca, cb) = (cloud(&sphere, step, 12), cloud(&bar, step, 12));
    let brute = cloud_one_sided(&ca, &cb).max(cloud_one_sided(&cb, &ca));
    let meridian = hausdorff_distance(&sphere, &bar);
    assert!((brute - meridian).abs() <= 2.0 * step, "cloud {brute}, meridian {meridian}");
}

fn sphere_run(n: usize) -> Trajectory {
    let s = FlowState::from_spheroid(&Spheroid::sphere(0.0, 1.0).unwrap(), unit_params(), n).unwrap();
    let stop = StopCriteria::defaults_for(&s);
    run(s, &stop).unwrap()
}

/// Relative radius error while the radius is at least a quarter of its
/// initial value; closer to extinction any O(h²) error in the extinction
/// time dominates the relative radius error.
fn radius_error(traj: &Trajectory) -> f64 {
    traj.records
        .iter()
        .filter(|r| r.diameter >= 0.5)
        .map(|r| {
            let exact = sphere_radius_at(1.0, &unit_params(), r.t).radius().unwrap();
            (r.u_max / exact - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn simulated_sphere_follows_closed_form_radius() {
    let coarse = radius_error(&sphere_run(100));
    let fine = radius_error(&sphere_run(200));
    assert!(coarse <= 0.01, "{coarse}");
    assert!(fine < coarse / 3.0, "{coarse} -> {fine}");
}

#[test]
fn spheroid_stays_inside_barrier_sphere() {
    let shape = Spheroid::new(0.0, 1.0, 0.5).unwrap();
    let params = unit_params();
    let s = FlowState::from_spheroid(&shape, params, 100).unwrap();
    let curve = s.curve();
    let barrier = barrier_sphere(&curve, &params, 0.0).unwrap();
    assert!(barrier.radius >= 1.0);
    let stop = StopCriteria::defaults_for(&s);
    let times: Vec<f64> = (0..40).map(|k| 0.002 * k as f64).collect();
    let options = RunOptions {
        snapshot_times: times,
        ..RunOptions::default()
    };
    let traj = run_with(s, &stop, &options).unwrap();
    assert!(traj.snapshots.len() >= 30);
    for snap in &traj.snapshots {
        let sphere = barrier.evolved(&params, snap.t()).expect("barrier outlives the body");
        let spacing = snap.width() / (snap.len() - 1) as f64;
        assert!(sphere.excess(snap) <= spacing, "t = {}", snap.t());
    }
    // extinction is bounded by that of the circumscribed sphere
    assert!(traj.final_time() <= 1.0 / 3.0);
}
