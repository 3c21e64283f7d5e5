use crate::error::{Error, Result};

use super::trajectory::{Record, Trajectory};

/// Fewest trailing records a fit accepts.
pub const MIN_TAIL: usize = 10;

/// Fits `V(t) ≈ C·(ω − t)^q` to the last half of the records (at least
/// [`MIN_TAIL`]) and returns `(ω, q)`. For each trial `ω` the fit of
/// `log V` against `log(ω − t)` is linear; `ω` itself minimizes the
/// residual over a log-spaced scan refined by golden-section search.
pub fn estimate_extinction(traj: &Trajectory) -> Result<(f64, f64)> {
    fit_tail(&traj.records)
}

pub(crate) fn fit_tail(records: &[Record]) -> Result<(f64, f64)> {
    let n = records.len();
    if n < MIN_TAIL {
        return Err(Error::FitFailed(format!(
            "need at least {MIN_TAIL} records, got {n}"
        )));
    }
    let tail = &records[n - (n / 2).max(MIN_TAIL)..];
    if tail.windows(2).any(|w| !(w[1].volume < w[0].volume) || !(w[1].t > w[0].t)) {
        return Err(Error::FitFailed("volume is not strictly decreasing on the tail".into()));
    }
    if tail.iter().any(|r| !(r.volume > 0.0)) {
        return Err(Error::FitFailed("nonpositive volume on the tail".into()));
    }
    let t: Vec<f64> = tail.iter().map(|r| r.t).collect();
    let logv: Vec<f64> = tail.iter().map(|r| r.volume.ln()).collect();
    let t_last = *t.last().expect("nonempty tail");
    let span = t_last - t[0];

    // gap g = ω − t_last, searched over log g
    let residual = |z: f64| linear_fit(&t, &logv, t_last + z.exp()).2;
    let (lo, hi) = ((span * 1e-9).ln(), (span * 1e3).ln());
    let samples = 400;
    let z_at = |k: usize| lo + (hi - lo) * k as f64 / samples as f64;
    let best = (0..=samples)
        .map(|k| (k, residual(z_at(k))))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(k, _)| k)
        .expect("nonempty scan");
    let (mut a, mut b) = (z_at(best.saturating_sub(1)), z_at((best + 1).min(samples)));
    let ratio = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (residual(c), residual(d));
    for _ in 0..100 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = residual(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = residual(d);
        }
    }
    let omega = t_last + (0.5 * (a + b)).exp();
    let (_, q, _) = linear_fit(&t, &logv, omega);
    if !(q.is_finite() && omega.is_finite()) {
        return Err(Error::FitFailed("fit did not converge".into()));
    }
    Ok((omega, q))
}

/// Least-squares `log V = c + q·log(ω − t)`; returns `(c, q, residual)`.
fn linear_fit(t: &[f64], logv: &[f64], omega: f64) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let x: Vec<f64> = t.iter().map(|ti| (omega - ti).ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = logv.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(logv).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let q = sxy / sxx;
    let c = my - q * mx;
    let res = x.iter().zip(logv).map(|(xi, yi)| (yi - c - q * xi).powi(2)).sum();
    (c, q, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::FlowParams;
    use crate::solver::trajectory::Record;

    fn synthetic(times: &[f64], v: impl Fn(f64) -> f64) -> Trajectory {
        let mut traj = Trajectory::new(FlowParams::new(1.0, 1.0).unwrap());
        traj.records = times
            .iter()
            .map(|&t| Record {
                t,
                volume: v(t),
                diameter: 0.0,
                kr_min: 0.0,
                kr_max: 0.0,
                ka_min: 0.0,
                ka_max: 0.0,
                speed_max: 0.0,
                a: 0.0,
                b: 0.0,
                u_max: 0.0,
                uxx_min: 0.0,
                uxx_max: 0.0,
                evenness: 0.0,
                parabolicity: 0.0,
                umbilic_defect: 0.0,
                stitch: 0.0,
                spacing: 0.0,
            })
            .collect();
        traj
    }

    fn times(end: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| end * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn recovers_sphere_laws() {
        let pi43 = 4.0 / 3.0 * std::f64::consts::PI;
        let traj = synthetic(&times(0.33, 60), |t| pi43 * (1.0 - 3.0 * t));
        let (omega, q) = estimate_extinction(&traj).unwrap();
        assert!((omega - 1.0 / 3.0).abs() < 1e-6, "{omega}");
        assert!((q - 1.0).abs() < 1e-6, "{q}");

        let traj = synthetic(&times(0.49, 60), |t| pi43 * (1.0 - 2.0 * t).powf(1.5));
        let (omega, q) = estimate_extinction(&traj).unwrap();
        assert!((omega - 0.5).abs() < 1e-6);
        assert!((q - 1.5).abs() < 1e-6);
    }

    #[test]
    fn constant_volume_fails() {
        let traj = synthetic(&times(1.0, 30), |_| 2.0);
        assert!(matches!(estimate_extinction(&traj), Err(Error::FitFailed(_))));
    }

    #[test]
    fn short_trajectory_fails() {
        let traj = synthetic(&times(0.3, 5), |t| 1.0 - 3.0 * t);
        assert!(matches!(estimate_extinction(&traj), Err(Error::FitFailed(_))));
    }
}
