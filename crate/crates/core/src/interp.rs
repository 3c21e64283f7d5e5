//! Shape-preserving piecewise cubic Hermite interpolation.
//!
//! Node slopes come from the five-point Lagrange derivative (fourth order on
//! smooth data) and are then passed through a Hyman-type monotonicity filter:
//! zero at strict local extrema, same sign as the adjacent secants and at
//! most three times the smaller of them. On strictly monotone data each
//! segment is then monotone, so inverse queries have a unique root.

/// Piecewise cubic Hermite interpolant through `(xs[i], ys[i])`.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant. `xs` must be strictly increasing and hold at
    /// least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() >= 2, "interpolant needs at least two nodes");
        assert_eq!(xs.len(), ys.len(), "node and value lengths differ");
        debug_assert!(xs.windows(2).all(|w| w[1] > w[0]), "nodes not increasing");
        let ds = filtered_slopes(&xs, &ys);
        Self { xs, ys, ds }
    }

    /// Hermite interpolant with the raw five-point slopes, no filter. Used
    /// for resampling data that is smooth but not monotone.
    pub fn unlimited(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() >= 2, "interpolant needs at least two nodes");
        assert_eq!(xs.len(), ys.len(), "node and value lengths differ");
        let ds = (0..xs.len()).map(|i| lagrange_slope(&xs, &ys, i)).collect();
        Self { xs, ys, ds }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.ds
    }

    /// Index `j` of the segment `[xs[j], xs[j+1]]` containing `x`, clamped
    /// to the first/last segment outside the node range.
    pub fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        let j = self.xs.partition_point(|&xi| xi <= x);
        j.saturating_sub(1).min(n - 2)
    }

    /// Value at `x`; linear extrapolation with the end slope outside the range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.ds[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.ds[n - 1] * (x - self.xs[n - 1]);
        }
        let j = self.segment(x);
        self.eval_in(j, x)
    }

    fn eval_in(&self, j: usize, x: f64) -> f64 {
        let (x0, x1) = (self.xs[j], self.xs[j + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        hermite(t, self.ys[j], self.ys[j + 1], h * self.ds[j], h * self.ds[j + 1])
    }

    /// Finds `x` with `f(x) = target` on nodes `lo..=hi`, where the data is
    /// increasing. Targets outside `[ys[lo], ys[hi]]` are extrapolated
    /// linearly from the nearer end.
    pub fn solve_increasing(&self, target: f64, lo: usize, hi: usize) -> f64 {
        debug_assert!(lo < hi && hi < self.xs.len());
        if target <= self.ys[lo] {
            return self.linear_inverse(lo, target);
        }
        if target >= self.ys[hi] {
            return self.linear_inverse(hi, target);
        }
        // ys[lo] < target < ys[hi]; first node strictly above target
        let k = lo + self.ys[lo..=hi].partition_point(|&y| y <= target);
        let j = k - 1;
        self.solve_segment(j, target)
    }

    fn linear_inverse(&self, i: usize, target: f64) -> f64 {
        let d = self.ds[i];
        if d > 0.0 {
            self.xs[i] + (target - self.ys[i]) / d
        } else {
            self.xs[i]
        }
    }

    fn solve_segment(&self, j: usize, target: f64) -> f64 {
        let (x0, x1) = (self.xs[j], self.xs[j + 1]);
        let (y0, y1) = (self.ys[j], self.ys[j + 1]);
        solve_hermite(x0, x1, y0, y1, self.ds[j], self.ds[j + 1], target)
    }
}

fn solve_hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, target: f64) -> f64 {
    let h = x1 - x0;
    let (m0, m1) = (h * d0, h * d1);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut t = if y1 > y0 {
        ((target - y0) / (y1 - y0)).clamp(0.0, 1.0)
    } else {
        0.5
    };
    for _ in 0..60 {
        let f = hermite(t, y0, y1, m0, m1) - target;
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let df = hermite_dt(t, y0, y1, m0, m1);
        let newton = t - f / df;
        t = if df > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-15 || (f / df).abs() < 1e-16 {
            break;
        }
    }
    x0 + t * h
}

/// The filtered interpolant over borrowed data, with slopes computed on
/// first use. In even mode the data is continued by `f(−x) = f(x)` and
/// `xs[0]` must be 0.
pub(crate) struct LazyCubic<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    even: bool,
    ds: Vec<f64>,
}

impl<'a> LazyCubic<'a> {
    pub fn new(xs: &'a [f64], ys: &'a [f64]) -> Self {
        Self::build(xs, ys, false)
    }

    pub fn even(xs: &'a [f64], ys: &'a [f64]) -> Self {
        debug_assert_eq!(xs[0], 0.0);
        Self::build(xs, ys, true)
    }

    fn build(xs: &'a [f64], ys: &'a [f64], even: bool) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len());
        Self {
            xs,
            ys,
            even,
            ds: vec![f64::NAN; xs.len()],
        }
    }

    fn node(&self, i: isize) -> (f64, f64) {
        if i < 0 {
            (-self.xs[(-i) as usize], self.ys[(-i) as usize])
        } else {
            (self.xs[i as usize], self.ys[i as usize])
        }
    }

    fn slope(&mut self, i: usize) -> f64 {
        if !self.ds[i].is_nan() {
            return self.ds[i];
        }
        let last = self.xs.len() as isize - 1;
        let first = if self.even { -last } else { 0 };
        let count = (last - first + 1).min(5);
        let ii = i as isize;
        let start = (ii - 2).max(first).min(last + 1 - count);
        let (mut wx, mut wy) = ([0.0; 5], [0.0; 5]);
        for k in 0..count {
            (wx[k as usize], wy[k as usize]) = self.node(start + k);
        }
        let c = (ii - start) as usize;
        let m = count as usize;
        let d = lagrange_slope(&wx[..m], &wy[..m], c);
        let secant = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1) / (b.0 - a.0);
        let here = self.node(ii);
        let left = (ii > first).then(|| secant(self.node(ii - 1), here));
        let right = (ii < last).then(|| secant(here, self.node(ii + 1)));
        let d = filter(d, left, right);
        self.ds[i] = d;
        d
    }

    /// Value at `x ≥ xs[0]`, extrapolating linearly past the last node.
    pub fn eval(&mut self, x: f64) -> f64 {
        let n = self.xs.len();
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slope(n - 1) * (x - self.xs[n - 1]);
        }
        let j = self.xs.partition_point(|&xi| xi <= x).saturating_sub(1).min(n - 2);
        let (x0, x1) = (self.xs[j], self.xs[j + 1]);
        let h = x1 - x0;
        let (d0, d1) = (self.slope(j), self.slope(j + 1));
        hermite((x - x0) / h, self.ys[j], self.ys[j + 1], h * d0, h * d1)
    }

    /// As [`MonotoneCubic::solve_increasing`].
    pub fn solve_increasing(&mut self, target: f64, lo: usize, hi: usize) -> f64 {
        debug_assert!(lo < hi && hi < self.xs.len());
        let end = |c: &mut Self, i: usize| {
            let d = c.slope(i);
            if d > 0.0 {
                c.xs[i] + (target - c.ys[i]) / d
            } else {
                c.xs[i]
            }
        };
        if target <= self.ys[lo] {
            return end(self, lo);
        }
        if target >= self.ys[hi] {
            return end(self, hi);
        }
        let j = lo + self.ys[lo..=hi].partition_point(|&y| y <= target) - 1;
        let (d0, d1) = (self.slope(j), self.slope(j + 1));
        solve_hermite(self.xs[j], self.xs[j + 1], self.ys[j], self.ys[j + 1], d0, d1, target)
    }
}

fn hermite(t: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * m1
}

fn hermite_dt(t: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> f64 {
    let t2 = t * t;
    (6.0 * t2 - 6.0 * t) * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * m1
}

/// Derivative at `xs[i]` of the Lagrange polynomial through the (up to) five
/// nodes nearest to `i`.
pub fn lagrange_slope(xs: &[f64], ys: &[f64], i: usize) -> f64 {
    let n = xs.len();
    let m = n.min(5);
    let lo = i.saturating_sub(2).min(n - m);
    let (x, y) = (&xs[lo..lo + m], &ys[lo..lo + m]);
    let c = i - lo;
    // barycentric weights of the window
    let mut w = [1.0_f64; 5];
    for j in 0..m {
        for k in 0..m {
            if k != j {
                w[j] *= x[j] - x[k];
            }
        }
    }
    let mut slope = 0.0;
    for j in 0..m {
        if j != c {
            slope += w[c] / w[j] * (y[j] - y[c]) / (x[c] - x[j]);
        }
    }
    slope
}

fn filtered_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let secant = |j: usize| (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
    (0..n)
        .map(|i| {
            let d = lagrange_slope(xs, ys, i);
            let left = (i > 0).then(|| secant(i - 1));
            let right = (i + 1 < n).then(|| secant(i));
            filter(d, left, right)
        })
        .collect()
}

fn filter(d: f64, left: Option<f64>, right: Option<f64>) -> f64 {
    match (left, right) {
        (Some(l), Some(r)) if l * r < 0.0 => 0.0,
        (Some(l), Some(r)) if l * r > 0.0 => limit(d, l.abs().min(r.abs()) * l.signum()),
        // one flat side: keep the sign of the other so that a maximum
        // straddled by two equal nodes is not flattened
        (Some(l), Some(r)) => limit(d, l + r),
        (Some(s), None) | (None, Some(s)) => limit(d, s),
        (None, None) => d,
    }
}

/// Clamps `d` to the closed interval between 0 and `3·secant`.
fn limit(d: f64, secant: f64) -> f64 {
    if secant == 0.0 || d * secant <= 0.0 {
        0.0
    } else if d.abs() > 3.0 * secant.abs() {
        3.0 * secant
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn reproduces_cubics_away_from_limiter() {
        let xs = grid(0.0, 1.0, 11);
        let f = |x: f64| 1.0 + 2.0 * x + 0.5 * x * x + 0.25 * x * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let c = MonotoneCubic::new(xs, ys);
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            assert!((c.eval(x) - f(x)).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn unlimited_keeps_slope_at_extremum() {
        let xs = grid(-1.0, 1.0, 8);
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - x * x).collect();
        let c = MonotoneCubic::unlimited(xs, ys);
        for k in 0..=50 {
            let x = -1.0 + k as f64 / 25.0;
            assert!((c.eval(x) - (1.0 - x * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_slope_at_strict_extremum() {
        let xs = grid(-1.0, 1.0, 9);
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - x * x).collect();
        let c = MonotoneCubic::new(xs, ys);
        assert_eq!(c.slopes()[4], 0.0);
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |n: usize| {
            let xs = grid(0.0, 1.0, n);
            let ys: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
            let c = MonotoneCubic::new(xs, ys);
            (0..1000)
                .map(|k| {
                    let x = (k as f64 + 0.5) / 1000.0;
                    (c.eval(x) - x.exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(21) / err(41);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn inverse_matches_forward() {
        let xs = grid(0.0, 2.0, 41);
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - x * x).collect();
        let c = MonotoneCubic::new(xs, ys);
        for target in [0.0, 0.1, 0.25, 0.5, 0.75, 0.99] {
            let x = c.solve_increasing(target, 0, 20);
            assert!((c.eval(x) - target).abs() < 1e-13);
            // the quadratic is reproduced exactly
            assert!((x - (1.0 - (1.0 - target).sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn lagrange_slope_exact_on_quartic_nonuniform() {
        let xs = [0.0, 0.1, 0.35, 0.5, 0.9];
        let f = |x: f64| x.powi(4) - 2.0 * x * x + x;
        let df = |x: f64| 4.0 * x.powi(3) - 4.0 * x + 1.0;
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for i in 0..5 {
            assert!((lagrange_slope(&xs, &ys, i) - df(xs[i])).abs() < 1e-11);
        }
    }

    #[test]
    fn lazy_matches_eager() {
        let xs = grid(0.0, 2.0, 17);
        let ys: Vec<f64> = xs.iter().map(|x| x * x + (3.0 * x).sin() * 0.1).collect();
        let eager = MonotoneCubic::new(xs.clone(), ys.clone());
        let mut lazy = LazyCubic::new(&xs, &ys);
        for k in 0..=40 {
            let x = k as f64 / 20.0;
            assert_eq!(eager.eval(x), lazy.eval(x));
        }
        assert_eq!(eager.solve_increasing(1.3, 2, 16), lazy.solve_increasing(1.3, 2, 16));
    }

    #[test]
    fn even_lazy_matches_mirrored_eager() {
        let half = grid(0.0, 0.6, 9);
        let f = |y: f64| 1.0 - (1.0 - y * y).sqrt();
        let vs: Vec<f64> = half.iter().map(|&y| f(y)).collect();
        let full_x: Vec<f64> = half.iter().rev().map(|y| -y).chain(half[1..].iter().copied()).collect();
        let full_y: Vec<f64> = vs.iter().rev().chain(vs[1..].iter()).copied().collect();
        let eager = MonotoneCubic::new(full_x, full_y);
        let mut lazy = LazyCubic::even(&half, &vs);
        for k in 0..=30 {
            let y = 0.02 * k as f64;
            assert_eq!(eager.eval(y), lazy.eval(y));
        }
        assert_eq!(eager.solve_increasing(0.05, 8, 16), lazy.solve_increasing(0.05, 0, 8));
    }

    #[test]
    fn monotone_data_gives_monotone_interpolant() {
        let xs = vec![0.0, 1.0, 1.1, 3.0, 3.05, 6.0];
        let ys = vec![0.0, 0.01, 2.0, 2.1, 5.0, 5.02];
        let c = MonotoneCubic::new(xs, ys);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=600 {
            let v = c.eval(k as f64 / 100.0);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }
}
