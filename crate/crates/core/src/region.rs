//! The closed upper meridian region `{a ≤ x ≤ b, 0 ≤ y ≤ U(x)}` of a
//! sampled profile, with `U` the piecewise-linear interpolant of the nodes.
//!
//! For a concave profile the region is a convex polygon, so the distance
//! from a convex set to it is maximal at a vertex. Bodies of revolution are
//! symmetric about the axis, which lets every distance be taken in the upper
//! half-plane.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Region<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

impl<'a> Region<'a> {
    pub(crate) fn new(x: &'a [f64], y: &'a [f64]) -> Self {
        debug_assert_eq!(x.len(), y.len());
        Self { x, y }
    }

    fn height(&self, px: f64) -> f64 {
        let (x, y) = (self.x, self.y);
        let j = x.partition_point(|&xi| xi < px);
        if j < x.len() && x[j] == px {
            return y[j];
        }
        let (l, r) = (j - 1, j);
        y[l] + (y[r] - y[l]) * (px - x[l]) / (x[r] - x[l])
    }

    fn contains(&self, px: f64, py: f64) -> bool {
        let (a, b) = (self.x[0], self.x[self.x.len() - 1]);
        a <= px && px <= b && 0.0 <= py && py <= self.height(px)
    }

    /// Euclidean distance from `(px, py)` to the region, zero inside.
    pub(crate) fn distance(&self, px: f64, py: f64) -> f64 {
        if self.contains(px, py) {
            return 0.0;
        }
        let n = self.x.len();
        let boundary = (0..n - 1)
            .map(|i| segment_distance(px, py, self.x[i], self.y[i], self.x[i + 1], self.y[i + 1]))
            .fold(f64::INFINITY, f64::min);
        boundary.min(segment_distance(px, py, self.x[0], 0.0, self.x[n - 1], 0.0))
    }

    /// Distance from the axis point `(cx, 0)` to the curved part of the
    /// boundary.
    pub(crate) fn inradius(&self, cx: f64) -> f64 {
        (0..self.x.len() - 1)
            .map(|i| segment_distance(cx, 0.0, self.x[i], self.y[i], self.x[i + 1], self.y[i + 1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// `sup_{q ∈ self} dist(q, other)`: how far `self` sticks out of `other`.
    pub(crate) fn excess_over(&self, other: &Region) -> f64 {
        self.x
            .iter()
            .zip(self.y)
            .map(|(&px, &py)| other.distance(px, py))
            .fold(0.0, f64::max)
    }
}

fn segment_distance(px: f64, py: f64, ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let s = if len2 > 0.0 {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (px - ax - s * dx).hypot(py - ay - s * dy)
}

/// Hausdorff distance between the two regions.
pub(crate) fn hausdorff(a: &Region, b: &Region) -> f64 {
    a.excess_over(b).max(b.excess_over(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> (Vec<f64>, Vec<f64>) {
        (vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0])
    }

    #[test]
    fn distance_to_triangle() {
        let (x, y) = tent();
        let r = Region::new(&x, &y);
        assert_eq!(r.distance(1.0, 0.5), 0.0);
        assert_eq!(r.distance(1.0, 1.0), 0.0);
        assert!((r.distance(1.0, 2.0) - 1.0).abs() < 1e-15);
        assert!((r.distance(3.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((r.distance(1.0, -0.5) - 0.5).abs() < 1e-15);
        // outside the slanted edge y = x
        assert!((r.distance(0.0, 1.0) - 0.5_f64.sqrt()).abs() < 1e-15);
        assert!((r.inradius(1.0) - 0.5_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn nested_regions_have_one_sided_excess() {
        let (x, y) = tent();
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        let (small, big) = (Region::new(&x, &y), Region::new(&x, &y2));
        assert_eq!(small.excess_over(&big), 0.0);
        assert!(big.excess_over(&small) > 0.0);
        assert_eq!(hausdorff(&small, &big), big.excess_over(&small));
    }
}
