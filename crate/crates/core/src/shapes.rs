use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ProfileCurve;

/// Ellipsoid of revolution about the x-axis, profile
/// `u(x) = B·sqrt(1 − ((x − center)/A)²)`. A sphere has `A = B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spheroid {
    pub center: f64,
    /// Semi-axis `A` along the axis of symmetry.
    pub axial: f64,
    /// Equatorial radius `B`.
    pub equatorial: f64,
}

impl Spheroid {
    pub fn new(center: f64, axial: f64, equatorial: f64) -> Result<Self> {
        if !(axial > 0.0 && equatorial > 0.0 && center.is_finite()) {
            return Err(Error::InvalidCurve(format!(
                "spheroid needs positive semi-axes, got A = {axial}, B = {equatorial}"
            )));
        }
        Ok(Self {
            center,
            axial,
            equatorial,
        })
    }

    pub fn sphere(center: f64, radius: f64) -> Result<Self> {
        Self::new(center, radius, radius)
    }

    pub fn a(&self) -> f64 {
        self.center - self.axial
    }

    pub fn b(&self) -> f64 {
        self.center + self.axial
    }

    pub fn height(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.axial;
        self.equatorial * (1.0 - s * s).max(0.0).sqrt()
    }

    /// Axial distance from the pole tangent plane to the surface at radius `y`.
    pub fn pole_offset(&self, y: f64) -> f64 {
        let r = y / self.equatorial;
        self.axial * (1.0 - (1.0 - r * r).max(0.0).sqrt())
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.axial * self.equatorial * self.equatorial
    }

    /// Radius of the smallest concentric sphere containing the body.
    pub fn circumradius(&self) -> f64 {
        self.axial.max(self.equatorial)
    }

    /// Uniform `n`-node sampling of the profile on `[a, b]`.
    pub fn profile(&self, n: usize, t: f64) -> Result<ProfileCurve> {
        let nodes = symmetric_nodes(self.center, self.axial, n);
        let mut values: Vec<f64> = nodes.iter().map(|&x| self.height(x)).collect();
        values[0] = 0.0;
        values[n - 1] = 0.0;
        ProfileCurve::new(t, nodes, values)
    }
}

/// `n` uniform nodes on `[center − half, center + half]` whose offsets from
/// `center` are exactly antisymmetric.
pub(crate) fn symmetric_offsets(half: f64, n: usize) -> Vec<f64> {
    let step = half / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let k = 2.0 * i as f64 - (n - 1) as f64;
            if i == 0 {
                -half
            } else if i + 1 == n {
                half
            } else {
                k * step
            }
        })
        .collect()
}

pub(crate) fn symmetric_nodes(center: f64, half: f64, n: usize) -> Vec<f64> {
    symmetric_offsets(half, n).into_iter().map(|o| center + o).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_are_antisymmetric() {
        for n in [5, 6, 400, 401] {
            let o = symmetric_offsets(0.7, n);
            for i in 0..n {
                assert_eq!(o[i], -o[n - 1 - i]);
            }
            assert!(o.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn pole_offset_inverts_height() {
        let s = Spheroid::new(1.0, 1.0, 0.5).unwrap();
        for y in [0.0, 0.1, 0.25, 0.4] {
            let x = s.a() + s.pole_offset(y);
            assert!((s.height(x) - y).abs() < 1e-14);
        }
        // closed form from the inverse: v(0.25) = 1 − sqrt(0.75)
        assert!((s.pole_offset(0.25) - (1.0 - 0.75_f64.sqrt())).abs() < 1e-15);
    }
}
