//! Inverted-graph chart near a pole.
//!
//! Near a pole the profile is written as `x = a + v(|y|)` (left pole) or
//! `x = b − v(|y|)` (right pole), with `v` the inverse of `u` on the cap.
//! Along the meridian `z = 0` the transversal second derivative of the
//! rotationally symmetric `v(y, z)` is `v_zz = v_y / y`, with the umbilic
//! limit `v_zz = v_yy` on the axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::params::{pow, FlowParams};
use crate::profile::{curvatures_at, three_point, ProfileCurve};

/// Default chart half-width as a fraction of the current `u_max`.
pub const DEFAULT_WIDTH_FRACTION: f64 = 0.6;

/// Fraction of the chart width, measured inward from its rim, shared with
/// the graph chart.
pub const DEFAULT_OVERLAP_FRACTION: f64 = 1.0 / 3.0;

/// Below this fraction of the width, `v_y / y` is replaced by its limit.
const AXIS_BLEND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pole {
    Left,
    Right,
}

impl Pole {
    pub fn name(self) -> &'static str {
        match self {
            Pole::Left => "left",
            Pole::Right => "right",
        }
    }
}

/// Values of `v` on a symmetric grid `y ∈ [−c, c]` containing 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleChart {
    pub(crate) pole: Pole,
    pub(crate) t: f64,
    pub(crate) width: f64,
    pub(crate) overlap_start: f64,
    pub(crate) ynodes: Vec<f64>,
    pub(crate) vvalues: Vec<f64>,
}

/// Symmetric uniform grid with `per_side` intervals on each side of 0.
pub(crate) fn symmetric_ynodes(width: f64, per_side: usize) -> Vec<f64> {
    let k = width / per_side as f64;
    let half: Vec<f64> = (0..=per_side)
        .map(|j| if j == per_side { width } else { k * j as f64 })
        .collect();
    half.iter().rev().map(|y| -y).chain(half.iter().skip(1).copied()).collect()
}

impl PoleChart {
    pub fn new(pole: Pole, t: f64, width: f64, ynodes: Vec<f64>, vvalues: Vec<f64>) -> Result<Self> {
        let n = ynodes.len();
        let bad = |msg: &str| Err(Error::InvalidCurve(format!("pole chart: {msg}")));
        if n < 5 || n.is_multiple_of(2) || vvalues.len() != n {
            return bad("need an odd number (≥ 5) of nodes with matching values");
        }
        if !(width > 0.0) || ynodes[n - 1] != width {
            return bad("last node must equal the chart width");
        }
        if ynodes[n / 2] != 0.0 || (0..n).any(|j| ynodes[j] != -ynodes[n - 1 - j]) {
            return bad("nodes must be symmetric about 0");
        }
        if ynodes.windows(2).any(|w| w[1] <= w[0]) {
            return bad("nodes must be strictly increasing");
        }
        if vvalues.iter().any(|v| !v.is_finite()) {
            return bad("non-finite value");
        }
        Ok(Self {
            pole,
            t,
            width,
            overlap_start: (1.0 - DEFAULT_OVERLAP_FRACTION) * width,
            ynodes,
            vvalues,
        })
    }

    /// Chart sampled from a closed-form `v` on a uniform grid.
    pub fn from_fn(pole: Pole, t: f64, width: f64, per_side: usize, v: impl Fn(f64) -> f64) -> Result<Self> {
        let ynodes = symmetric_ynodes(width, per_side);
        let vvalues = ynodes.iter().map(|&y| v(y.abs())).collect();
        Self::new(pole, t, width, ynodes, vvalues)
    }

    /// Moves the inner edge of the overlap annulus.
    pub fn with_overlap_start(mut self, overlap_start: f64) -> Self {
        self.overlap_start = overlap_start;
        self
    }

    pub fn pole(&self) -> Pole {
        self.pole
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Half-width `c` of the chart.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn overlap_start(&self) -> f64 {
        self.overlap_start
    }

    pub fn ynodes(&self) -> &[f64] {
        &self.ynodes
    }

    pub fn vvalues(&self) -> &[f64] {
        &self.vvalues
    }

    pub(crate) fn center(&self) -> usize {
        self.ynodes.len() / 2
    }

    /// Intervals on each side of the axis.
    pub fn per_side(&self) -> usize {
        self.ynodes.len() / 2
    }

    pub fn interpolant(&self) -> MonotoneCubic {
        MonotoneCubic::new(self.ynodes.clone(), self.vvalues.clone())
    }

    /// Radius `y ≥ 0` at which the surface sits `offset` away from the pole
    /// tangent plane.
    pub fn radius_at_offset(&self, offset: f64) -> f64 {
        let interp = self.interpolant();
        solve_radius(&interp, self.center(), offset)
    }
}

pub(crate) fn solve_radius(interp: &MonotoneCubic, center: usize, offset: f64) -> f64 {
    let last = interp.nodes().len() - 1;
    interp.solve_increasing(offset, center, last).max(0.0)
}

/// Chart quantities at one node of the meridian trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ChartPoint {
    pub v_y: f64,
    pub kappa_rad: f64,
    pub kappa_axi: f64,
    /// `v_t`, positive for an inward-moving pole cap.
    pub v_t: f64,
    /// Linearized coefficient of `v_yy`.
    pub diffusion_yy: f64,
    /// Linearized coefficient of the transversal `v_zz`.
    pub diffusion_zz: f64,
}

/// Evaluates the chart equation from `v_y`, `v_yy`, `v_zz` (both second
/// derivatives already clamped nonnegative).
pub(crate) fn chart_point(v_y: f64, v_yy: f64, v_zz: f64, params: &FlowParams) -> ChartPoint {
    let g = 1.0 + v_y * v_y;
    let (a1, a2, mu) = (params.alpha1(), params.alpha2(), params.beta());
    let gm = pow(g, mu);
    let zz_a1 = pow(v_zz, a1);
    let yy_a2 = pow(v_yy, a2);
    ChartPoint {
        v_y,
        kappa_rad: v_zz / g.sqrt(),
        kappa_axi: v_yy / (g * g.sqrt()),
        v_t: zz_a1 * yy_a2 / gm,
        diffusion_yy: a2 * (yy_a2 / v_yy) * zz_a1 / gm,
        diffusion_zz: a1 * (zz_a1 / v_zz) * yy_a2 / gm,
    }
}

/// Raw `(v_y, v_yy, v_zz)` at interior node `j` of a chart.
pub(crate) fn chart_derivatives(y: &[f64], v: &[f64], j: usize, width: f64) -> (f64, f64, f64) {
    let (v_y, v_yy) = three_point(y[j] - y[j - 1], y[j + 1] - y[j], v[j - 1], v[j], v[j + 1]);
    let v_zz = if y[j].abs() < AXIS_BLEND * width {
        v_yy
    } else {
        v_y / y[j]
    };
    (v_y, v_yy, v_zz)
}

/// Principal curvatures at each interior chart node.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartCurvatures {
    pub ynodes: Vec<f64>,
    pub kappa_rad: Vec<f64>,
    pub kappa_axi: Vec<f64>,
}

fn interior_points(chart: &PoleChart, params: &FlowParams) -> Result<Vec<(f64, ChartPoint)>> {
    let (y, v) = (&chart.ynodes, &chart.vvalues);
    (1..y.len() - 1)
        .map(|j| {
            let (v_y, v_yy, v_zz) = chart_derivatives(y, v, j, chart.width);
            if v_yy <= 0.0 || v_zz <= 0.0 {
                return Err(Error::DegenerateChart { index: j, v_yy });
            }
            Ok((y[j], chart_point(v_y, v_yy, v_zz, params)))
        })
        .collect()
}

/// `κ_rad = v_zz/√(1+v_y²)` and `κ_axi = v_yy/(1+v_y²)^{3/2}` at the interior
/// nodes of the chart.
pub fn pole_curvatures(chart: &PoleChart) -> Result<ChartCurvatures> {
    // curvatures do not depend on the exponents
    let unit = FlowParams::new(1.0, 1.0)?;
    let pts = interior_points(chart, &unit)?;
    Ok(ChartCurvatures {
        ynodes: pts.iter().map(|p| p.0).collect(),
        kappa_rad: pts.iter().map(|p| p.1.kappa_rad).collect(),
        kappa_axi: pts.iter().map(|p| p.1.kappa_axi).collect(),
    })
}

/// `v_t = v_zz^{α1} v_yy^{α2} / (1+v_y²)^β` at the interior nodes.
pub fn pole_speed(chart: &PoleChart, params: &FlowParams) -> Result<Vec<f64>> {
    Ok(interior_points(chart, params)?.into_iter().map(|p| p.1.v_t).collect())
}

/// Arrays of a cap measured from its pole: `s` is the axial distance from
/// the tip (`s[0] = 0`), `u` the height there.
pub(crate) fn cap_arrays(curve: &ProfileCurve, pole: Pole) -> (Vec<f64>, Vec<f64>) {
    let (x, u) = (curve.nodes(), curve.values());
    match pole {
        Pole::Left => (x.iter().map(|xi| xi - curve.a()).collect(), u.to_vec()),
        Pole::Right => (
            x.iter().rev().map(|xi| curve.b() - xi).collect(),
            u.iter().rev().copied().collect(),
        ),
    }
}

/// Inverts the cap: `v(y)` on the given radii, by solving `u²(s) = y²` on
/// the rising part of the cap. Errors if the cap is not strictly rising up
/// to the largest requested radius.
pub(crate) fn invert_cap(s: &[f64], u: &[f64], radii: &[f64]) -> Result<Vec<f64>> {
    let top = radii.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
    let (imax, umax) = u
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, x)| if x > b.1 { (i, x) } else { b });
    if !(top < umax) || imax == 0 {
        return Err(Error::NonMonotoneCap { width: top });
    }
    let reach = u.iter().position(|&x| x >= top).unwrap_or(imax);
    if u[..=reach].windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotoneCap { width: top });
    }
    let q: Vec<f64> = u.iter().map(|x| x * x).collect();
    let interp = MonotoneCubic::new(s.to_vec(), q);
    Ok(radii
        .iter()
        .map(|y| {
            if *y == 0.0 {
                0.0
            } else {
                interp.solve_increasing(y * y, 0, imax)
            }
        })
        .collect())
}

/// Builds the chart of `curve` at `pole` with half-width `width`, with
/// `per_side` intervals on each side of the axis.
pub fn build_pole_chart_with(curve: &ProfileCurve, pole: Pole, width: f64, per_side: usize) -> Result<PoleChart> {
    let ynodes = symmetric_ynodes(width, per_side);
    let (s, u) = cap_arrays(curve, pole);
    let vvalues = invert_cap(&s, &u, &ynodes)?;
    PoleChart::new(pole, curve.t(), width, ynodes, vvalues)
}

/// Default chart resolution for a curve of `nodes` nodes.
pub fn default_per_side(nodes: usize) -> usize {
    (nodes / 5).max(8)
}

/// Builds the chart of `curve` at `pole` by monotone inversion of the cap.
pub fn build_pole_chart(curve: &ProfileCurve, pole: Pole, width: f64) -> Result<PoleChart> {
    build_pole_chart_with(curve, pole, width, default_per_side(curve.len()))
}

/// Relative disagreement between the two charts at matched surface points.
pub(crate) fn cap_defect(
    s: &[f64],
    u: &[f64],
    chart: &PoleChart,
    params: &FlowParams,
    concavity_scale: f64,
) -> Result<Option<f64>> {
    let (y, v) = (&chart.ynodes, &chart.vvalues);
    let n = s.len();
    let mut worst: Option<f64> = None;
    let graph_at = |i: usize| -> Result<(f64, f64, f64)> {
        let (ux, uxx) = three_point(s[i] - s[i - 1], s[i + 1] - s[i], u[i - 1], u[i], u[i + 1]);
        let neg = crate::profile::clamp_concave(uxx, concavity_scale, i)?;
        let g = crate::profile::graph_point(u[i], ux, neg, params);
        Ok((g.kappa_rad, g.kappa_axi, params.speed(g.kappa_rad, g.kappa_axi)))
    };
    for j in chart.center() + 1..y.len() - 1 {
        if y[j] < chart.overlap_start {
            continue;
        }
        let target = v[j];
        let k = s.partition_point(|&si| si <= target);
        if k < 2 || k + 1 >= n {
            continue;
        }
        let i = k - 1;
        let w = (target - s[i]) / (s[i + 1] - s[i]);
        let (r0, a0, p0) = graph_at(i)?;
        let (r1, a1, p1) = graph_at(i + 1)?;
        let lerp = |l: f64, r: f64| l + w * (r - l);
        let (v_y, v_yy, v_zz) = chart_derivatives(y, v, j, chart.width);
        if v_yy <= 0.0 || v_zz <= 0.0 {
            return Err(Error::DegenerateChart { index: j, v_yy });
        }
        let c = chart_point(v_y, v_yy, v_zz, params);
        let speed = params.speed(c.kappa_rad, c.kappa_axi);
        let d = [
            (lerp(r0, r1) - c.kappa_rad).abs() / c.kappa_rad,
            (lerp(a0, a1) - c.kappa_axi).abs() / c.kappa_axi,
            (lerp(p0, p1) - speed).abs() / speed,
        ]
        .into_iter()
        .fold(0.0_f64, f64::max);
        worst = Some(worst.map_or(d, |m| m.max(d)));
    }
    Ok(worst)
}

/// Largest relative disagreement of `κ_rad`, `κ_axi` and the normal speed
/// between the graph chart and the pole chart over their overlap annulus.
pub fn stitch_consistency(curve: &ProfileCurve, chart: &PoleChart, params: &FlowParams) -> Result<f64> {
    let tol = 1e-12 * curve.t().abs().max(1.0);
    if (curve.t() - chart.t).abs() > tol {
        return Err(Error::ChartMismatch {
            chart_t: chart.t,
            curve_t: curve.t(),
        });
    }
    // validates the graph side as a whole
    curvatures_at(curve, params)?;
    let (s, u) = cap_arrays(curve, chart.pole);
    cap_defect(&s, &u, chart, params, curve.concavity_scale())?.ok_or(Error::EmptyOverlap)
}
