//! Meridian profile of an axially symmetric body and its pointwise geometry.
//!
//! The surface is obtained by revolving the graph `u(x) ≥ 0`, `x ∈ [a, b]`,
//! about the x-axis. Derivatives are taken by three-point divided
//! differences at interior nodes only: the graph chart degenerates at the
//! poles, which belong to [`crate::pole`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::params::{pow, FlowParams};

/// Relative threshold above which a positive second difference counts as a
/// loss of concavity.
pub const CONCAVITY_TOLERANCE: f64 = 1e-8;

/// Relative spacing deviation below which a grid is treated as uniform.
const UNIFORM_TOLERANCE: f64 = 1e-12;

/// The graph `u(·, t)` on `[a, b]` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    t: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl ProfileCurve {
    pub fn new(t: f64, nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidCurve(format!("time {t} is not a nonnegative number")));
        }
        if nodes.len() < 2 {
            return Err(Error::InvalidCurve("need at least two nodes".into()));
        }
        if nodes.len() != values.len() {
            return Err(Error::InvalidCurve(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve("non-finite entry".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCurve(format!(
                "nodes not strictly increasing at index {}",
                i + 1
            )));
        }
        let last = values.len() - 1;
        if values[0] != 0.0 || values[last] != 0.0 {
            return Err(Error::InvalidCurve(
                "profile must vanish at both endpoint nodes".into(),
            ));
        }
        if let Some(i) = values[1..last].iter().position(|&u| u <= 0.0) {
            return Err(Error::NonPositiveProfile {
                index: i + 1,
                value: values[i + 1],
            });
        }
        Ok(Self { t, nodes, values })
    }

    /// Uniform sampling of `f` on `[a, b]` with `n` nodes; the endpoint
    /// values are pinned to zero.
    pub fn from_fn(t: f64, a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || !(b > a) {
            return Err(Error::InvalidCurve(format!("bad sampling [{a}, {b}] with {n} nodes")));
        }
        let nodes = uniform_nodes(a, b, n);
        let mut values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        values[0] = 0.0;
        values[n - 1] = 0.0;
        Self::new(t, nodes, values)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a() + self.b())
    }

    pub fn width(&self) -> f64 {
        self.b() - self.a()
    }

    /// Index and value of the largest node height.
    pub fn max_node(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, u)| if u > best.1 { (i, u) } else { best })
    }

    pub fn max_height(&self) -> f64 {
        self.max_node().1
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Same profile shifted along the axis.
    pub fn translated(&self, shift: f64) -> Self {
        Self {
            t: self.t,
            nodes: self.nodes.iter().map(|x| x + shift).collect(),
            values: self.values.clone(),
        }
    }

    /// Dilation by `lambda` about the axis point `origin`.
    pub fn dilated(&self, lambda: f64, origin: f64) -> Self {
        Self {
            t: self.t,
            nodes: self.nodes.iter().map(|x| origin + lambda * (x - origin)).collect(),
            values: self.values.iter().map(|u| lambda * u).collect(),
        }
    }

    /// Whether node spacing is constant to within roundoff.
    pub fn is_uniform(&self) -> bool {
        is_uniform(&self.nodes)
    }

    /// Interpolant of `u²`, which stays smooth through the poles where `u`
    /// itself has a square-root singularity.
    pub fn squared_interpolant(&self) -> MonotoneCubic {
        MonotoneCubic::new(
            self.nodes.clone(),
            self.values.iter().map(|u| u * u).collect(),
        )
    }

    /// Height at an arbitrary axis position (zero outside `[a, b]`).
    pub fn height_at(&self, x: f64) -> f64 {
        if x <= self.a() || x >= self.b() {
            return 0.0;
        }
        self.squared_interpolant().eval(x).max(0.0).sqrt()
    }

    /// Threshold used by concavity tests: `max|u| / (b − a)²`.
    pub fn concavity_scale(&self) -> f64 {
        let w = self.width();
        self.max_height() / (w * w)
    }
}

pub(crate) fn uniform_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + h * i as f64 })
        .collect()
}

/// Pointwise principal curvatures and normal speed at interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    /// Axis positions of the interior nodes.
    pub nodes: Vec<f64>,
    pub kappa_rad: Vec<f64>,
    pub kappa_axi: Vec<f64>,
    pub speed: Vec<f64>,
}

impl CurvatureField {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// First and second derivatives from the three-point divided differences
/// with left spacing `hl` and right spacing `hr`.
pub(crate) fn three_point(hl: f64, hr: f64, um: f64, u0: f64, up: f64) -> (f64, f64) {
    if hl == hr {
        let ux = (up - um) / (2.0 * hl);
        let uxx = ((up + um) - 2.0 * u0) / (hl * hl);
        return (ux, uxx);
    }
    let denom = hl * hr * (hl + hr);
    let ux = (hl * hl * up - hr * hr * um + (hr * hr - hl * hl) * u0) / denom;
    let uxx = 2.0 * ((hl * up + hr * um) - (hl + hr) * u0) / denom;
    (ux, uxx)
}

/// Graph-chart quantities at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GraphPoint {
    pub kappa_rad: f64,
    pub kappa_axi: f64,
    /// `u_t`, negative for an inward-moving surface.
    pub u_t: f64,
    /// Linearized diffusion coefficient of the graph equation.
    pub diffusion: f64,
}

/// Evaluates the graph chart at one node. `neg_uxx` is `−u_xx`, already
/// clamped to be nonnegative.
pub(crate) fn graph_point(u: f64, ux: f64, neg_uxx: f64, params: &FlowParams) -> GraphPoint {
    let g = 1.0 + ux * ux;
    let kappa_rad = 1.0 / (u * g.sqrt());
    let kappa_axi = neg_uxx / (g * g.sqrt());
    let (a1, a2, beta) = (params.alpha1(), params.alpha2(), params.beta());
    let denom = pow(u, a1) * pow(g, beta);
    let lifted = pow(neg_uxx, a2);
    let u_t = -lifted / denom;
    let below = if neg_uxx > 0.0 {
        lifted / neg_uxx
    } else {
        pow(neg_uxx, a2 - 1.0)
    };
    let diffusion = a2 * below / denom;
    GraphPoint {
        kappa_rad,
        kappa_axi,
        u_t,
        diffusion,
    }
}

/// Resolves `−u_xx` against the concavity threshold: tiny positive second
/// differences are clamped to zero, larger ones are an error.
pub(crate) fn clamp_concave(uxx: f64, scale: f64, index: usize) -> Result<f64> {
    let neg = -uxx;
    if neg >= 0.0 {
        Ok(neg)
    } else if uxx <= CONCAVITY_TOLERANCE * scale {
        Ok(0.0)
    } else {
        Err(Error::NonConcave {
            index,
            second_difference: uxx,
        })
    }
}

struct NodeDerivatives {
    index: usize,
    u: f64,
    ux: f64,
    neg_uxx: f64,
}

fn interior_derivatives(curve: &ProfileCurve) -> Result<Vec<NodeDerivatives>> {
    let n = curve.len();
    if n < 5 {
        return Err(Error::InvalidCurve(format!(
            "curvatures need at least 5 nodes, got {n}"
        )));
    }
    let (x, u) = (curve.nodes(), curve.values());
    let scale = curve.concavity_scale();
    (1..n - 1)
        .map(|i| {
            if u[i] <= 0.0 {
                return Err(Error::NonPositiveProfile { index: i, value: u[i] });
            }
            let (ux, uxx) = three_point(x[i] - x[i - 1], x[i + 1] - x[i], u[i - 1], u[i], u[i + 1]);
            let neg_uxx = clamp_concave(uxx, scale, i)?;
            Ok(NodeDerivatives {
                index: i,
                u: u[i],
                ux,
                neg_uxx,
            })
        })
        .collect()
}

/// `κ_rad = 1/(u√(1+u_x²))`, `κ_axi = −u_xx/(1+u_x²)^{3/2}` and the normal
/// speed at every interior node.
pub fn curvatures_at(curve: &ProfileCurve, params: &FlowParams) -> Result<CurvatureField> {
    let derivs = interior_derivatives(curve)?;
    let mut field = CurvatureField {
        nodes: Vec::with_capacity(derivs.len()),
        kappa_rad: Vec::with_capacity(derivs.len()),
        kappa_axi: Vec::with_capacity(derivs.len()),
        speed: Vec::with_capacity(derivs.len()),
    };
    for d in derivs {
        let g = graph_point(d.u, d.ux, d.neg_uxx, params);
        field.nodes.push(curve.nodes()[d.index]);
        field.kappa_rad.push(g.kappa_rad);
        field.kappa_axi.push(g.kappa_axi);
        field.speed.push(params.speed(g.kappa_rad, g.kappa_axi));
    }
    Ok(field)
}

/// `u_t = −(−u_xx)^{α2} / (u^{α1} (1+u_x²)^β)` at every interior node.
pub fn speed_field(curve: &ProfileCurve, params: &FlowParams) -> Result<Vec<f64>> {
    Ok(interior_derivatives(curve)?
        .into_iter()
        .map(|d| graph_point(d.u, d.ux, d.neg_uxx, params).u_t)
        .collect())
}

/// Enclosed volume `π ∫ u² dx` by composite Simpson, in its nonuniform form
/// when the nodes are not equally spaced.
pub fn volume(curve: &ProfileCurve) -> f64 {
    PI * squared_integral(curve.nodes(), curve.values())
}

pub(crate) fn is_uniform(x: &[f64]) -> bool {
    let n = x.len();
    let h = (x[n - 1] - x[0]) / (n - 1) as f64;
    x.windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= UNIFORM_TOLERANCE * h.abs().max(f64::MIN_POSITIVE))
}

/// `∫ u² dx` over the nodes.
pub(crate) fn squared_integral(x: &[f64], u: &[f64]) -> f64 {
    let sq: Vec<f64> = u.iter().map(|u| u * u).collect();
    let intervals = x.len() - 1;
    if intervals < 2 {
        0.5 * (x[1] - x[0]) * (sq[0] + sq[1])
    } else if is_uniform(x) {
        simpson_uniform(&sq, (x[intervals] - x[0]) / intervals as f64)
    } else {
        simpson_nonuniform(x, &sq)
    }
}

/// Integrates the interpolating quadratic over each pair of intervals. An
/// odd interval count closes with the quadratic through the last three
/// nodes, integrated over the last interval only.
pub(crate) fn simpson_nonuniform(x: &[f64], f: &[f64]) -> f64 {
    let intervals = x.len() - 1;
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 <= intervals {
        let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
        total += (h0 + h1) / 6.0
            * ((2.0 - h1 / h0) * f[i] + (h0 + h1) * (h0 + h1) / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
        i += 2;
    }
    if i < intervals {
        let j = intervals - 2;
        let (h0, h1) = (x[j + 1] - x[j], x[j + 2] - x[j + 1]);
        total += f[j + 2] * h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1)) + f[j + 1] * h1 * (h1 + 3.0 * h0) / (6.0 * h0)
            - f[j] * h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    }
    total
}

/// Composite Simpson; an odd interval count closes with the 3/8 rule.
pub(crate) fn simpson_uniform(f: &[f64], h: f64) -> f64 {
    let intervals = f.len() - 1;
    let simpson = |g: &[f64]| -> f64 {
        let m = g.len() - 1;
        let mut s = g[0] + g[m];
        for (k, v) in g.iter().enumerate().take(m).skip(1) {
            s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        s * h / 3.0
    };
    if intervals.is_multiple_of(2) {
        simpson(f)
    } else {
        let m = intervals - 3;
        let head = if m > 0 { simpson(&f[..=m]) } else { 0.0 };
        let tail = 3.0 * h / 8.0 * (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[m + 3]);
        head + tail
    }
}

/// Largest distance between two points `(x_i, ±u_i)` of the meridian
/// boundary, by exhaustive pairwise scan.
pub fn diameter(curve: &ProfileCurve) -> f64 {
    let (x, u) = (curve.nodes(), curve.values());
    let mut best = 0.0_f64;
    for i in 0..x.len() {
        for j in i..x.len() {
            let dx = x[i] - x[j];
            let dy = u[i] + u[j];
            best = best.max(dx * dx + dy * dy);
        }
    }
    best.sqrt()
}

/// `max_i |u(p + s_i) − u(p − s_i)|` with `p` the midpoint of `[a, b]`.
pub fn evenness_defect(curve: &ProfileCurve) -> f64 {
    let n = curve.len();
    if n < 3 {
        return 0.0;
    }
    let (x, u) = (curve.nodes(), curve.values());
    let p = curve.midpoint();
    let snap = 1e-12 * curve.width();
    let interp = curve.squared_interpolant();
    let mut worst = 0.0_f64;
    for i in 1..n - 1 {
        let xr = 2.0 * p - x[i];
        let j = n - 1 - i;
        let reflected = if (x[j] - xr).abs() <= snap {
            u[j]
        } else if xr <= curve.a() || xr >= curve.b() {
            0.0
        } else {
            interp.eval(xr).max(0.0).sqrt()
        };
        worst = worst.max((u[i] - reflected).abs());
    }
    worst
}

/// Leftmost `x_t` with `π (b − a) u²(x_t) = V`.
pub fn mean_value_point(curve: &ProfileCurve) -> Result<f64> {
    let v = volume(curve);
    if !(v > 0.0) {
        return Err(Error::NotFound("profile encloses no volume".into()));
    }
    let target = v / (PI * curve.width());
    let interp = curve.squared_interpolant();
    let q = interp.values();
    let (imax, _) = curve.max_node();
    for j in 0..imax {
        if q[j] <= target && target <= q[j + 1] {
            let x = interp.solve_increasing(target, j, j + 1);
            return Ok(x);
        }
    }
    Err(Error::NotFound(format!(
        "no crossing of u² = {target:e} on the rising half"
    )))
}
