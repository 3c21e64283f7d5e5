use crate::error::{Error, Result};
use crate::interp::{LazyCubic, MonotoneCubic};
use crate::params::FlowParams;
use crate::pole::{
    cap_arrays, cap_defect, chart_point, default_per_side, invert_cap, symmetric_ynodes, ChartPoint, Pole, PoleChart,
    DEFAULT_OVERLAP_FRACTION, DEFAULT_WIDTH_FRACTION,
};
use crate::profile::{clamp_concave, graph_point, three_point, GraphPoint, ProfileCurve};
use crate::shapes::{symmetric_offsets, Spheroid};

/// Smallest node count a regrid may produce.
pub const MIN_NODES: usize = 10;

/// Default bound on the relative overlap disagreement accepted by a step.
pub const DEFAULT_STITCH_TOLERANCE: f64 = 0.05;

const POLES: [Pole; 2] = [Pole::Left, Pole::Right];

/// Resolution requested from [`FlowState::regrid_to`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridTarget {
    Nodes(usize),
    Spacing(f64),
}

/// Half of an even pole chart: `y[0] = 0 < … < y[m] = width`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Chart {
    pub width: f64,
    pub inner: f64,
    pub k: f64,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
}

impl Chart {
    fn new(width: f64, per_side: usize, mut v: impl FnMut(f64) -> f64) -> Self {
        let y = symmetric_ynodes(width, per_side)[per_side..].to_vec();
        let v = y.iter().map(|&y| if y == 0.0 { 0.0 } else { v(y) }).collect();
        Self {
            width,
            inner: (1.0 - DEFAULT_OVERLAP_FRACTION) * width,
            k: width / per_side as f64,
            y,
            v,
        }
    }

    fn per_side(&self) -> usize {
        self.y.len() - 1
    }

    fn full(&self) -> (Vec<f64>, Vec<f64>) {
        let y = self.y.iter().rev().map(|y| -y).chain(self.y[1..].iter().copied()).collect();
        let v = self.v.iter().rev().chain(self.v[1..].iter()).copied().collect();
        (y, v)
    }

    fn to_pole_chart(&self, pole: Pole, t: f64) -> PoleChart {
        let (ynodes, vvalues) = self.full();
        PoleChart {
            pole,
            t,
            width: self.width,
            overlap_start: self.inner,
            ynodes,
            vvalues,
        }
    }

    /// `(v_y, v_yy, v_zz)` at half-grid node `j < m`, using the even
    /// reflection at the axis.
    fn derivatives(&self, j: usize) -> (f64, f64, f64) {
        let (k, v) = (self.k, &self.v);
        if j == 0 {
            let v_yy = 2.0 * (v[1] - v[0]) / (k * k);
            (0.0, v_yy, v_yy)
        } else {
            let (v_y, v_yy) = three_point(k, k, v[j - 1], v[j], v[j + 1]);
            (v_y, v_yy, v_y / self.y[j])
        }
    }
}

/// Graph-chart quantities at a node evolved by the graph equation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GraphNode {
    pub index: usize,
    pub point: GraphPoint,
    pub uxx: f64,
}

/// Every evolved quantity of a state, evaluated once per step.
#[derive(Debug, Clone)]
pub(crate) struct Field {
    pub graph: Vec<GraphNode>,
    pub charts: [Vec<ChartPoint>; 2],
    pub dt_max: f64,
    pub min_diffusion: f64,
}

/// Composite representation of one evolving surface: the meridian graph
/// `u` on a uniform grid anchored at a fixed center, and two even pole
/// charts. Interior offsets stay fixed between regrids while the tips
/// `a = center − ℓ_left` and `b = center + ℓ_right` move.
#[derive(Debug, Clone)]
pub struct FlowState {
    params: FlowParams,
    t: f64,
    center: f64,
    ell: [f64; 2],
    offsets: Vec<f64>,
    u: Vec<f64>,
    charts: [Chart; 2],
}

/// Partition weight rising from 0 to 1 with two vanishing derivatives at
/// both ends.
fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 + s * (6.0 * s - 15.0))
}

fn first_max(h: &[f64]) -> usize {
    h.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, x)| if x > b.1 { (i, x) } else { b })
        .0
}

impl FlowState {
    /// Samples a spheroid in closed form on `n` nodes.
    pub fn from_spheroid(shape: &Spheroid, params: FlowParams, n: usize) -> Result<Self> {
        check_nodes(n)?;
        let offsets = symmetric_offsets(shape.axial, n);
        let mut u: Vec<f64> = offsets
            .iter()
            .map(|o| {
                let s = o / shape.axial;
                shape.equatorial * (1.0 - s * s).max(0.0).sqrt()
            })
            .collect();
        u[0] = 0.0;
        u[n - 1] = 0.0;
        let width = DEFAULT_WIDTH_FRACTION * u.iter().fold(0.0_f64, |m, &x| m.max(x));
        let chart = Chart::new(width, default_per_side(n), |y| shape.pole_offset(y));
        let state = Self {
            params,
            t: 0.0,
            center: shape.center,
            ell: [shape.axial, shape.axial],
            offsets,
            u,
            charts: [chart.clone(), chart],
        };
        state.field()?;
        Ok(state)
    }

    /// Resamples an arbitrary concave profile onto `n` uniform nodes and
    /// builds both charts by inverting its caps.
    pub fn from_curve(curve: &ProfileCurve, params: FlowParams, n: usize) -> Result<Self> {
        check_nodes(n)?;
        let half = 0.5 * curve.width();
        let center = curve.midpoint();
        let offsets = symmetric_offsets(half, n);
        let mut u = vec![0.0; n];
        for (side, pole) in POLES.into_iter().enumerate() {
            let (s, h) = cap_arrays(curve, pole);
            let q: Vec<f64> = h.iter().map(|x| x * x).collect();
            let interp = MonotoneCubic::unlimited(s, q);
            for i in side_range(side, n) {
                let idx = side_index(side, n, i);
                u[idx] = sample_height(&interp, half + offsets[i])?;
            }
        }
        let width = DEFAULT_WIDTH_FRACTION * u.iter().fold(0.0_f64, |m, &x| m.max(x));
        let per_side = default_per_side(n);
        let mut charts = Vec::with_capacity(2);
        for pole in POLES {
            let half_y = symmetric_ynodes(width, per_side)[per_side..].to_vec();
            let (s, h) = cap_arrays(curve, pole);
            let v = invert_cap(&s, &h, &half_y)?;
            let mut chart = Chart::new(width, per_side, |_| 0.0);
            chart.v = v;
            chart.v[0] = 0.0;
            charts.push(chart);
        }
        let right = charts.pop().expect("two charts");
        let left = charts.pop().expect("two charts");
        let state = Self {
            params,
            t: curve.t(),
            center,
            ell: [half, half],
            offsets,
            u,
            charts: [left, right],
        };
        state.field()?;
        Ok(state)
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn a(&self) -> f64 {
        self.center - self.ell[0]
    }

    pub fn b(&self) -> f64 {
        self.center + self.ell[1]
    }

    /// Interior grid spacing.
    pub fn spacing(&self) -> f64 {
        self.offsets[2] - self.offsets[1]
    }

    pub fn u_max(&self) -> f64 {
        self.u.iter().fold(0.0_f64, |m, &x| m.max(x))
    }

    pub fn chart_width(&self, pole: Pole) -> f64 {
        self.charts[pole_index(pole)].width
    }

    pub fn curve(&self) -> ProfileCurve {
        let n = self.u.len();
        let nodes = (0..n).map(|i| self.x(i)).collect();
        ProfileCurve::new(self.t, nodes, self.u.clone()).expect("flow state holds a valid profile")
    }

    pub fn chart(&self, pole: Pole) -> PoleChart {
        self.charts[pole_index(pole)].to_pole_chart(pole, self.t)
    }

    fn x(&self, i: usize) -> f64 {
        let n = self.u.len();
        if i == 0 {
            self.a()
        } else if i == n - 1 {
            self.b()
        } else {
            self.center + self.offsets[i]
        }
    }

    /// `x[i+1] − x[i]`, written so that mirrored gaps agree bitwise.
    fn gap(&self, i: usize) -> f64 {
        let n = self.u.len();
        if i == 0 {
            self.offsets[1] + self.ell[0]
        } else if i == n - 2 {
            self.ell[1] - self.offsets[n - 2]
        } else {
            self.offsets[i + 1] - self.offsets[i]
        }
    }

    /// Distance from the tip of `side` to node `i` counted from that tip.
    fn tip_distance(&self, side: usize, ell: f64, i: usize) -> f64 {
        let n = self.u.len();
        if i == 0 {
            return 0.0;
        }
        let off = if i == n - 1 {
            self.ell[1 - side]
        } else if side == 0 {
            self.offsets[i]
        } else {
            -self.offsets[n - 1 - i]
        };
        ell + off
    }

    fn side_arrays(&self, side: usize, ell: f64, heights: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.u.len();
        let s = (0..n).map(|i| self.tip_distance(side, ell, i)).collect();
        let h = (0..n).map(|i| heights[side_index(side, n, i)]).collect();
        (s, h)
    }

    /// `u_max / (b − a)²`, the scale of admissible positive second
    /// differences.
    fn concavity_scale(&self) -> f64 {
        let w = self.ell[0] + self.ell[1];
        self.u_max() / (w * w)
    }

    fn side_of(&self, i: usize) -> usize {
        usize::from(2 * i > self.u.len() - 1)
    }

    pub(crate) fn field(&self) -> Result<Field> {
        let n = self.u.len();
        let u = &self.u;
        let scale = self.concavity_scale();
        let mut dt_max = f64::INFINITY;
        let mut min_diffusion = f64::INFINITY;
        let mut graph = Vec::with_capacity(n);
        for i in 1..n - 1 {
            if u[i] < self.charts[self.side_of(i)].inner {
                continue;
            }
            let (hl, hr) = (self.gap(i - 1), self.gap(i));
            let (ux, uxx) = three_point(hl, hr, u[i - 1], u[i], u[i + 1]);
            let neg = clamp_concave(uxx, scale, i).map_err(|_| Error::ConvexityLost {
                chart: "graph",
                index: i,
                value: uxx,
            })?;
            let point = graph_point(u[i], ux, neg, &self.params);
            let d = point.diffusion;
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::DegenerateState(format!(
                    "graph diffusion coefficient {d:e} at node {i}"
                )));
            }
            let h = hl.min(hr);
            dt_max = dt_max.min(h * h / (2.0 * d));
            min_diffusion = min_diffusion.min(d);
            graph.push(GraphNode { index: i, point, uxx });
        }
        let mut charts: [Vec<ChartPoint>; 2] = [Vec::new(), Vec::new()];
        for (side, chart) in self.charts.iter().enumerate() {
            let m = chart.per_side();
            let mut pts = Vec::with_capacity(m);
            for j in 0..m {
                let (v_y, v_yy, v_zz) = chart.derivatives(j);
                if !(v_yy > 0.0 && v_zz > 0.0) {
                    return Err(Error::ConvexityLost {
                        chart: POLES[side].name(),
                        index: j,
                        value: v_yy,
                    });
                }
                let p = chart_point(v_y, v_yy, v_zz, &self.params);
                let d = p.diffusion_yy + p.diffusion_zz;
                if !(p.diffusion_yy > 0.0 && p.diffusion_zz > 0.0 && d.is_finite()) {
                    return Err(Error::DegenerateState(format!(
                        "{} chart diffusion coefficient {d:e} at node {j}",
                        POLES[side].name()
                    )));
                }
                dt_max = dt_max.min(chart.k * chart.k / (2.0 * d));
                min_diffusion = min_diffusion.min(p.diffusion_yy.min(p.diffusion_zz));
                pts.push(p);
            }
            charts[side] = pts;
        }
        Ok(Field {
            graph,
            charts,
            dt_max,
            min_diffusion,
        })
    }

    /// `cfl · min Δ²/(2D)` over the graph nodes and both charts, with `D`
    /// the linearized diffusion coefficient (the sum of both directions in
    /// the charts).
    pub fn stable_dt(&self, cfl: f64) -> Result<f64> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::InvalidParams(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        Ok(cfl * self.field()?.dt_max)
    }

    /// One explicit Euler step of length `dt`.
    pub fn step(&self, dt: f64) -> Result<FlowState> {
        let field = self.field()?;
        if !(dt > 0.0 && dt <= field.dt_max) {
            return Err(Error::InvalidParams(format!(
                "time step {dt:e} outside (0, {:e}]",
                field.dt_max
            )));
        }
        let next = self.advance(&field, dt)?;
        next.check_stitch(DEFAULT_STITCH_TOLERANCE)?;
        Ok(next)
    }

    pub(crate) fn advance(&self, field: &Field, dt: f64) -> Result<FlowState> {
        let n = self.u.len();
        let mut graph_u = self.u.clone();
        for g in &field.graph {
            graph_u[g.index] = self.u[g.index] + dt * g.point.u_t;
        }
        let mut next = self.clone();
        next.t = self.t + dt;
        next.u.clone_from(&graph_u);
        let mid = (n - 1) / 2;
        for side in 0..2 {
            let chart = &self.charts[side];
            let rates = &field.charts[side];
            let m = chart.per_side();
            let (c, inner) = (chart.width, chart.inner);
            let shift = dt * rates[0].v_t;
            let ell = self.ell[side] - shift;
            let mut v_pre = vec![0.0; m + 1];
            for j in 1..m {
                v_pre[j] = (chart.v[j] + dt * rates[j].v_t) - shift;
            }
            // cap in tip coordinates, up to three nodes past height c
            let (mut s, mut h) = (vec![0.0], vec![0.0]);
            let mut reach = None;
            for i in 1..=(mid + 1).min(n - 2) {
                let hi = graph_u[side_index(side, n, i)];
                if hi <= h[i - 1] {
                    break;
                }
                s.push(self.tip_distance(side, ell, i));
                h.push(hi);
                if reach.is_none() && hi >= c {
                    reach = Some(i);
                }
                if reach.is_some_and(|r| i >= r + 3) {
                    break;
                }
            }
            if !(s.len() > 1 && s[1] > 0.0) {
                return Err(Error::GridOverrun);
            }
            reach.ok_or(Error::NonMonotoneCap { width: c })?;
            let top = h.len() - 1;
            let q: Vec<f64> = h.iter().map(|x| x * x).collect();
            v_pre[m] = LazyCubic::new(&s, &q).solve_increasing(c * c, 0, top);
            let mut pre_interp = LazyCubic::even(&chart.y, &v_pre);
            let mut h_new = h.clone();
            for i in 1..=mid {
                let idx = side_index(side, n, i);
                let old = self.u[idx];
                if old >= c {
                    break;
                }
                let from_chart = pre_interp.solve_increasing(s[i], 0, m).max(0.0);
                h_new[i] = if old < inner {
                    from_chart
                } else {
                    let theta = smoothstep((h[i] - inner) / (c - inner));
                    theta * h[i] + (1.0 - theta) * from_chart
                };
                next.u[idx] = h_new[i];
            }
            // the graph side of the chart blend sees the refreshed cap
            let q: Vec<f64> = h_new.iter().map(|x| x * x).collect();
            let mut cap = LazyCubic::new(&s, &q);
            let mut v_new = v_pre.clone();
            for j in 1..m {
                let y = chart.y[j];
                if y >= inner {
                    let theta = smoothstep((y - inner) / (c - inner));
                    let from_graph = cap.solve_increasing(y * y, 0, top);
                    v_new[j] = (1.0 - theta) * v_pre[j] + theta * from_graph;
                }
            }
            next.ell[side] = ell;
            next.charts[side].v = v_new;
        }
        next.check_convexity()?;
        Ok(next)
    }

    fn check_convexity(&self) -> Result<()> {
        let n = self.u.len();
        let u = &self.u;
        let scale = self.concavity_scale();
        for i in 1..n - 1 {
            if !(u[i] > 0.0) {
                return Err(Error::ConvexityLost {
                    chart: "graph",
                    index: i,
                    value: u[i],
                });
            }
            let (_, uxx) = three_point(self.gap(i - 1), self.gap(i), u[i - 1], u[i], u[i + 1]);
            clamp_concave(uxx, scale, i).map_err(|_| Error::ConvexityLost {
                chart: "graph",
                index: i,
                value: uxx,
            })?;
        }
        for (side, chart) in self.charts.iter().enumerate() {
            for j in 0..chart.per_side() {
                let (_, v_yy, v_zz) = chart.derivatives(j);
                if !(v_yy > 0.0 && v_zz > 0.0) {
                    return Err(Error::ConvexityLost {
                        chart: POLES[side].name(),
                        index: j,
                        value: v_yy,
                    });
                }
            }
        }
        Ok(())
    }

    /// Largest relative overlap disagreement over both caps.
    pub fn stitch_defect(&self) -> Result<f64> {
        let scale = self.concavity_scale();
        let mut worst = 0.0_f64;
        for (side, pole) in POLES.into_iter().enumerate() {
            let (mut s, mut h) = self.side_arrays(side, self.ell[side], &self.u);
            let keep = (self.u.len() - 1) / 2 + 2;
            s.truncate(keep);
            h.truncate(keep);
            let chart = self.charts[side].to_pole_chart(pole, self.t);
            let d = cap_defect(&s, &h, &chart, &self.params, scale)?.ok_or(Error::EmptyOverlap)?;
            worst = worst.max(d);
        }
        Ok(worst)
    }

    pub(crate) fn check_stitch(&self, tolerance: f64) -> Result<()> {
        let defect = self.stitch_defect()?;
        if defect > tolerance {
            return Err(Error::StitchBroken { defect, tolerance });
        }
        Ok(())
    }

    /// Gap between each tip and its nearest interior node, relative to the
    /// interior spacing.
    pub(crate) fn tip_clearance(&self) -> f64 {
        let n = self.u.len();
        let h = self.spacing();
        (self.gap(0) / h).min(self.gap(n - 2) / h)
    }

    /// Same resolution on the current interval.
    pub fn regrid(&self) -> Result<FlowState> {
        self.regrid_to(GridTarget::Nodes(self.u.len()))
    }

    /// Resamples `u²` onto a fresh uniform grid spanning the current
    /// `[a, b]` and rebuilds both charts at the default width.
    pub fn regrid_to(&self, target: GridTarget) -> Result<FlowState> {
        let half = 0.5 * (self.ell[0] + self.ell[1]);
        let center = self.center + 0.5 * (self.ell[1] - self.ell[0]);
        let n = match target {
            GridTarget::Nodes(n) => n,
            GridTarget::Spacing(h) => {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(Error::InvalidParams(format!("grid spacing must be positive, got {h}")));
                }
                (2.0 * half / h).floor() as usize + 1
            }
        };
        if n < MIN_NODES {
            return Err(Error::TooFewNodes {
                available: n,
                required: MIN_NODES,
            });
        }
        let offsets = symmetric_offsets(half, n);
        let distinct = offsets.windows(2).filter(|w| center + w[1] > center + w[0]).count() + 1;
        if distinct < n {
            return Err(Error::TooFewNodes {
                available: distinct,
                required: n,
            });
        }
        let mut u = vec![0.0; n];
        for side in 0..2 {
            let (s, h) = self.side_arrays(side, self.ell[side], &self.u);
            let q: Vec<f64> = h.iter().map(|x| x * x).collect();
            let interp = MonotoneCubic::unlimited(s, q);
            for i in side_range(side, n) {
                u[side_index(side, n, i)] = sample_height(&interp, half + offsets[i])?;
            }
        }
        let width = DEFAULT_WIDTH_FRACTION * u.iter().fold(0.0_f64, |m, &x| m.max(x));
        let mut next = Self {
            params: self.params,
            t: self.t,
            center,
            ell: [half, half],
            offsets,
            u,
            charts: self.charts.clone(),
        };
        let mid = (n - 1) / 2;
        for side in 0..2 {
            let old = &self.charts[side];
            let per_side = if n == self.u.len() {
                old.per_side()
            } else {
                default_per_side(n)
            };
            let mut old_interp = LazyCubic::even(&old.y, &old.v);
            let (s, h) = next.side_arrays(side, half, &next.u);
            let top = first_max(&h[..=mid + 1]);
            let q: Vec<f64> = h[..=top].iter().map(|x| x * x).collect();
            let cap = (top >= 1).then(|| MonotoneCubic::new(s[..=top].to_vec(), q));
            let mut fallback_failed = false;
            let chart = Chart::new(width, per_side, |y| {
                if y <= old.width {
                    old_interp.eval(y)
                } else if let Some(cap) = &cap {
                    cap.solve_increasing(y * y, 0, top)
                } else {
                    fallback_failed = true;
                    0.0
                }
            });
            if fallback_failed {
                return Err(Error::NonMonotoneCap { width });
            }
            next.charts[side] = chart;
        }
        Ok(next)
    }

    /// Smallest linearized diffusion coefficient over the graph nodes and
    /// both charts; zero when the state is no longer strictly convex.
    pub fn parabolicity(&self) -> f64 {
        self.field().map_or(0.0, |f| f.min_diffusion)
    }

    /// Graph nodes above the overlap and chart nodes inside their rim, as
    /// `(κ_rad, κ_axi, speed)` triples.
    pub(crate) fn curvature_samples(&self, field: &Field) -> Vec<(f64, f64, f64)> {
        let p = &self.params;
        let graph = field.graph.iter().map(|g| {
            let (r, a) = (g.point.kappa_rad, g.point.kappa_axi);
            (r, a, p.speed(r, a))
        });
        let charts = field.charts.iter().flatten().map(|c| {
            (c.kappa_rad, c.kappa_axi, p.speed(c.kappa_rad, c.kappa_axi))
        });
        graph.chain(charts).collect()
    }

    /// Smallest normal speed over [`Self::curvature_samples`].
    pub(crate) fn min_speed(&self) -> Result<f64> {
        let field = self.field()?;
        Ok(self.curvature_samples(&field).iter().map(|s| s.2).fold(f64::INFINITY, f64::min))
    }

    pub(crate) fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
}

fn check_nodes(n: usize) -> Result<()> {
    if n < MIN_NODES {
        return Err(Error::TooFewNodes {
            available: n,
            required: MIN_NODES,
        });
    }
    Ok(())
}

fn pole_index(pole: Pole) -> usize {
    match pole {
        Pole::Left => 0,
        Pole::Right => 1,
    }
}

/// Node indices, counted from the tip of `side`, that the side owns.
fn side_range(side: usize, n: usize) -> std::ops::RangeInclusive<usize> {
    let left = (n - 1) / 2;
    if side == 0 {
        1..=left
    } else {
        1..=n - 2 - left
    }
}

fn side_index(side: usize, n: usize, i: usize) -> usize {
    if side == 0 {
        i
    } else {
        n - 1 - i
    }
}

fn sample_height(interp: &MonotoneCubic, s: f64) -> Result<f64> {
    let q = interp.eval(s);
    if !(q > 0.0) {
        return Err(Error::DegenerateState(format!(
            "resampled squared height {q:e} at tip distance {s:e}"
        )));
    }
    Ok(q.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{evenness_defect, volume};
    use approx::assert_relative_eq;

    fn unit() -> FlowParams {
        FlowParams::new(1.0, 1.0).unwrap()
    }

    fn sphere_state(r: f64, n: usize, params: FlowParams) -> FlowState {
        FlowState::from_spheroid(&Spheroid::sphere(0.0, r).unwrap(), params, n).unwrap()
    }

    #[test]
    fn stable_dt_on_the_unit_sphere() {
        let s = sphere_state(1.0, 201, unit());
        assert_relative_eq!(s.spacing(), 0.01, max_relative = 1e-12);
        assert_relative_eq!(s.stable_dt(0.25).unwrap(), 1.25e-5, max_relative = 1e-9);
        let half = s.stable_dt(0.125).unwrap();
        assert_eq!(half, 0.5 * s.stable_dt(0.25).unwrap());
    }

    #[test]
    fn stable_dt_scaling_law() {
        for (a1, a2) in [(1.0, 1.0), (0.5, 0.5), (1.0, 2.0)] {
            let p = FlowParams::new(a1, a2).unwrap();
            let one = sphere_state(1.0, 101, p).stable_dt(0.5).unwrap();
            let two = sphere_state(2.0, 101, p).stable_dt(0.5).unwrap();
            assert_relative_eq!(two / one, 2.0_f64.powf(a1 + a2 + 1.0), max_relative = 1e-9);
        }
    }

    #[test]
    fn tiny_step_moves_sphere_inward_at_unit_speed() {
        let s = sphere_state(1.0, 401, unit());
        let next = s.step(1e-6).unwrap();
        assert_relative_eq!(s.u_max() - next.u_max(), 1e-6, max_relative = 1e-3);
        assert_relative_eq!(next.a() - s.a(), 1e-6, max_relative = 1e-3);
        assert_relative_eq!(s.b() - next.b(), 1e-6, max_relative = 1e-3);
        assert_eq!(next.t(), 1e-6);
    }

    #[test]
    fn step_preserves_evenness_exactly() {
        let shape = Spheroid::new(0.3, 1.0, 0.5).unwrap();
        let mut s = FlowState::from_spheroid(&shape, unit(), 201).unwrap();
        for _ in 0..20 {
            let dt = s.stable_dt(0.8).unwrap();
            s = s.step(dt).unwrap();
        }
        assert_eq!(s.ell[0], s.ell[1]);
        assert_eq!(evenness_defect(&s.curve()), 0.0);
        let r = s.regrid().unwrap();
        assert_eq!(evenness_defect(&r.curve()), 0.0);
        assert_eq!(r.chart(Pole::Left).vvalues(), r.chart(Pole::Right).vvalues());
    }

    #[test]
    fn sphere_stays_umbilic_after_a_step() {
        for (a1, a2) in [(1.0, 1.0), (0.5, 0.5), (1.0, 2.0)] {
            let s = sphere_state(1.0, 401, FlowParams::new(a1, a2).unwrap());
            let next = s.step(s.stable_dt(0.8).unwrap()).unwrap();
            let field = next.field().unwrap();
            let worst = next
                .curvature_samples(&field)
                .iter()
                .map(|(r, a, _)| (r / a - 1.0).abs())
                .fold(0.0, f64::max);
            assert!(worst < 2e-3, "{worst}");
        }
    }

    #[test]
    fn regrid_preserves_geometry() {
        let s = sphere_state(1.0, 200, unit());
        let fine = s.regrid_to(GridTarget::Nodes(400)).unwrap();
        let (v0, v1) = (volume(&s.curve()), volume(&fine.curve()));
        assert!((v1 - v0).abs() / v0 <= 1e-8, "{}", (v1 - v0).abs() / v0);
        let again = fine.regrid().unwrap();
        for (p, q) in fine.u.iter().zip(&again.u) {
            assert!((p - q).abs() < 1e-13);
        }
        for (p, q) in fine.charts[0].v.iter().zip(&again.charts[0].v) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn regrid_rejects_too_coarse_targets() {
        let s = sphere_state(1.0, 100, unit());
        assert!(matches!(
            s.regrid_to(GridTarget::Spacing(0.25)),
            Err(Error::TooFewNodes { available: 9, .. })
        ));
        assert!(s.regrid_to(GridTarget::Spacing(0.2)).is_ok());
    }

    #[test]
    fn from_curve_matches_closed_form() {
        let shape = Spheroid::new(1.0, 1.0, 0.5).unwrap();
        let exact = FlowState::from_spheroid(&shape, unit(), 201).unwrap();
        let sampled = FlowState::from_curve(&shape.profile(301, 0.0).unwrap(), unit(), 201).unwrap();
        for (p, q) in exact.u.iter().zip(&sampled.u) {
            assert!((p - q).abs() < 1e-5, "{p} {q}");
        }
        for (p, q) in exact.charts[1].v.iter().zip(&sampled.charts[1].v) {
            assert!((p - q).abs() < 1e-5);
        }
    }

    #[test]
    fn parabolicity_on_the_unit_sphere() {
        let s = sphere_state(1.0, 401, unit());
        let d = s.parabolicity();
        let inner = s.charts[0].inner;
        // D = u² on the graph part; the smallest graph node sits just above
        // the overlap rim
        assert!(d > 0.0 && d <= inner * inner * 1.05, "{d}");
    }

    #[test]
    fn flattened_arc_with_high_exponent_is_nearly_degenerate() {
        // a pill: long flat top joined to two round caps
        let curve = ProfileCurve::from_fn(0.0, -2.0, 2.0, 401, |x| {
            let s = (x.abs() - 1.0).max(0.0);
            let flat = 1.0 - 1e-4 * x * x;
            (flat * flat - s * s).max(0.0).sqrt()
        })
        .unwrap();
        let p = FlowParams::new(1.0, 2.0).unwrap();
        let s = FlowState::from_curve(&curve, p, 401).unwrap();
        assert!(s.parabolicity() < 1e-3, "{}", s.parabolicity());
    }
}
