use thiserror::Error;

/// Failures raised by the geometry, solver and analysis layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid flow parameters: {0}")]
    InvalidParams(String),

    #[error("invalid profile curve: {0}")]
    InvalidCurve(String),

    #[error("profile height {value:e} at node {index} is not positive")]
    NonPositiveProfile { index: usize, value: f64 },

    #[error("profile is not concave at node {index} (second difference {second_difference:e})")]
    NonConcave { index: usize, second_difference: f64 },

    #[error("no mean-value point found: {0}")]
    NotFound(String),

    #[error("cap is not strictly monotone up to height {width}")]
    NonMonotoneCap { width: f64 },

    #[error("pole chart is degenerate at node {index} (v_yy = {v_yy:e})")]
    DegenerateChart { index: usize, v_yy: f64 },

    #[error("charts have no common overlap annulus")]
    EmptyOverlap,

    #[error("chart and curve describe different instants (t = {chart_t} vs {curve_t})")]
    ChartMismatch { chart_t: f64, curve_t: f64 },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("convexity lost in the {chart} chart at node {index} (second difference {value:e})")]
    ConvexityLost {
        chart: &'static str,
        index: usize,
        value: f64,
    },

    #[error("charts disagree on the overlap: defect {defect:e} exceeds {tolerance:e}")]
    StitchBroken { defect: f64, tolerance: f64 },

    #[error("domain cannot hold the minimum node count ({available} < {required})")]
    TooFewNodes { available: usize, required: usize },

    #[error("pole moved past the first grid node; regrid required")]
    GridOverrun,

    #[error("extinction fit failed: {0}")]
    FitFailed(String),

    #[error("snapshot time grids do not align: {0}")]
    IncompatibleSnapshots(String),

    #[error("degenerate input for rescaling: {0}")]
    DegenerateInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
