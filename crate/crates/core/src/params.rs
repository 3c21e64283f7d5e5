use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents of the speed `κ_rad^alpha1 · κ_axi^alpha2`.
///
/// The derived exponent `beta = (alpha1 + 3·alpha2 − 1)/2` appears in the
/// graph equations of both charts. It is computed on demand and cannot be
/// set independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct FlowParams {
    alpha1: f64,
    alpha2: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha1: f64,
    alpha2: f64,
}

impl TryFrom<RawParams> for FlowParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        FlowParams::new(raw.alpha1, raw.alpha2)
    }
}

impl From<FlowParams> for RawParams {
    fn from(p: FlowParams) -> Self {
        RawParams {
            alpha1: p.alpha1,
            alpha2: p.alpha2,
        }
    }
}

impl FlowParams {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        for (name, value) in [("alpha1", alpha1), ("alpha2", alpha2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be a positive finite number, got {value}"
                )));
            }
        }
        Ok(Self { alpha1, alpha2 })
    }

    /// Exponent of the radial (parallel-circle) curvature.
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    /// Exponent of the axial (meridian) curvature.
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn beta(&self) -> f64 {
        (self.alpha1 + 3.0 * self.alpha2 - 1.0) / 2.0
    }

    /// Total homogeneity degree `alpha1 + alpha2` of the speed.
    pub fn degree(&self) -> f64 {
        self.alpha1 + self.alpha2
    }

    /// Normal speed `κ_rad^alpha1 · κ_axi^alpha2`.
    pub fn speed(&self, kappa_rad: f64, kappa_axi: f64) -> f64 {
        pow(kappa_rad, self.alpha1) * pow(kappa_axi, self.alpha2)
    }
}

/// `x^e`, short-circuiting the exponents that occur most often.
#[inline]
pub(crate) fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 0.5 {
        x.sqrt()
    } else if e == 1.5 {
        x * x.sqrt()
    } else if e == 2.0 {
        x * x
    } else if e == 3.0 {
        x * x * x
    } else if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}
