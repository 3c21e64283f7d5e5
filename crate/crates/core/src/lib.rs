//! Contraction of strictly convex, axially symmetric surfaces in R³ by the
//! normal speed `κ_rad^α1 · κ_axi^α2`.
//!
//! The surface is stored as a meridian graph `u(x)` away from the poles and
//! as two inverted graphs `v(y)` (pole charts) near them. [`solver`] evolves
//! the composite state explicitly in time; [`barriers`] provides closed-form
//! shrinking spheres for comparison; [`rescale`] normalizes profiles to
//! constant volume and measures their Hausdorff drift; [`runner`] turns all
//! of it into a reproducible experiment runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
pub mod error;
pub mod interp;
pub mod params;
pub mod pole;
pub mod profile;
mod region;
pub mod rescale;
pub mod runner;
pub mod shapes;
pub mod solver;

pub use error::{Error, Result};
pub use params::FlowParams;
pub use pole::{Pole, PoleChart};
pub use profile::{CurvatureField, ProfileCurve};
pub use rescale::RescaledProfile;
pub use shapes::Spheroid;
pub use solver::{FlowState, StopCriteria, StopReason, Trajectory};
