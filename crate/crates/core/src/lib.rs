//! Exact distributions, closed-form bounds and tightness metrics for the
//! contact distance (CD) and nearest-neighbor distance (NND) of the
//! n-dimensional Matérn cluster process.
//!
//! The crate is `no_std` (with `alloc`) and purely numerical. Sampling, file
//! formats and the command line live in the `mcpdist` companion crate.
//!
//! ```
//! use mcpdist_core::{analytic, bounds, McpParams};
//!
//! let p = McpParams::with_mean_points(2, 20e-6, 30.0, 40.0).unwrap();
//! let f = analytic::contact_cdf(&p, 100.0).unwrap();
//! let ub = bounds::contact_cdf_ub_tight(&p, 100.0).unwrap();
//! let lb = bounds::contact_cdf_lb_tight(&p, 100.0).unwrap();
//! assert!(lb <= f && f <= ub);
//! ```
#![no_std]
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod bounds;
pub mod curve;
mod error;
pub mod geometry;
mod math;
pub mod metrics;
mod params;
pub mod quadrature;
pub mod special;

pub use curve::{CurveKind, DistributionCurve, Grid, Quantity, Spacing, Target};
pub use error::{Error, Result};
pub use params::McpParams;
pub use quadrature::Tolerance;
