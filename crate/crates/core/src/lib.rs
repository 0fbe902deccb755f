//! Localized energy multipliers on `(1+n)`-dimensional hyperspherical
//! Schwarzschild exteriors.
//!
//! * [`geometry`]: lapse, photon sphere, the log-coordinate `h`, tortoise
//!   coordinate and localized-energy weights.
//! * [`multiplier`]: the smoothed radial multiplier `f`, `f'`, `l(f)` and the
//!   `f''` jump, plus finite-difference and forward-mode oracles for `l`.
//! * [`verifier`]: grid scans of every positivity inequality of the
//!   construction, the absorption budget and the Hardy machinery.
//! * [`evolution`]: mode-by-mode evolution of the wave equation with energy,
//!   localized-energy and integrated-identity monitors.
//! * [`report`]: configuration parsing, dispatch and report emission.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod fd;
pub mod geometry;
pub mod multiplier;
pub mod quadrature;
pub mod report;
pub mod verifier;

pub use error::{Error, Result};
pub use geometry::{BackgroundParams, RadialGrid, Radius};
pub use multiplier::{MultiplierParams, MultiplierProfile, Side};
