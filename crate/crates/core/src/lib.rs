//! Simulation and diagnostics for the degenerate planar system
//!
//! ```text
//! dX_t = Y_t dt,    dY_t = |X_t|^alpha dB_t,    (X_0, Y_0) = (x0, y0) ≠ (0, 0).
//! ```
//!
//! * [`transform`]: the map `h`, its inverse and the clock density.
//! * [`driver`]: exact joint sampling of `(B, ∫B)` with counter-based streams
//!   and conditional refinement for coupled coarse/fine grids.
//! * [`timechange`]: weak solutions for `alpha ∈ (-1/2, 0]` by time change.
//! * [`schemes`]: Euler–Maruyama with optional stopping at the `ℓ∞` annulus.
//! * [`analysis`]: stopping times, `D_t`, Gronwall-type bound, small-time
//!   slope, quadratic variation and KS comparisons.
//! * [`cli`]: campaign runner behind the `degsde` binary.
//!
//! Numeric code is generic over [`Real`] (`f32`, `f64`); the `*64` aliases
//! below fix the double precision used by every campaign.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod driver;
mod error;
mod path;
pub mod rng;
mod scalar;
pub mod schemes;
pub mod timechange;
pub mod transform;

pub use driver::{refine_driver, sample_driver, DriverPath, TimeGrid};
pub use error::{Error, Result};
pub use path::{Scheme, SolutionPath};
pub use scalar::{sgn, Real};
pub use schemes::{coefficient, euler_maruyama, euler_maruyama_with, EmOptions, TruncationSpec};
pub use timechange::{
    assemble, build_v, compute_clock, invert_clock, sample_weak_solution, ClockPath, Noise,
    TimeChangeSampler,
};
pub use transform::{clock_integrand, h, h_inv, Alpha, Phase};

pub type Alpha64 = Alpha<f64>;
pub type Phase64 = Phase<f64>;
pub type TimeGrid64 = TimeGrid<f64>;
pub type DriverPath64 = DriverPath<f64>;
pub type ClockPath64 = ClockPath<f64>;
pub type SolutionPath64 = SolutionPath<f64>;
pub type TruncationSpec64 = TruncationSpec<f64>;
pub type McSummary64 = analysis::McSummary<f64>;
pub type DCurve64 = analysis::DCurve<f64>;
