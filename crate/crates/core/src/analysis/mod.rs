//! Pathwise and Monte Carlo diagnostics mirroring the quantities of the
//! uniqueness argument: exit times of the `ℓ∞` annulus, zero crossings, the
//! mean-square gap `D_t` between coupled solutions and its Gronwall-type bound,
//! the small-time slope, realized quadratic variation, and a two-sample
//! Kolmogorov–Smirnov comparison.

mod diagnostics;
mod ks;
mod stats;
mod stopping;

pub use diagnostics::{
    d_statistic, gronwall_violation_check, ode_residual, path_clock, realized_qv, slope_at,
    small_time_slope, DCurve, GronwallReport, GronwallVerdict,
};
pub use ks::{kolmogorov_sf, ks_two_sample, KsResult};
pub use stats::{mean_stderr, origin_key, origin_proximity, Estimate, McSummary};
pub use stopping::{eta_pair, sigma_times, tau_n, tau_n_pair, StopTime};
