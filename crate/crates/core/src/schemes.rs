//! Euler–Maruyama for `dX = Y dt, dY = |X|^alpha dB`, optionally stopped at
//! the exit time of the annulus `2^-n < |(x, y)|_∞ < 2^n`.
//!
//! After the exit time the `Y` update is frozen while `X` keeps integrating
//! `Y`, which is the truncated system `Y^n_t = Y_{t ∧ τ_n}`,
//! `X^n_t = x0 + ∫_0^t Y^n`.

use serde::{Deserialize, Serialize};

use crate::driver::DriverPath;
use crate::error::{Error, Result};
use crate::path::{Scheme, SolutionPath};
use crate::scalar::{pow_abs, Real};
use crate::transform::{Alpha, Phase};

/// Truncation level `n` with radii `2^-n` and `2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec<T> {
    pub n: u32,
    pub inner: T,
    pub outer: T,
}

impl<T: Real> TruncationSpec<T> {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > i32::MAX as u32 {
            return Err(Error::InvalidTruncation(n));
        }
        let two = T::lit(2.0);
        let outer = two.powi(n as i32);
        let inner = two.powi(-(n as i32));
        if !outer.is_finite() || inner == T::zero() {
            return Err(Error::InvalidTruncation(n));
        }
        Ok(Self { n, inner, outer })
    }

    /// Whether `norm` lies outside the open annulus `(2^-n, 2^n)`.
    #[inline]
    pub fn exits(&self, norm: T) -> bool {
        norm <= self.inner || norm >= self.outer
    }
}

/// Diffusion coefficient `|x|^alpha` with a floor for negative exponents.
///
/// For `alpha < 0` and `|x| < floor` the value is `floor^alpha`.
pub fn coefficient<T: Real>(x: T, alpha: Alpha<T>, floor: T) -> Result<T> {
    if !(floor >= T::zero()) {
        return Err(Error::InvalidArgument(format!("floor must be >= 0, got {floor}")));
    }
    let a = alpha.value();
    if a == T::zero() {
        return Ok(T::one());
    }
    let base = if a < T::zero() && x.abs() < floor { floor } else { x };
    pow_abs(base, a).ok_or_else(|| Error::UnboundedCoefficient(a.to_f64().unwrap_or(f64::NAN)))
}

/// Options for [`euler_maruyama_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmOptions<T> {
    pub trunc: Option<TruncationSpec<T>>,
    /// Coefficient floor for `alpha < 0`; defaults to the truncation's inner radius.
    pub floor: Option<T>,
}

/// Euler–Maruyama driven by the increments of `d`; floor defaults to `trunc.inner`.
pub fn euler_maruyama<T: Real>(
    start: Phase<T>,
    alpha: Alpha<T>,
    d: &DriverPath<T>,
    trunc: Option<TruncationSpec<T>>,
) -> Result<SolutionPath<T>> {
    euler_maruyama_with(start, alpha, d, EmOptions { trunc, floor: None })
}

pub fn euler_maruyama_with<T: Real>(
    start: Phase<T>,
    alpha: Alpha<T>,
    d: &DriverPath<T>,
    opts: EmOptions<T>,
) -> Result<SolutionPath<T>> {
    let floor = match (opts.floor, opts.trunc) {
        (Some(f), _) => f,
        (None, Some(tr)) => tr.inner,
        (None, None) => T::zero(),
    };
    if alpha.value() < T::zero() && !(floor > T::zero()) {
        return Err(Error::UnboundedCoefficient(alpha.value().to_f64().unwrap_or(f64::NAN)));
    }
    let grid = &d.grid;
    let n = grid.len();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    x.push(start.x);
    y.push(start.y);
    let mut stopped = false;
    let mut consumed = 0usize;
    for k in 0..grid.n_steps() {
        let (xk, yk) = (x[k], y[k]);
        if let Some(tr) = opts.trunc {
            if !stopped && tr.exits(xk.abs().max(yk.abs())) {
                stopped = true;
            }
        }
        let dt = grid.step(k);
        let db = d.db(k);
        consumed += 1;
        x.push(xk + yk * dt);
        y.push(if stopped {
            yk
        } else {
            yk + coefficient(xk, alpha, floor)? * db
        });
    }
    Ok(SolutionPath {
        grid: grid.clone(),
        x,
        y,
        alpha,
        start,
        scheme: Scheme::EulerMaruyama,
        seed: d.seed,
        stream_id: d.stream_id,
        driver_steps: consumed,
    })
}

/// Both sides of `|b^α − a^α| ≤ |α| a^(α−1) (b − a)` for `0 < a < b`.
///
/// The left side is evaluated as `a^α |expm1(α ln1p((b − a)/a))|` and the
/// right side as `|α| a^α (b − a)/a`, so nearly equal arguments do not lose
/// the difference to cancellation.
pub fn mean_value_sides<T: Real>(a: T, b: T, alpha: T) -> (T, T) {
    let r = (b - a) / a;
    let scale = (alpha * a.ln()).exp();
    let lhs = scale * (alpha * r.ln_1p()).exp_m1().abs();
    let rhs = alpha.abs() * scale * r;
    (lhs, rhs)
}
