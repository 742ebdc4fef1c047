//! State-space transformation `h`, its inverse, and the exponents of the
//! time change.
//!
//! For `a = 2 alpha + 1 > 0`:
//!
//! ```text
//! h(x)      = |x|^a sgn(x) / a
//! h^-1(v)   = a^(1/a) |v|^(1/a) sgn(v)
//! g(v)      = c |v|^p,   p = -2 alpha / a,   c = a^p
//! ```
//!
//! `g` is the density of the clock and is only used for `alpha` in `(-1/2, 0]`,
//! where `p >= 0` and `g` is continuous. At `alpha = 0` all three maps skip the
//! power and are exactly the identity / the constant one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{pow_abs_pos, sgn, Real};

/// The exponent `alpha` of the diffusion coefficient `|x|^alpha`, with `alpha > -1/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alpha<T>(T);

impl<T: Real> Alpha<T> {
    pub fn new(value: T) -> Result<Self> {
        if !value.is_finite() || value <= T::lit(-0.5) {
            return Err(Error::AlphaOutOfRange(value.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self(value))
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == T::zero()
    }

    /// `2 alpha + 1`, strictly positive.
    #[inline]
    pub fn shape(self) -> T {
        T::lit(2.0) * self.0 + T::one()
    }

    /// Clock exponent `p = -2 alpha / (2 alpha + 1)`.
    #[inline]
    pub fn clock_exponent(self) -> T {
        if self.is_zero() {
            return T::zero();
        }
        -T::lit(2.0) * self.0 / self.shape()
    }

    /// Clock constant `c = (2 alpha + 1)^p`.
    #[inline]
    pub fn clock_constant(self) -> T {
        if self.is_zero() {
            return T::one();
        }
        (self.clock_exponent() * self.shape().ln()).exp()
    }

    /// Whether the time-change construction applies (`alpha <= 0`).
    #[inline]
    pub fn in_construction_range(self) -> bool {
        self.0 <= T::zero()
    }

    pub(crate) fn require_construction_range(self) -> Result<()> {
        if self.in_construction_range() {
            Ok(())
        } else {
            Err(Error::AlphaOutsideConstruction(self.0.to_f64().unwrap_or(f64::NAN)))
        }
    }
}

/// A point `(x, y)` of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Phase<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// `|x| ∨ |y|`.
    #[inline]
    pub fn norm_inf(&self) -> T {
        self.x.abs().max(self.y.abs())
    }

    #[inline]
    pub fn is_origin(&self) -> bool {
        self.x == T::zero() && self.y == T::zero()
    }
}

/// `h(x) = |x|^(2 alpha + 1) sgn(x) / (2 alpha + 1)`.
pub fn h<T: Real>(x: T, alpha: Alpha<T>) -> T {
    if alpha.is_zero() {
        return x;
    }
    let a = alpha.shape();
    sgn(x) * (pow_abs_pos(x, a) / a)
}

/// Inverse of [`h`].
pub fn h_inv<T: Real>(v: T, alpha: Alpha<T>) -> T {
    if alpha.is_zero() {
        return v;
    }
    let a = alpha.shape();
    let q = a.recip();
    // a^(1/a) |v|^(1/a) folded into one exponential
    if v.abs() < T::power_floor() {
        return T::zero();
    }
    sgn(v) * (q * (a.ln() + v.abs().ln())).exp()
}

/// Clock density `c |v|^p`; defined for `alpha` in `(-1/2, 0]` only.
pub fn clock_integrand<T: Real>(v: T, alpha: Alpha<T>) -> Result<T> {
    alpha.require_construction_range()?;
    Ok(clock_density(v, alpha))
}

/// Unchecked form of [`clock_integrand`]; caller guarantees `alpha <= 0`.
#[inline]
pub(crate) fn clock_density<T: Real>(v: T, alpha: Alpha<T>) -> T {
    if alpha.is_zero() {
        return T::one();
    }
    alpha.clock_constant() * pow_abs_pos(v, alpha.clock_exponent())
}
