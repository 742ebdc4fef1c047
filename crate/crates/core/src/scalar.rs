//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the simulation and analysis code is generic over.
///
/// Implemented for `f32` and `f64`. Sampling draws its Gaussian variates in
/// `f64` and converts, so `f64` is the precision every campaign uses.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Magnitudes below this are treated as zero by the guarded power.
    fn power_floor() -> Self;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f64 {
    fn power_floor() -> Self {
        1e-300
    }
}

impl Real for f32 {
    fn power_floor() -> Self {
        f32::MIN_POSITIVE
    }
}

/// Sign with the convention `sgn(0) = 0`.
#[inline]
pub fn sgn<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// `|x|^q` for `q > 0`, evaluated as `exp(q ln|x|)`; returns zero below the power floor.
#[inline]
pub(crate) fn pow_abs_pos<T: Real>(x: T, q: T) -> T {
    debug_assert!(q > T::zero());
    let ax = x.abs();
    if ax < T::power_floor() {
        T::zero()
    } else {
        (q * ax.ln()).exp()
    }
}

/// `|x|^q` for any real `q`; `None` when `q < 0` and `|x|` is below the power floor.
#[inline]
pub(crate) fn pow_abs<T: Real>(x: T, q: T) -> Option<T> {
    if q == T::zero() {
        return Some(T::one());
    }
    let ax = x.abs();
    if ax < T::power_floor() {
        if q > T::zero() {
            Some(T::zero())
        } else {
            None
        }
    } else {
        Some((q * ax.ln()).exp())
    }
}
