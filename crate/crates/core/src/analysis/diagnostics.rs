use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::SolutionPath;
use crate::scalar::{pow_abs, Real};
use crate::schemes::TruncationSpec;
use crate::transform::Alpha;

/// `D_t = E[(X¹_t − X²_t)²]` estimated over coupled pairs, with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DCurve<T> {
    pub times: Vec<T>,
    pub mean: Vec<T>,
    pub stderr: Vec<T>,
    pub n_pairs: usize,
}

impl<T: Real> DCurve<T> {
    /// Curve from known values; used for synthetic inputs with zero error.
    pub fn exact(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::LengthMismatch("times and values".into()));
        }
        let n = times.len();
        Ok(Self {
            times,
            mean: values,
            stderr: vec![T::zero(); n],
            n_pairs: 0,
        })
    }

    pub fn sup(&self) -> T {
        self.mean.iter().copied().fold(T::zero(), T::max)
    }

    /// Keep the points with `t <= t_max`.
    pub fn until(&self, t_max: T) -> Self {
        let k = self.times.partition_point(|&t| t <= t_max);
        Self {
            times: self.times[..k].to_vec(),
            mean: self.mean[..k].to_vec(),
            stderr: self.stderr[..k].to_vec(),
            n_pairs: self.n_pairs,
        }
    }
}

/// Mean-square gap between paired paths, pointwise on their common grid.
pub fn d_statistic<T: Real>(paths1: &[SolutionPath<T>], paths2: &[SolutionPath<T>]) -> Result<DCurve<T>> {
    if paths1.len() != paths2.len() {
        return Err(Error::LengthMismatch(format!(
            "{} paths vs {} paths",
            paths1.len(),
            paths2.len()
        )));
    }
    let n = paths1.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: n });
    }
    let grid = &paths1[0].grid;
    for (a, b) in paths1.iter().zip(paths2) {
        if &a.grid != grid {
            return Err(Error::LengthMismatch("paths do not share a grid".into()));
        }
        a.check_same_grid(b)?;
    }
    let nf = T::from_usize_lossy(n);
    let nm1 = T::from_usize_lossy(n - 1);
    let len = grid.len();
    let mut mean = vec![T::zero(); len];
    let mut stderr = vec![T::zero(); len];
    for k in 0..len {
        let sq = |i: usize| {
            let d = paths1[i].x[k] - paths2[i].x[k];
            d * d
        };
        let m = (0..n).fold(T::zero(), |acc, i| acc + sq(i)) / nf;
        let ss = (0..n).fold(T::zero(), |acc, i| {
            let e = sq(i) - m;
            acc + e * e
        });
        mean[k] = m;
        stderr[k] = (ss / nm1 / nf).sqrt();
    }
    Ok(DCurve {
        times: grid.times().to_vec(),
        mean,
        stderr,
        n_pairs: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GronwallVerdict {
    Holds,
    Inconclusive,
    Violated,
}

/// Outcome of comparing `D_t` with `|α| 2^(−n(α−1)) t² ∫_0^t r^(2α−2) D_r dr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport<T> {
    pub verdict: GronwallVerdict,
    /// `|α| 2^(−n(α−1))`.
    pub constant: T,
    /// Smallest `RHS − LHS` over the evaluated times.
    pub margin: T,
    pub margin_stderr: T,
    pub margin_time: T,
    /// Largest deficit in standard errors, `max_t (LHS − RHS) / se`.
    pub worst_z: T,
    pub z_threshold: T,
    pub times: Vec<T>,
    pub lhs: Vec<T>,
    pub rhs: Vec<T>,
}

/// One-sided statistical check of the Gronwall-type bound on a `D` curve.
///
/// At each positive time the margin `RHS − LHS` gets a conservative standard
/// error `se(LHS) + se(RHS)`. The verdict is `Violated` if some margin is below
/// `−z_threshold · se`, `Holds` if every margin is non-negative, and
/// `Inconclusive` otherwise. The weight `r^(2α−2)` at `r = 0` is taken as zero
/// when `D_0 = 0`.
pub fn gronwall_violation_check<T: Real>(
    curve: &DCurve<T>,
    alpha: Alpha<T>,
    trunc: &TruncationSpec<T>,
    z_threshold: T,
) -> Result<GronwallReport<T>> {
    let a = alpha.value();
    let n = T::from_u32(trunc.n).expect("truncation level representable");
    let two = T::lit(2.0);
    let constant = a.abs() * two.powf(-n * (a - T::one()));
    let expo = two * a - two;
    let weight = |r: T, d: T| -> T {
        if r == T::zero() {
            if d == T::zero() {
                return T::zero();
            }
            return pow_abs(r, expo).map_or(T::infinity(), |w| w * d);
        }
        pow_abs(r, expo).expect("r > 0") * d
    };
    let len = curve.times.len();
    if len < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: len });
    }
    let half = T::lit(0.5);
    let (mut int_d, mut int_se) = (T::zero(), T::zero());
    let mut prev = (
        weight(curve.times[0], curve.mean[0]),
        weight(curve.times[0], curve.stderr[0]),
    );
    let mut times = Vec::new();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut margin = T::infinity();
    let mut margin_stderr = T::zero();
    let mut margin_time = T::zero();
    let mut worst_z = T::neg_infinity();
    let mut any_negative = false;
    let mut violated = false;
    for k in 1..len {
        let t = curve.times[k];
        let dt = t - curve.times[k - 1];
        let cur = (weight(t, curve.mean[k]), weight(t, curve.stderr[k]));
        int_d = int_d + half * (prev.0 + cur.0) * dt;
        int_se = int_se + half * (prev.1 + cur.1) * dt;
        prev = cur;
        let r = constant * t * t * int_d;
        let r_se = constant * t * t * int_se;
        let m = r - curve.mean[k];
        let se = curve.stderr[k] + r_se;
        if m < margin || margin.is_infinite() {
            margin = m;
            margin_stderr = se;
            margin_time = t;
        }
        if m < T::zero() {
            any_negative = true;
            let z = if se > T::zero() { -m / se } else { T::infinity() };
            worst_z = worst_z.max(z);
            if z > z_threshold {
                violated = true;
            }
        }
        times.push(t);
        lhs.push(curve.mean[k]);
        rhs.push(r);
    }
    let verdict = if violated {
        GronwallVerdict::Violated
    } else if any_negative {
        GronwallVerdict::Inconclusive
    } else {
        GronwallVerdict::Holds
    };
    Ok(GronwallReport {
        verdict,
        constant,
        margin,
        margin_stderr,
        margin_time,
        worst_z: worst_z.max(T::zero()),
        z_threshold,
        times,
        lhs,
        rhs,
    })
}

/// Running sum of squared increments of `y`; starts at zero.
pub fn realized_qv<T: Real>(y: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(y.len());
    let mut acc = T::zero();
    out.push(T::zero());
    for w in y.windows(2) {
        let d = w[1] - w[0];
        acc = acc + d * d;
        out.push(acc);
    }
    out
}

/// Running trapezoid integral of `|X_s|^(2α)` along the path.
///
/// This is the clock `T⁻¹(t)` reconstructed from `X` alone; zeros of `X` with
/// `α < 0` give an infinite value.
pub fn path_clock<T: Real>(path: &SolutionPath<T>) -> Vec<T> {
    let e = T::lit(2.0) * path.alpha.value();
    let w = |x: T| pow_abs(x, e).unwrap_or(T::infinity());
    let t = path.times();
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(t.len());
    out.push(T::zero());
    let mut acc = T::zero();
    for k in 0..t.len() - 1 {
        acc = acc + half * (w(path.x[k]) + w(path.x[k + 1])) * (t[k + 1] - t[k]);
        out.push(acc);
    }
    out
}

/// `max_k |x_k − x_0 − ∫_0^{t_k} y|` with the integral by trapezoid on the path grid.
pub fn ode_residual<T: Real>(path: &SolutionPath<T>) -> T {
    let t = path.times();
    let half = T::lit(0.5);
    let mut acc = T::zero();
    let mut worst = T::zero();
    for k in 0..t.len() - 1 {
        acc = acc + half * (path.y[k] + path.y[k + 1]) * (t[k + 1] - t[k]);
        worst = worst.max((path.x[k + 1] - path.x[0] - acc).abs());
    }
    worst
}

/// `(X_{t₁} − x_0) / t₁` at the first positive grid time.
pub fn small_time_slope<T: Real>(path: &SolutionPath<T>) -> Result<T> {
    let t1 = path.times()[1];
    if !(t1 > T::zero()) {
        return Err(Error::InvalidGrid("first step has zero length".into()));
    }
    Ok((path.x[1] - path.x[0]) / t1)
}

/// `(X_t − x_0) / t` with `X` linearly interpolated at `t`.
pub fn slope_at<T: Real>(path: &SolutionPath<T>, t: T) -> Result<T> {
    let times = path.times();
    if !(t > T::zero()) || t > path.horizon() {
        return Err(Error::InvalidArgument(format!("slope time {t} outside (0, horizon]")));
    }
    let k = times.partition_point(|&u| u < t);
    let x = if times[k] == t {
        path.x[k]
    } else {
        let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
        path.x[k - 1] + w * (path.x[k] - path.x[k - 1])
    };
    Ok((x - path.x[0]) / t)
}
