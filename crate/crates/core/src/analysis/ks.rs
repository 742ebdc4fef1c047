use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult<T> {
    pub statistic: T,
    pub p_value: T,
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi theta form converges fast for small lambda
        let pi = std::f64::consts::PI;
        let c = -pi * pi / (8.0 * lambda * lambda);
        let sum: f64 = (1..=25u32)
            .map(|k| {
                let m = f64::from(2 * k - 1);
                (c * m * m).exp()
            })
            .sum();
        (1.0 - (2.0 * pi).sqrt() / lambda * sum).clamp(0.0, 1.0)
    } else {
        let c = -2.0 * lambda * lambda;
        let sum: f64 = (1..=100u32)
            .map(|k| {
                let kf = f64::from(k);
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (c * kf * kf).exp()
            })
            .sum();
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

fn check_sorted<T: Real>(s: &[T], name: &str) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Empty(name.into()));
    }
    if s.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Unsorted(name.into()));
    }
    Ok(())
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
///
/// Both inputs must be sorted ascending. The p-value is
/// `Q_KS(√(nm/(n+m)) · D)`, with `Q_KS` the Kolmogorov survival function.
pub fn ks_two_sample<T: Real>(a: &[T], b: &[T]) -> Result<KsResult<T>> {
    check_sorted(a, "first sample")?;
    check_sorted(b, "second sample")?;
    let (n, m) = (a.len(), b.len());
    let (nf, mf) = (n as f64, m as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0_f64;
    while i < n && j < m {
        let v = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] == v {
            i += 1;
        }
        while j < m && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / nf - j as f64 / mf).abs());
    }
    let en = (nf * mf / (nf + mf)).sqrt();
    let p = kolmogorov_sf(en * d);
    Ok(KsResult {
        statistic: T::lit(d),
        p_value: T::lit(p),
    })
}
