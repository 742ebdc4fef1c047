//! Weak solutions for `alpha` in `(-1/2, 0]` by a random time change.
//!
//! With `V_s = h(x0) + y0 s + ∫_0^s B` and `Ỹ_s = y0 + B_s`, the clock
//! `T(s) = ∫_0^s g(V_r) dr` (see [`crate::transform::clock_integrand`]) and
//! its generalised inverse `T⁻¹(t) = inf{s : T(s) > t}`, the pair
//!
//! ```text
//! X_t = h⁻¹(V_{T⁻¹(t)}),   Y_t = Ỹ_{T⁻¹(t)}
//! ```
//!
//! solves `dX = Y dt, dY = |X|^alpha dB`. The clock is integrated with the
//! composite trapezoid rule on a fine `s` grid and inverted piecewise linearly;
//! `V` and `B` are interpolated linearly at the inverted times.

use serde::{Deserialize, Serialize};

use crate::driver::{sample_driver, DriverPath, TimeGrid};
use crate::error::{Error, Result};
use crate::path::{Scheme, SolutionPath};
use crate::scalar::Real;
use crate::transform::{clock_density, h, h_inv, Alpha, Phase};

/// Clock values `T(s_k)` on an `s` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockPath<T> {
    pub grid: TimeGrid<T>,
    pub t_values: Vec<T>,
}

impl<T: Real> ClockPath<T> {
    pub fn horizon(&self) -> T {
        *self.t_values.last().expect("clock has at least two values")
    }
}

/// `V_k = h(x0) + y0 t_k + ∫_0^{t_k} B`.
pub fn build_v<T: Real>(start: Phase<T>, alpha: Alpha<T>, d: &DriverPath<T>) -> Vec<T> {
    let h0 = h(start.x, alpha);
    d.grid
        .times()
        .iter()
        .zip(&d.ib)
        .map(|(&t, &i)| h0 + start.y * t + i)
        .collect()
}

/// Trapezoid approximation of `T(s_k) = ∫_0^{s_k} c |v|^p ds`.
///
/// At `alpha = 0` the density is one and `T` is the grid itself.
pub fn compute_clock<T: Real>(v: &[T], grid: &TimeGrid<T>, alpha: Alpha<T>) -> Result<ClockPath<T>> {
    alpha.require_construction_range()?;
    if v.len() != grid.len() {
        return Err(Error::LengthMismatch(format!(
            "v has {} values, grid has {} times",
            v.len(),
            grid.len()
        )));
    }
    if alpha.is_zero() {
        return Ok(ClockPath {
            grid: grid.clone(),
            t_values: grid.times().to_vec(),
        });
    }
    let half = T::lit(0.5);
    let mut t_values = Vec::with_capacity(v.len());
    t_values.push(T::zero());
    let mut acc = T::zero();
    let mut g_prev = clock_density(v[0], alpha);
    for k in 0..grid.n_steps() {
        let g_next = clock_density(v[k + 1], alpha);
        acc = acc + half * (g_prev + g_next) * grid.step(k);
        t_values.push(acc);
        g_prev = g_next;
    }
    Ok(ClockPath {
        grid: grid.clone(),
        t_values,
    })
}

/// Generalised inverse `T⁻¹(t) = inf{s : T(s) > t}` at sorted query times.
///
/// Within a step where `T` increases the inverse is linear. Across a flat
/// stretch the inverse jumps; a query equal to the flat level maps to the
/// right end. A query equal to the final clock value maps to the first node
/// where that value is reached.
pub fn invert_clock<T: Real>(clock: &ClockPath<T>, t_query: &[T]) -> Result<Vec<T>> {
    let tv = &clock.t_values;
    let s = clock.grid.times();
    let t_max = clock.horizon();
    let first_at_max = tv.iter().position(|&t| t == t_max).unwrap_or(tv.len() - 1);

    let mut out = Vec::with_capacity(t_query.len());
    let mut j = 0usize;
    let mut prev = T::neg_infinity();
    for &t in t_query {
        if t < prev || t.is_nan() {
            return Err(Error::Unsorted("clock query times".into()));
        }
        prev = t;
        if t < T::zero() {
            return Err(Error::InvalidArgument(format!("negative query time {t}")));
        }
        if t > t_max {
            return Err(Error::HorizonExceeded {
                query: t.to_f64().unwrap_or(f64::NAN),
                horizon: t_max.to_f64().unwrap_or(f64::NAN),
            });
        }
        if t == t_max {
            out.push(s[first_at_max]);
            continue;
        }
        while tv[j + 1] <= t {
            j += 1;
        }
        let w = (t - tv[j]) / (tv[j + 1] - tv[j]);
        out.push((s[j] + w * (s[j + 1] - s[j])).min(s[j + 1]));
    }
    Ok(out)
}

/// Linear interpolation of `values` (on `grid`) at non-decreasing points `at`.
fn interpolate_sorted<T: Real>(grid: &TimeGrid<T>, values: &[T], at: &[T]) -> Vec<T> {
    let s = grid.times();
    let last = s.len() - 1;
    let mut j = 0usize;
    at.iter()
        .map(|&q| {
            if q >= s[last] {
                return values[last];
            }
            while s[j + 1] <= q {
                j += 1;
            }
            let w = (q - s[j]) / (s[j + 1] - s[j]);
            values[j] + w * (values[j + 1] - values[j])
        })
        .collect()
}

/// Where the noise for a time-change path comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    Seeded { seed: u64, stream_id: u64 },
    /// `B ≡ 0`; the path reduces to its deterministic skeleton.
    Zero,
}

/// Settings of the time-change sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeChangeSampler {
    /// Number of `s` steps per step of the output grid.
    pub oversample: usize,
    /// Hard cap on the number of `s` steps while extending the clock horizon.
    pub max_steps: usize,
}

impl Default for TimeChangeSampler {
    fn default() -> Self {
        Self {
            oversample: 16,
            max_steps: 1 << 20,
        }
    }
}

fn check_inputs<T: Real>(start: Phase<T>, alpha: Alpha<T>) -> Result<()> {
    if start.is_origin() {
        return Err(Error::OriginStart);
    }
    alpha.require_construction_range()
}

impl TimeChangeSampler {
    pub fn sample<T: Real>(
        &self,
        start: Phase<T>,
        alpha: Alpha<T>,
        t_grid: &TimeGrid<T>,
        noise: Noise,
    ) -> Result<SolutionPath<T>> {
        check_inputs(start, alpha)?;
        let s_grid = t_grid.refine(self.oversample.max(1))?;
        let mut driver = match noise {
            Noise::Seeded { seed, stream_id } => sample_driver(&s_grid, seed, stream_id),
            Noise::Zero => DriverPath::zero(s_grid),
        };
        let target = t_grid.horizon();
        loop {
            let v = build_v(start, alpha, &driver);
            let clock = compute_clock(&v, &driver.grid, alpha)?;
            if clock.horizon() >= target {
                return finish(start, alpha, t_grid, &driver, &v, &clock);
            }
            let n = driver.grid.n_steps();
            if n >= self.max_steps {
                return Err(Error::HorizonCap {
                    cap: self.max_steps,
                    target: target.to_f64().unwrap_or(f64::NAN),
                });
            }
            // double the s horizon, never past the cap
            let mut ext = driver.grid.clone();
            let ds = driver.grid.step(n - 1);
            ext.push_uniform_until(driver.grid.horizon() * T::lit(2.0), ds);
            let keep = (self.max_steps + 1).min(ext.len());
            let more = &ext.times()[driver.grid.len()..keep];
            match noise {
                Noise::Seeded { .. } => driver.extend(more)?,
                Noise::Zero => {
                    let grid = TimeGrid::new(ext.times()[..keep].to_vec())?;
                    driver = DriverPath::zero(grid);
                }
            }
        }
    }
}

/// Assemble `(X, Y)` on `t_grid` from a given driver on the `s` grid.
///
/// Fails with [`Error::HorizonExceeded`] when the driver's clock does not reach
/// the end of `t_grid`.
pub fn assemble<T: Real>(
    start: Phase<T>,
    alpha: Alpha<T>,
    t_grid: &TimeGrid<T>,
    driver: &DriverPath<T>,
) -> Result<SolutionPath<T>> {
    check_inputs(start, alpha)?;
    let v = build_v(start, alpha, driver);
    let clock = compute_clock(&v, &driver.grid, alpha)?;
    finish(start, alpha, t_grid, driver, &v, &clock)
}

fn finish<T: Real>(
    start: Phase<T>,
    alpha: Alpha<T>,
    t_grid: &TimeGrid<T>,
    driver: &DriverPath<T>,
    v: &[T],
    clock: &ClockPath<T>,
) -> Result<SolutionPath<T>> {
    let s_of_t = invert_clock(clock, t_grid.times())?;
    let v_at = interpolate_sorted(&driver.grid, v, &s_of_t);
    let b_at = interpolate_sorted(&driver.grid, &driver.b, &s_of_t);
    Ok(SolutionPath {
        grid: t_grid.clone(),
        x: v_at.into_iter().map(|v| h_inv(v, alpha)).collect(),
        y: b_at.into_iter().map(|b| start.y + b).collect(),
        alpha,
        start,
        scheme: Scheme::TimeChange,
        seed: driver.seed,
        stream_id: driver.stream_id,
        driver_steps: driver.grid.n_steps(),
    })
}

/// Time-change sample with the default sampler settings.
pub fn sample_weak_solution<T: Real>(
    start: Phase<T>,
    alpha: Alpha<T>,
    t_grid: &TimeGrid<T>,
    seed: u64,
    stream_id: u64,
) -> Result<SolutionPath<T>> {
    TimeChangeSampler::default().sample(start, alpha, t_grid, Noise::Seeded { seed, stream_id })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn al(v: f64) -> Alpha<f64> {
        Alpha::new(v).unwrap()
    }

    #[test]
    fn build_v_zero_noise() {
        let g = TimeGrid::uniform(2.0, 8).unwrap();
        let d = DriverPath::zero(g.clone());
        let v = build_v(Phase::new(0.7, -0.3), al(-0.25), &d);
        let h0 = h(0.7, al(-0.25));
        for (k, &t) in g.times().iter().enumerate() {
            assert_eq!(v[k], h0 + -0.3 * t);
        }
        assert!(build_v(Phase::new(1.0, 0.0), al(0.0), &d).iter().all(|&v| v == 1.0));
        let v = build_v(Phase::new(0.0, 1.0), al(-0.4), &d);
        assert_eq!(v, g.times());
    }

    #[test]
    fn clock_identity_at_alpha_zero() {
        let g = TimeGrid::uniform(3.0, 30).unwrap();
        let v: Vec<f64> = (0..31).map(|k| (k as f64).sin()).collect();
        let c = compute_clock(&v, &g, al(0.0)).unwrap();
        assert_eq!(c.t_values, g.times());
        assert_eq!(invert_clock(&c, g.times()).unwrap(), g.times());
    }

    #[test]
    fn clock_rejects_positive_alpha() {
        let g = TimeGrid::uniform(1.0, 2).unwrap();
        assert!(matches!(
            compute_clock(&[1.0, 1.0, 1.0], &g, al(0.3)),
            Err(Error::AlphaOutsideConstruction(_))
        ));
    }

    #[test]
    fn quadratic_clock_and_inverse() {
        // v(s) = s, alpha = -1/4: g(v) = 0.5 |v|, T(s) = s²/4, T⁻¹(t) = 2 √t
        let n = 256;
        let g = TimeGrid::uniform(2.0, n).unwrap();
        let c = compute_clock(g.times(), &g, al(-0.25)).unwrap();
        for (k, &s) in g.times().iter().enumerate() {
            assert!((c.t_values[k] - 0.25 * s * s).abs() <= 1e-14, "k={k}");
        }
        let q: Vec<f64> = (0..=50).map(|k| k as f64 / 50.0).collect();
        let inv = invert_clock(&c, &q).unwrap();
        let ds = 2.0 / n as f64;
        for (t, s) in q.iter().zip(&inv) {
            // linear interpolation of a convex clock near t = 0 loses a factor √t
            let tol = if *t < 4.0 * ds * ds { ds } else { ds * ds / t.sqrt() };
            assert!((s - 2.0 * t.sqrt()).abs() <= tol, "t={t} s={s}");
        }
    }

    #[test]
    fn clock_refinement_is_second_order() {
        // smooth non-vanishing v(s) = 2 + sin(3s), alpha = -0.3
        let a = al(-0.3);
        let err = |n: usize| {
            let g = TimeGrid::uniform(1.0, n).unwrap();
            let v: Vec<f64> = g.times().iter().map(|s: &f64| 2.0 + (3.0 * s).sin()).collect();
            let gf = TimeGrid::uniform(1.0, 8 * n).unwrap();
            let vf: Vec<f64> = gf.times().iter().map(|s: &f64| 2.0 + (3.0 * s).sin()).collect();
            let c = compute_clock(&v, &g, a).unwrap();
            let cf = compute_clock(&vf, &gf, a).unwrap();
            (c.horizon() - cf.horizon()).abs()
        };
        let (e1, e2, e3) = (err(16), err(32), err(64));
        for r in [e1 / e2, e2 / e3] {
            assert!((3.5..4.5).contains(&r), "ratio {r}");
        }
    }

    #[test]
    fn flat_clock_uses_inf_convention() {
        let g = TimeGrid::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let c = compute_clock(&[1.0, 0.0, 0.0, 1.0], &g, al(-0.25)).unwrap();
        assert_eq!(c.t_values, vec![0.0, 0.25, 0.25, 0.5]);
        let eps = 1e-9;
        let inv = invert_clock(&c, &[0.25 - eps, 0.25, 0.25 + eps]).unwrap();
        assert!((inv[0] - 1.0).abs() < 1e-6 && inv[0] < 1.0);
        assert_eq!(inv[1], 2.0);
        assert!((inv[2] - 2.0).abs() < 1e-6 && inv[2] > 2.0);
    }

    #[test]
    fn inversion_errors() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        let c = compute_clock(&[1.0; 5], &g, al(0.0)).unwrap();
        assert!(matches!(invert_clock(&c, &[0.5, 1.5]), Err(Error::HorizonExceeded { .. })));
        assert!(matches!(invert_clock(&c, &[0.5, 0.2]), Err(Error::Unsorted(_))));
        assert!(invert_clock(&c, &[-0.1]).is_err());
    }

    #[test]
    fn alpha_zero_matches_direct_construction_bitwise() {
        let tg = TimeGrid::uniform(1.5, 300).unwrap();
        let sampler = TimeChangeSampler { oversample: 1, ..Default::default() };
        let (x0, y0) = (0.4, -1.2);
        let p = sampler
            .sample(Phase::new(x0, y0), al(0.0), &tg, Noise::Seeded { seed: 3, stream_id: 8 })
            .unwrap();
        let d = sample_driver(&tg, 3, 8);
        for k in 0..tg.len() {
            assert_eq!(p.x[k], x0 + y0 * tg.times()[k] + d.ib[k]);
            assert_eq!(p.y[k], y0 + d.b[k]);
        }
    }

    #[test]
    fn alpha_zero_bitwise_with_oversampling() {
        let tg = TimeGrid::uniform(1.0, 50).unwrap();
        let sampler = TimeChangeSampler { oversample: 8, ..Default::default() };
        let p = sampler
            .sample(Phase::new(1.0, 0.5), al(0.0), &tg, Noise::Seeded { seed: 1, stream_id: 2 })
            .unwrap();
        let d = sample_driver(&tg.refine(8).unwrap(), 1, 2);
        for k in 0..tg.len() {
            assert_eq!(p.x[k], 1.0 + 0.5 * tg.times()[k] + d.ib[8 * k]);
            assert_eq!(p.y[k], 0.5 + d.b[8 * k]);
        }
    }

    #[test]
    fn constant_path_under_zero_noise() {
        // V ≡ h(1) = 2, clock rate c |h(1)|^p = 0.5 * 2 = 1 (mpmath, 40 digits)
        let a = al(-0.25);
        let rate = a.clock_constant() * h(1.0, a).abs().powf(a.clock_exponent());
        assert!((rate - 1.0).abs() < 1e-15);
        let tg = TimeGrid::uniform(2.0, 64).unwrap();
        let p = TimeChangeSampler::default()
            .sample(Phase::new(1.0, 0.0), a, &tg, Noise::Zero)
            .unwrap();
        assert!(p.x.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(p.y.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn zero_noise_general_start() {
        // V(s) = h(x0) + y0 s, X(t) solves X' = y0: X = x0 + y0 t
        let a = al(-0.2);
        let tg = TimeGrid::uniform(1.0, 100).unwrap();
        let p = TimeChangeSampler { oversample: 64, ..Default::default() }
            .sample(Phase::new(0.5, 0.8), a, &tg, Noise::Zero)
            .unwrap();
        for (k, &t) in tg.times().iter().enumerate() {
            assert!((p.x[k] - (0.5 + 0.8 * t)).abs() < 1e-4, "t={t} x={}", p.x[k]);
            assert_eq!(p.y[k], 0.8);
        }
    }

    #[test]
    fn rejects_origin_and_positive_alpha() {
        let tg = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(
            sample_weak_solution(Phase::new(0.0, 0.0), al(-0.25), &tg, 0, 0).unwrap_err(),
            Error::OriginStart
        );
        assert!(matches!(
            sample_weak_solution(Phase::new(1.0, 0.0), al(0.5), &tg, 0, 0),
            Err(Error::AlphaOutsideConstruction(_))
        ));
    }

    #[test]
    fn horizon_extends_and_cap_is_enforced() {
        // from (1, 0) at alpha = -0.25 the clock runs at rate ~1; t horizon 3
        // needs about 3 units of s, more than the initial s horizon when the
        // clock is slowed down: start from a small |h(x0)|
        let a = al(-0.25);
        let tg = TimeGrid::uniform(1.0, 10).unwrap();
        let start = Phase::new(0.1, 0.0);
        let p = TimeChangeSampler { oversample: 4, max_steps: 1 << 16 }
            .sample(start, a, &tg, Noise::Zero)
            .unwrap();
        assert!(p.driver_steps > 40);
        assert!(matches!(
            TimeChangeSampler { oversample: 4, max_steps: 64 }.sample(start, a, &tg, Noise::Zero),
            Err(Error::HorizonCap { cap: 64, .. })
        ));
    }

    #[test]
    fn assemble_reports_insufficient_horizon() {
        let a = al(-0.25);
        let tg = TimeGrid::uniform(1.0, 10).unwrap();
        let d = DriverPath::zero(TimeGrid::uniform(0.5, 10).unwrap());
        assert!(matches!(
            assemble(Phase::new(1.0, 0.0), a, &tg, &d),
            Err(Error::HorizonExceeded { .. })
        ));
    }

    proptest! {
        #[test]
        fn clock_recomposition(seed in 0u64..1000, a in -0.45f64..=0.0) {
            let g = TimeGrid::uniform(2.0, 400).unwrap();
            let d = sample_driver(&g, seed, 0);
            let v = build_v(Phase::new(1.0, 0.3), al(a), &d);
            let c = compute_clock(&v, &g, al(a)).unwrap();
            prop_assert!(c.t_values.windows(2).all(|w| w[1] >= w[0]));
            let q: Vec<f64> = (0..=100).map(|k| c.horizon() * (k as f64 / 100.0)).collect();
            let s = invert_clock(&c, &q).unwrap();
            prop_assert!(s.windows(2).all(|w| w[1] >= w[0]));
            // T(T⁻¹(t)) = t; T is piecewise linear between nodes
            let back = interpolate_sorted(&g, &c.t_values, &s);
            for (t, b) in q.iter().zip(&back) {
                prop_assert!((t - b).abs() <= 1e-12 * c.horizon().max(1.0));
            }
        }
    }
}
