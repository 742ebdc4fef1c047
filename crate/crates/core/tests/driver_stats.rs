//! Distributional checks of the driver against independent constructions.

use degsde::analysis::ks_two_sample;
use degsde::{refine_driver, sample_driver, TimeGrid64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Sample covariance and standard error of each entry.
fn cov_with_se(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let c = prods.iter().sum::<f64>() / (n - 1.0);
    let v = prods.iter().map(|p| (p - c).powi(2)).sum::<f64>() / (n - 1.0);
    (c, (v / n).sqrt())
}

/// Closed-form covariances of Brownian motion and its integral.
fn cov_bb(s: f64, t: f64) -> f64 {
    s.min(t)
}

fn cov_bi(s: f64, t: f64) -> f64 {
    // Cov(B_s, I_t) = ∫_0^t min(s, u) du
    if s <= t {
        s * t - s * s / 2.0
    } else {
        t * t / 2.0
    }
}

fn cov_ii(s: f64, t: f64) -> f64 {
    let (a, b) = (s.min(t), s.max(t));
    a * a * b / 2.0 - a * a * a / 6.0
}

#[test]
fn fine_trapezoid_oracle_agrees_with_closed_form() {
    // Independent estimate: Riemann-trapezoid integral of a random-walk
    // Brownian path on 500 steps, with its own generator.
    let n_paths = 20_000;
    let steps = 500;
    let dt = 1.0 / steps as f64;
    let mut rng = StdRng::seed_from_u64(2024);
    let (mut b1, mut i1) = (Vec::new(), Vec::new());
    for _ in 0..n_paths {
        let (mut b, mut i) = (0.0f64, 0.0f64);
        for _ in 0..steps {
            let z: f64 = rng.sample(StandardNormal);
            let nb = b + dt.sqrt() * z;
            i += 0.5 * (b + nb) * dt;
            b = nb;
        }
        b1.push(b);
        i1.push(i);
    }
    let want = [(1.0, &b1, &b1), (0.5, &b1, &i1), (1.0 / 3.0, &i1, &i1)];
    for (target, a, b) in want {
        let (c, se) = cov_with_se(a, b);
        assert!((c - target).abs() < 4.0 * se, "oracle {c} vs {target} (se {se})");
    }
}

#[test]
fn joint_law_on_a_multi_step_grid() {
    let g = TimeGrid64::new(vec![0.0, 0.3, 0.5, 1.2]).unwrap();
    let n = 40_000u64;
    let paths: Vec<_> = (0..n).map(|i| sample_driver(&g, 5, i)).collect();
    let t = g.times();
    for j in 1..t.len() {
        for k in j..t.len() {
            let col = |f: &dyn Fn(&degsde::DriverPath64) -> f64| paths.iter().map(f).collect::<Vec<f64>>();
            let (bj, bk) = (col(&|p| p.b[j]), col(&|p| p.b[k]));
            let (ij, ik) = (col(&|p| p.ib[j]), col(&|p| p.ib[k]));
            for (est, exact) in [
                (cov_with_se(&bj, &bk), cov_bb(t[j], t[k])),
                (cov_with_se(&bj, &ik), cov_bi(t[j], t[k])),
                (cov_with_se(&ij, &bk), cov_bi(t[k], t[j])),
                (cov_with_se(&ij, &ik), cov_ii(t[j], t[k])),
            ] {
                assert!((est.0 - exact).abs() < 4.0 * est.1, "({j},{k}): {} vs {exact}", est.0);
            }
        }
    }
}

#[test]
fn refined_points_have_the_unconditional_joint_law() {
    let coarse = TimeGrid64::uniform(1.0, 1).unwrap();
    let fine = TimeGrid64::new(vec![0.0, 0.25, 0.5, 1.0]).unwrap();
    let n = 40_000u64;
    let refined: Vec<_> = (0..n)
        .map(|i| refine_driver(&sample_driver(&coarse, 9, i), &fine, 9).unwrap())
        .collect();
    let t = fine.times();
    for j in 1..4 {
        for k in j..4 {
            let bj: Vec<f64> = refined.iter().map(|p| p.b[j]).collect();
            let ij: Vec<f64> = refined.iter().map(|p| p.ib[j]).collect();
            let bk: Vec<f64> = refined.iter().map(|p| p.b[k]).collect();
            let ik: Vec<f64> = refined.iter().map(|p| p.ib[k]).collect();
            for (est, exact) in [
                (cov_with_se(&bj, &bk), cov_bb(t[j], t[k])),
                (cov_with_se(&bj, &ik), cov_bi(t[j], t[k])),
                (cov_with_se(&ij, &bk), cov_bi(t[k], t[j])),
                (cov_with_se(&ij, &ik), cov_ii(t[j], t[k])),
            ] {
                assert!((est.0 - exact).abs() < 4.0 * est.1, "({j},{k}): {} vs {exact}", est.0);
            }
        }
    }
}

#[test]
fn midpoint_given_endpoint_is_a_bridge() {
    // Brute-force conditioning: keep the draws whose endpoint lands near 1 and
    // compare the midpoint with N(1/2, 1/4).
    let coarse = TimeGrid64::uniform(1.0, 1).unwrap();
    let fine = coarse.refine(2).unwrap();
    let mut mids = Vec::new();
    for i in 0..200_000u64 {
        let d = sample_driver(&coarse, 21, i);
        if (d.b[1] - 1.0).abs() < 0.05 {
            mids.push(refine_driver(&d, &fine, 21).unwrap().b[1]);
        }
    }
    let n = mids.len() as f64;
    assert!(n > 4000.0);
    let m = mids.iter().sum::<f64>() / n;
    let v = mids.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((m - 0.5).abs() < 4.0 * (0.25 / n).sqrt(), "mean {m}");
    assert!((v - 0.25).abs() < 4.0 * 0.25 * (2.0 / n).sqrt(), "var {v}");
}

#[test]
fn brownian_scaling_by_four() {
    let c = 4.0;
    let g = TimeGrid64::uniform(1.0, 8).unwrap();
    let gc = TimeGrid64::uniform(c, 8).unwrap();
    let n = 10_000u64;
    let scaled: Vec<_> = (0..n).map(|i| sample_driver(&gc, 31, i)).collect();
    let base: Vec<_> = (0..n).map(|i| sample_driver(&g, 32, i)).collect();
    for k in [1, 4, 8] {
        let a = sorted(scaled.iter().map(|p| p.b[k]).collect());
        let b = sorted(base.iter().map(|p| c.sqrt() * p.b[k]).collect());
        let r = ks_two_sample(&a, &b).unwrap();
        assert!(r.p_value > 1e-3, "B at index {k}: p = {}", r.p_value);
        let a = sorted(scaled.iter().map(|p| p.ib[k]).collect());
        let b = sorted(base.iter().map(|p| c.powf(1.5) * p.ib[k]).collect());
        let r = ks_two_sample(&a, &b).unwrap();
        assert!(r.p_value > 1e-3, "ib at index {k}: p = {}", r.p_value);
    }
}

#[test]
fn increments_on_disjoint_steps_are_uncorrelated() {
    let g = TimeGrid64::uniform(1.0, 4).unwrap();
    let n = 100_000u64;
    let paths: Vec<_> = (0..n).map(|i| sample_driver(&g, 41, i)).collect();
    let inc = |p: &degsde::DriverPath64, k: usize| (p.b[k + 1] - p.b[k], p.ib[k + 1] - p.ib[k] - p.b[k] * 0.25);
    let bound = 3.0 / (n as f64).sqrt();
    for (j, k) in [(0, 1), (1, 2), (0, 3)] {
        let (a, b): (Vec<_>, Vec<_>) = paths.iter().map(|p| (inc(p, j), inc(p, k))).unzip();
        let corr = |x: &[f64], y: &[f64]| {
            let (cxy, _) = cov_with_se(x, y);
            cxy / (cov_with_se(x, x).0 * cov_with_se(y, y).0).sqrt()
        };
        let db_j: Vec<f64> = a.iter().map(|v| v.0).collect();
        let db_k: Vec<f64> = b.iter().map(|v| v.0).collect();
        let di_k: Vec<f64> = b.iter().map(|v| v.1).collect();
        assert!(corr(&db_j, &db_k).abs() < bound, "dB steps {j},{k}");
        assert!(corr(&db_j, &di_k).abs() < bound, "dB step {j} vs dI step {k}");
    }
}

#[test]
fn local_trapezoid_error_scales_like_step_to_three_halves() {
    // On a refined driver, ib over one fine step differs from the trapezoid
    // of b by an N(0, δ³/12) variable; its RMS has log-log slope 3/2.
    let coarse = TimeGrid64::uniform(1.0, 4).unwrap();
    let factors = [16usize, 64, 256];
    let mut logs = Vec::new();
    for &f in &factors {
        let fine = coarse.refine(f).unwrap();
        let delta = 1.0 / (4 * f) as f64;
        let mut ss = 0.0;
        let mut count = 0usize;
        for i in 0..200u64 {
            let d = refine_driver(&sample_driver(&coarse, 51, i), &fine, 51).unwrap();
            for k in 0..fine.n_steps() {
                let e = d.ib[k + 1] - d.ib[k] - 0.5 * (d.b[k] + d.b[k + 1]) * delta;
                ss += e * e;
                count += 1;
            }
        }
        let rms = (ss / count as f64).sqrt();
        let ratio = rms / (delta.powf(1.5) / 12f64.sqrt());
        assert!((ratio - 1.0).abs() < 0.1, "factor {f}: rms/theory = {ratio}");
        logs.push((delta.ln(), rms.ln()));
    }
    for w in logs.windows(2) {
        let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        assert!((slope - 1.5).abs() < 0.1, "slope {slope}");
    }
}
