//! Sampler-level checks at reduced sizes; the full-size versions live in the
//! acceptance target.

use degsde::analysis::{ks_two_sample, ode_residual, origin_proximity, path_clock, realized_qv};
use degsde::*;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn quadratic_variation_tracks_the_clock() {
    let g = TimeGrid64::uniform(1.0, 1 << 12).unwrap();
    let (mut q, mut c) = (0.0, 0.0);
    for i in 0..10 {
        let p = sample_weak_solution(Phase64::new(1.0, 0.0), Alpha64::new(-0.25).unwrap(), &g, 3, i).unwrap();
        q += realized_qv(&p.y).last().unwrap();
        c += path_clock(&p).last().unwrap();
    }
    assert!((q - c).abs() / c < 0.1, "qv {q} clock {c}");
}

#[test]
fn clock_integral_equals_inverse_clock_at_alpha_zero() {
    let g = TimeGrid64::uniform(2.0, 64).unwrap();
    let p = sample_weak_solution(Phase64::new(1.0, 0.3), Alpha64::new(0.0).unwrap(), &g, 1, 1).unwrap();
    for (c, t) in path_clock(&p).iter().zip(g.times()) {
        assert!((c - t).abs() < 1e-12);
    }
}

#[test]
fn time_change_residual_halves_with_the_grid() {
    let mut res = Vec::new();
    for steps in [128usize, 256] {
        let g = TimeGrid64::uniform(1.0, steps).unwrap();
        let r: f64 = (0..20)
            .map(|i| {
                let p = sample_weak_solution(Phase64::new(1.0, 0.0), Alpha64::new(-0.25).unwrap(), &g, 8, i).unwrap();
                ode_residual(&p)
            })
            .sum();
        res.push(r);
    }
    let ratio = res[1] / res[0];
    assert!((0.35..0.65).contains(&ratio), "ratio {ratio}");
}

#[test]
fn alpha_zero_matches_gaussian_closed_form() {
    // X_1 = x0 + y0 + ∫_0^1 B ~ N(x0 + y0, 1/3)
    let g = TimeGrid64::uniform(1.0, 16).unwrap();
    let n = 2000u64;
    let xs = sorted(
        (0..n)
            .map(|i| *sample_weak_solution(Phase64::new(1.0, 0.5), Alpha64::new(0.0).unwrap(), &g, 4, i).unwrap().x.last().unwrap())
            .collect(),
    );
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((mean - 1.5).abs() < 4.0 * (1.0 / 3.0 / n as f64).sqrt());
    assert!((var - 1.0 / 3.0).abs() < 4.0 * (1.0 / 3.0) * (2.0 / n as f64).sqrt());
    let ref_draws = sorted(
        (0..n)
            .map(|i| {
                let (z, _) = rng::NormalStream::at(99, i, 0).next_pair();
                1.5 + (1.0f64 / 3.0).sqrt() * z
            })
            .collect(),
    );
    assert!(ks_two_sample(&xs, &ref_draws).unwrap().p_value > 1e-3);
}

#[test]
fn origin_is_rarely_approached() {
    let g = TimeGrid64::uniform(5.0, 500).unwrap();
    let s = TimeChangeSampler {
        oversample: 4,
        ..Default::default()
    };
    let paths: Vec<_> = (0..300)
        .map(|i| {
            s.sample(Phase64::new(1.0, 0.0), Alpha64::new(-0.25).unwrap(), &g, Noise::Seeded { seed: 12, stream_id: i })
                .unwrap()
        })
        .collect();
    let m = origin_proximity(&paths, &[1e-1, 1e-2, 1e-3]).unwrap();
    let f = |e: f64| m.get(&analysis::origin_key(e)).unwrap().value;
    assert!(f(1e-1) >= f(1e-2) && f(1e-2) >= f(1e-3));
    assert!(f(1e-3) < 0.02);
}

#[test]
fn time_change_and_em_agree_in_law_at_alpha_zero() {
    // At α = 0 both samplers solve dX = Y dt, dY = dB exactly on grid nodes
    // up to EM's left-point integration of Y.
    let g = TimeGrid64::uniform(1.0, 512).unwrap();
    let n = 1000u64;
    let tc = sorted((0..n).map(|i| *sample_weak_solution(Phase64::new(0.0, 1.0), Alpha64::new(0.0).unwrap(), &g, 6, i).unwrap().x.last().unwrap()).collect());
    let em = sorted(
        (0..n)
            .map(|i| {
                let d = sample_driver(&g, 7, i);
                *euler_maruyama(Phase64::new(0.0, 1.0), Alpha64::new(0.0).unwrap(), &d, None).unwrap().x.last().unwrap()
            })
            .collect(),
    );
    assert!(ks_two_sample(&tc, &em).unwrap().p_value > 1e-3);
}
