//! Monte Carlo checks of the sphere sampler against exact formulas.

use projldp::ldp::{bonferroni_tail_bounds, estimate_max_exceedance};
use projldp::rng::par_chunks;
use projldp::sphere::fill_sphere;
use projldp::{integrate_density_over_window, marginal_tail, sample_sphere, Region, RngSpec, WindowSpec};

const M: usize = 400_000;

#[test]
fn coordinate_moments() {
    // E θ₁² = 1/n, E θ₁⁴ = 3/(n(n+2))
    for n in [2usize, 5, 30] {
        let sums = par_chunks(&RngSpec::new(11, n as u64), M, |rng, len| {
            let mut v = vec![0.0; n];
            let mut acc = vec![[0.0f64; 2]; n];
            for _ in 0..len {
                fill_sphere(rng, &mut v);
                for (a, x) in acc.iter_mut().zip(&v) {
                    a[0] += x * x;
                    a[1] += x.powi(4);
                }
            }
            acc
        });
        let nf = n as f64;
        let m4 = 3.0 / (nf * (nf + 2.0));
        for i in 0..n {
            let s2: f64 = sums.iter().map(|c| c[i][0]).sum::<f64>() / M as f64;
            let s4: f64 = sums.iter().map(|c| c[i][1]).sum::<f64>() / M as f64;
            // 6 sd of the sample mean of θ²
            let sd2 = ((m4 - 1.0 / (nf * nf)) / M as f64).sqrt();
            assert!((s2 - 1.0 / nf).abs() < 6.0 * sd2, "n={n} i={i} {s2}");
            assert!((s4 - m4).abs() < 0.02 * m4 + 1e-4, "n={n} i={i} {s4}");
        }
    }
}

#[test]
fn exchangeable_signs_and_positions() {
    let n = 7;
    let counts = par_chunks(&RngSpec::new(12, 0), M, |rng, len| {
        let mut v = vec![0.0; n];
        let mut argmax = vec![0u64; n];
        let mut positive = 0u64;
        for _ in 0..len {
            fill_sphere(rng, &mut v);
            let i = (0..n).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
            argmax[i] += 1;
            positive += (v[0] > 0.0) as u64;
        }
        (argmax, positive)
    });
    let expected = M as f64 / n as f64;
    for i in 0..n {
        let c: u64 = counts.iter().map(|c| c.0[i]).sum();
        assert!((c as f64 - expected).abs() < 5.0 * expected.sqrt(), "position {i}: {c}");
    }
    let pos: u64 = counts.iter().map(|c| c.1).sum();
    assert!((pos as f64 - M as f64 / 2.0).abs() < 5.0 * (M as f64 / 4.0).sqrt());
}

#[test]
fn single_coordinate_tail_matches_frequency() {
    for (n, x) in [(3usize, 0.5), (10, 0.3), (40, 0.2)] {
        let hits: u64 = par_chunks(&RngSpec::new(13, n as u64), M, |rng, len| {
            let mut v = vec![0.0; n];
            (0..len)
                .map(|_| {
                    fill_sphere(rng, &mut v);
                    (v[0].abs() >= x) as u64
                })
                .sum::<u64>()
        })
        .into_iter()
        .sum();
        let p = marginal_tail(n, x).unwrap();
        let sd = (p * (1.0 - p) / M as f64).sqrt();
        assert!((hits as f64 / M as f64 - p).abs() < 5.0 * sd, "n={n} x={x}");
    }
}

#[test]
fn full_ball_window_integral_matches_frequency() {
    let (n, count) = (10usize, 1_000_000);
    let w = WindowSpec::new(vec![0.4, 0.2], 0.15).unwrap();
    let exact = integrate_density_over_window(n, &w, Region::FullBall).unwrap().value;
    let hits: u64 = par_chunks(&RngSpec::new(14, 0), count, |rng, len| {
        let mut v = vec![0.0; n];
        (0..len)
            .map(|_| {
                fill_sphere(rng, &mut v);
                w.contains_prefix(&v[..2]) as u64
            })
            .sum::<u64>()
    })
    .into_iter()
    .sum();
    let p = hits as f64 / count as f64;
    let sd = (exact * (1.0 - exact) / count as f64).sqrt();
    assert!((p - exact).abs() < 4.0 * sd, "{p} vs {exact}");
}

#[test]
fn max_coordinate_inside_bonferroni_bounds() {
    let xs = [0.3, 0.5, 0.7];
    for n in [5usize, 20] {
        let freq = estimate_max_exceedance(n, &xs, 200_000, &RngSpec::new(15, n as u64)).unwrap();
        for (x, p) in xs.iter().zip(freq) {
            let b = bonferroni_tail_bounds(n, *x).unwrap();
            assert!(
                p.ci_high >= b.lower && p.ci_low <= b.upper,
                "n={n} x={x}: {p:?} vs {b:?}"
            );
        }
    }
}

#[test]
fn sampled_directions_are_reproducible() {
    let a = sample_sphere(100, &RngSpec::new(5, 2)).unwrap();
    let b = sample_sphere(100, &RngSpec::new(5, 2)).unwrap();
    let c = sample_sphere(100, &RngSpec::new(5, 3)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
