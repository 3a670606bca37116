//! The two window estimators against each other and against the rate
//! bounds.

use projldp::ldp::{estimate_window_probability, estimate_window_probability_conditional, EstimateStatus};
use projldp::{empirical_rate_curve, window_rate_bounds, Estimator, RngSpec, WindowSpec};

fn overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

#[test]
fn direct_and_conditional_agree() {
    let cases = [
        (vec![0.6], 0.1, 25usize),
        (vec![0.6], 0.1, 50),
        (vec![0.5, 0.3], 0.1, 12),
        (vec![0.3], 0.05, 40),
    ];
    for (center, r, n) in cases {
        let w = WindowSpec::new(center, r).unwrap();
        let d = estimate_window_probability(n, &w, 200_000, &RngSpec::new(31, n as u64)).unwrap();
        let c = estimate_window_probability_conditional(n, &w, 200_000, &RngSpec::new(32, n as u64)).unwrap();
        assert!(d.hits > 100, "{n}");
        assert!(
            overlap((d.ci_low, d.ci_high), (c.ci_low, c.ci_high)),
            "n={n}: {d:?} vs {c:?}"
        );
    }
}

#[test]
fn auto_falls_back_on_rare_windows() {
    let w = WindowSpec::new(vec![0.6], 0.1).unwrap();
    let est = empirical_rate_curve(&[20, 150], &w, 20_000, &RngSpec::new(33, 0), Estimator::Auto).unwrap();
    assert_eq!(est[0].estimator, Estimator::Direct);
    assert_eq!(est[1].estimator, Estimator::Conditional);
    assert!(est.iter().all(|e| e.status == EstimateStatus::Ok));
    assert!(est.iter().all(|e| e.seed == 33));
}

#[test]
fn rates_climb_towards_the_sandwich() {
    let w = WindowSpec::new(vec![0.5], 0.1).unwrap();
    let b = window_rate_bounds(&w);
    let est = empirical_rate_curve(
        &[50, 100, 200, 400],
        &w,
        50_000,
        &RngSpec::new(34, 0),
        Estimator::Conditional,
    )
    .unwrap();
    for p in est.windows(2) {
        assert!(p[1].rate_hat > p[0].rate_hat);
    }
    let last = est.last().unwrap().rate_hat;
    assert!(last > b.lower - 0.05 && last < b.upper + 0.05, "{last} vs {b:?}");
}

#[test]
fn window_around_typical_point_has_zero_rate() {
    // η_n → 0, so a window around the origin captures almost everything
    let w = WindowSpec::new(vec![0.0], 0.3).unwrap();
    let e = estimate_window_probability(400, &w, 10_000, &RngSpec::new(35, 0)).unwrap();
    assert_eq!(e.p_hat, 1.0);
    assert_eq!(e.rate_hat, 0.0);
    assert_eq!((e.lower_rate_bound, e.upper_rate_bound), (0.0, 0.0));
}
