use crate::domain::SampleSet;

/// Kolmogorov–Smirnov distance `sup_x |F_m(x) − F(x)|` between the
/// empirical distribution of `samples` and `cdf`, checking both one-sided
/// limits of the empirical CDF at every sample point.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &SampleSet, cdf: F) -> f64 {
    let m = samples.count() as f64;
    samples
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i as f64 + 1.0) / m - f;
            let below = f - i as f64 / m;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSpec;
    use rand::Rng;

    fn uniform_cdf(x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    #[test]
    fn one_point_cases() {
        let s = SampleSet::new(vec![0.5], 0).unwrap();
        assert_eq!(ks_distance(&s, uniform_cdf), 0.5);
        let s = SampleSet::new(vec![-1.0], 0).unwrap();
        assert_eq!(ks_distance(&s, uniform_cdf), 1.0);
    }

    #[test]
    fn ties_use_both_limits() {
        let s = SampleSet::new(vec![0.5, 0.5, 0.5, 0.5], 0).unwrap();
        assert_eq!(ks_distance(&s, uniform_cdf), 0.5);
    }

    #[test]
    fn kolmogorov_quantile_coverage() {
        // P[√m D > 1.63] ≈ 0.01 for the Kolmogorov limit law
        let m = 10_000;
        let exceed = (0..100u64)
            .filter(|&seed| {
                let mut rng = RngSpec::new(seed, 0).rng();
                let v: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
                let s = SampleSet::new(v, seed).unwrap();
                ks_distance(&s, uniform_cdf) >= 1.63 / (m as f64).sqrt()
            })
            .count();
        assert!(exceed <= 1, "{exceed} exceedances out of 100");
    }
}
