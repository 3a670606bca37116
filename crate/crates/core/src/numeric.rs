//! Small numerical helpers shared across modules.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

/// Kahan–Babuška compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of squares.
pub fn sum_squares(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).collect::<CompensatedSum>().value()
}

/// `sin(x)/x` with value 1 at the origin. Uses the Taylor series
/// `1 - x^2/6 + x^4/120` for `|x| < 1e-4`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Log of the normalising constant `Γ(n/2) / (π^{l/2} Γ((n-l)/2))` of the
/// joint density of the first `l` coordinates of a uniform point on the
/// sphere in `R^n`.
pub fn ln_sphere_marginal_const(n: usize, l: usize) -> f64 {
    debug_assert!(l < n);
    ln_gamma(n as f64 / 2.0) - (l as f64 / 2.0) * PI.ln() - ln_gamma((n - l) as f64 / 2.0)
}

/// `ln C(n, k)` via log-gamma.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Volume of the unit ball in `R^l`.
pub fn unit_ball_volume(l: usize) -> f64 {
    let h = l as f64 / 2.0;
    (h * PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut values = vec![1.0];
        values.extend(std::iter::repeat_n(1e-16, 10_000));
        let s: CompensatedSum = values.iter().copied().collect();
        assert_relative_eq!(s.value(), 1.0 + 1e-12, max_relative = 1e-15);
    }

    #[test]
    fn sinc_series_matches_direct_at_switch() {
        let x = 1e-4;
        assert_relative_eq!(sinc(x * 0.999_999), x.sin() / x, max_relative = 1e-14);
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn sphere_constant_small_cases() {
        // n = 3, l = 1: Γ(3/2)/(√π Γ(1)) = 1/2
        assert_relative_eq!(ln_sphere_marginal_const(3, 1).exp(), 0.5, max_relative = 1e-14);
        // n = 4, l = 1: 2/π
        assert_relative_eq!(ln_sphere_marginal_const(4, 1).exp(), 2.0 / PI, max_relative = 1e-14);
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(unit_ball_volume(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(unit_ball_volume(2), PI, max_relative = 1e-14);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn binomial() {
        assert_relative_eq!(ln_binomial(10, 3).exp(), 120.0, max_relative = 1e-12);
    }

    #[test]
    fn normal_cdf_reference() {
        assert_relative_eq!(std_normal_cdf(1.96), 0.975_002_104_851_780, max_relative = 1e-11);
        assert_relative_eq!(std_normal_cdf(0.0), 0.5);
    }
}
