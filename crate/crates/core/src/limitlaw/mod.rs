//! The limit family `ν(α)`: a Gaussian bulk plus a finite sum of uniform
//! (continuous cube) or Rademacher (discrete cube) spikes.
//!
//! For the continuous cube
//! `ν(α) = Law(√(1-‖α‖²) Z/√3 + Σ α_k U_k)` with characteristic function
//! `exp(-(1-‖α‖²) t²/6) Π sinc(α_k t)`; for the discrete cube
//! `ν(α) = Law(√(1-‖α‖²) Z + Σ α_k V_k)` with
//! `exp(-(1-‖α‖²) t²/2) Π cos(α_k t)`.

mod inversion;
mod ks;
mod recover;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::domain::{AlphaSequence, ModelKind, SampleSet};
use crate::error::{Error, Result};
use crate::numeric::sinc;
use crate::rng::{par_chunks, RngSpec};

pub use inversion::{CdfTable, Inverter, INVERSION_CUTOFF};
pub use ks::ks_distance;
pub use recover::{recover_alpha, Recovery, TabulatedFn, Termination};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub alpha: AlphaSequence,
    pub model: ModelKind,
}

impl LimitLaw {
    pub fn new(alpha: AlphaSequence, model: ModelKind) -> Self {
        Self { alpha, model }
    }

    /// The Gaussian law `ν(0)`.
    pub fn gaussian(model: ModelKind) -> Self {
        Self::new(AlphaSequence::zero(), model)
    }

    /// Coefficient `c` of `-c t²` in the log of the Gaussian factor.
    pub fn gaussian_rate(&self) -> f64 {
        self.alpha.gaussian_weight() * self.model.atom_variance() / 2.0
    }

    /// Standard deviation of the Gaussian component.
    pub fn gaussian_sd(&self) -> f64 {
        (self.alpha.gaussian_weight() * self.model.atom_variance()).sqrt()
    }

    /// Characteristic function (real and even).
    pub fn char_fn(&self, t: f64) -> f64 {
        let gauss = (-self.gaussian_rate() * t * t).exp();
        let spikes: f64 = match self.model {
            ModelKind::Continuous => self.alpha.entries().iter().map(|a| sinc(a * t)).product(),
            ModelKind::Discrete => self.alpha.entries().iter().map(|a| (a * t).cos()).product(),
        };
        gauss * spikes
    }

    /// `(mean, variance)`. The variance is `σ²` for every `α`: `1/3` on the
    /// continuous cube and `1` on the discrete cube.
    pub fn moments(&self) -> (f64, f64) {
        let s2 = self.model.atom_variance();
        let spikes = self.alpha.norm_sq().min(1.0);
        (0.0, (1.0 - spikes) * s2 + spikes * s2)
    }

    /// Distribution function by Fourier inversion.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(Inverter::new(self, x.abs())?.cdf(x))
    }

    /// Density by Fourier inversion.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        Inverter::new(self, x.abs())?.pdf(x)
    }

    /// Tabulated distribution function covering the bulk of the law.
    pub fn cdf_table(&self) -> Result<CdfTable> {
        CdfTable::new(self)
    }

    /// `count` independent draws, sorted.
    pub fn sample(&self, count: usize, rng: &RngSpec) -> Result<SampleSet> {
        if count == 0 {
            return Err(Error::InvalidArgument("count must be positive".into()));
        }
        let sd = self.gaussian_sd();
        let spikes = self.alpha.entries();
        let model = self.model;
        let chunks = par_chunks(rng, count, |rng, len| {
            (0..len)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    let mut x = sd * z;
                    for a in spikes {
                        x += match model {
                            ModelKind::Continuous => a * (2.0 * rng.random::<f64>() - 1.0),
                            ModelKind::Discrete => {
                                if rng.random::<bool>() {
                                    *a
                                } else {
                                    -a
                                }
                            }
                        };
                    }
                    x
                })
                .collect::<Vec<f64>>()
        });
        SampleSet::new(chunks.concat(), rng.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::make_alpha;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn law(a: &[f64], model: ModelKind) -> LimitLaw {
        LimitLaw::new(make_alpha(a).unwrap(), model)
    }

    #[test]
    fn char_fn_examples() {
        assert_eq!(law(&[0.6, 0.3], ModelKind::Continuous).char_fn(0.0), 1.0);
        assert_eq!(law(&[0.6, 0.3], ModelKind::Discrete).char_fn(0.0), 1.0);
        assert_relative_eq!(
            law(&[], ModelKind::Continuous).char_fn(1.0),
            0.846_481_724_9,
            max_relative = 1e-10
        );
        assert!(law(&[0.5], ModelKind::Continuous).char_fn(2.0 * PI).abs() < 1e-15);
        assert_relative_eq!(law(&[1.0], ModelKind::Discrete).char_fn(PI), -1.0);
    }

    #[test]
    fn char_fn_discrete_gaussian() {
        assert_relative_eq!(law(&[], ModelKind::Discrete).char_fn(1.5), (-1.125f64).exp());
    }

    #[test]
    fn moments_examples() {
        let (m, v) = law(&[], ModelKind::Continuous).moments();
        assert_eq!(m, 0.0);
        assert_relative_eq!(v, 1.0 / 3.0);
        assert_relative_eq!(law(&[0.6], ModelKind::Discrete).moments().1, 1.0);
        assert_relative_eq!(law(&[0.6, 0.8], ModelKind::Continuous).moments().1, 1.0 / 3.0);
    }

    #[test]
    fn sampling_degenerate_uniform() {
        let s = law(&[1.0], ModelKind::Continuous)
            .sample(50_000, &RngSpec::new(3, 0))
            .unwrap();
        let ks = ks_distance(&s, |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0));
        assert!(ks < 4.0 / (50_000f64).sqrt(), "ks = {ks}");
        assert!(s.values().iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn sampling_variance() {
        let s = law(&[], ModelKind::Continuous)
            .sample(1_000_000, &RngSpec::new(11, 0))
            .unwrap();
        assert!((s.variance() - 1.0 / 3.0).abs() < 0.005);
        let d = law(&[0.6, 0.3], ModelKind::Discrete)
            .sample(1_000_000, &RngSpec::new(11, 1))
            .unwrap();
        assert!((d.variance() - 1.0).abs() < 0.005);
    }

    #[test]
    fn sampling_is_reproducible() {
        let l = law(&[0.5, 0.2], ModelKind::Continuous);
        let a = l.sample(10_000, &RngSpec::new(9, 4)).unwrap();
        let b = l.sample(10_000, &RngSpec::new(9, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn continuity_in_alpha() {
        // sup_{|t| ≤ 20} |φ(t; α + δ e₁) − φ(t; α)| shrinks with δ
        let base = law(&[0.6, 0.3], ModelKind::Continuous);
        let sup = |m: f64| {
            let pert = law(&[0.6 + 1.0 / m, 0.3], ModelKind::Continuous);
            (0..=4000)
                .map(|i| -20.0 + i as f64 * 0.01)
                .map(|t| (pert.char_fn(t) - base.char_fn(t)).abs())
                .fold(0.0, f64::max)
        };
        let sups: Vec<f64> = [10.0, 100.0, 1e3, 1e4].iter().map(|&m| sup(m)).collect();
        assert!(sups.windows(2).all(|p| p[1] < p[0]), "{sups:?}");
        assert!(sups[3] < 1e-3);
    }

    proptest! {
        #[test]
        fn char_fn_even_and_bounded(
            raw in prop::collection::vec(0.0f64..0.44, 0..5),
            t in -60.0f64..60.0,
            discrete in any::<bool>(),
        ) {
            let model = if discrete { ModelKind::Discrete } else { ModelKind::Continuous };
            let l = law(&raw, model);
            prop_assert_eq!(l.char_fn(t), l.char_fn(-t));
            prop_assert!(l.char_fn(t).abs() <= 1.0);
        }
    }
}
