//! Rate functions, window rate bounds, and Monte Carlo estimates of
//! `P[η_n ∈ W_{r,l}(x)]` where `η_n` is the order-statistic vector of a
//! uniform point on the sphere in `R^n`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::domain::{AlphaSequence, WindowSpec};
use crate::error::{Error, Result};
use crate::numeric::{ln_sphere_marginal_const, sum_squares};
use crate::quad::{integrate, Tolerance};
use crate::rng::{par_chunks, RngSpec};
use crate::sphere::{fill_sphere, integrate_density_over_window, marginal_tail, Region, WindowGeometry};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Smallest sample count accepted by the window estimators.
pub const MIN_SAMPLES: usize = 1000;

/// Below this many direct hits, [`Estimator::Auto`] switches to the
/// conditional estimator.
pub const AUTO_MIN_HITS: u64 = 100;

/// Rejection attempts allowed per accepted draw in the conditional
/// estimator.
const MAX_REJECTIONS: usize = 1_000_000;

/// `-½ log(1 - ‖α‖₂²)`, `+∞` once `1 - ‖α‖₂² ≤ 1e-300`.
pub fn rate_function(alpha: &AlphaSequence) -> f64 {
    rate_of_norm_sq(alpha.norm_sq())
}

fn rate_of_norm_sq(norm_sq: f64) -> f64 {
    if 1.0 - norm_sq <= 1e-300 {
        f64::INFINITY
    } else {
        -0.5 * (-norm_sq).ln_1p()
    }
}

/// Radius of the sublevel set `{rate ≤ c}`: the closed ball
/// `‖x‖₂² ≤ 1 - e^{-2c}`.
pub fn rate_sublevel_radius(c: f64) -> f64 {
    (-(-2.0 * c).exp_m1()).sqrt()
}

/// Asymptotic bounds on the decay rate `-(1/n) log P[η_n ∈ W_{r,l}(x)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBounds {
    /// `-½ log(1 - (‖x‖ - r)²)` when `r ≤ ‖x‖`, otherwise 0.
    pub lower: f64,
    /// `-½ log(1 - ‖x‖²)`.
    pub upper: f64,
}

pub fn window_rate_bounds(w: &WindowSpec) -> RateBounds {
    let norm = w.center_norm();
    let r = w.radius();
    let lower = if r <= norm {
        rate_of_norm_sq((norm - r) * (norm - r))
    } else {
        0.0
    };
    RateBounds {
        lower,
        upper: rate_of_norm_sq(norm * norm),
    }
}

/// A binomial proportion with its Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn wilson(hits: u64, trials: u64) -> Self {
        let m = trials as f64;
        let p = hits as f64 / m;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / m;
        let center = (p + z2 / (2.0 * m)) / denom;
        let half = Z95 / denom * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt();
        Self {
            hits,
            trials,
            p_hat: p,
            ci_low: (center - half).clamp(0.0, p),
            ci_high: (center + half).clamp(p, 1.0),
        }
    }

    /// Normal-approximation standard error.
    pub fn std_err(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Frequency of the window event over independent sphere samples.
    Direct,
    /// Exact density mass of the ordered positive sector of the window,
    /// times a Monte Carlo estimate of the conditional probability that the
    /// remaining coordinates stay below the last prefix coordinate.
    Conditional,
    /// Direct, falling back to conditional below [`AUTO_MIN_HITS`] hits.
    Auto,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Estimator::Direct => "direct",
            Estimator::Conditional => "conditional",
            Estimator::Auto => "auto",
        })
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(Estimator::Direct),
            "conditional" => Ok(Estimator::Conditional),
            "auto" => Ok(Estimator::Auto),
            other => Err(Error::Parse(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateStatus {
    Ok,
    ZeroHits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpEstimate {
    pub n: usize,
    pub window: WindowSpec,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `-(1/n) log p_hat`, `+∞` when nothing was hit.
    pub rate_hat: f64,
    /// Delta-method standard error of `rate_hat`.
    pub rate_std_err: f64,
    pub lower_rate_bound: f64,
    pub upper_rate_bound: f64,
    pub sample_count: usize,
    pub hits: u64,
    pub seed: u64,
    pub estimator: Estimator,
    pub status: EstimateStatus,
}

impl LdpEstimate {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        n: usize,
        w: &WindowSpec,
        estimator: Estimator,
        rng: &RngSpec,
        hits: u64,
        count: usize,
        scale: f64,
        scale_rel_err: f64,
    ) -> Self {
        let prop = Proportion::wilson(hits, count as u64);
        let p_hat = (prop.p_hat * scale).min(1.0);
        let widen = Z95 * scale_rel_err;
        let ci_low = (prop.ci_low * scale * (1.0 - widen)).clamp(0.0, p_hat);
        let ci_high = (prop.ci_high * scale * (1.0 + widen)).clamp(p_hat, 1.0);
        let (rate_hat, rate_std_err, status) = if hits == 0 {
            (f64::INFINITY, f64::INFINITY, EstimateStatus::ZeroHits)
        } else {
            let q = prop.p_hat;
            let rel = ((1.0 - q) / (count as f64 * q) + scale_rel_err * scale_rel_err).sqrt();
            (-p_hat.ln() / n as f64, rel / n as f64, EstimateStatus::Ok)
        };
        let bounds = window_rate_bounds(w);
        Self {
            n,
            window: w.clone(),
            p_hat,
            ci_low,
            ci_high,
            rate_hat,
            rate_std_err,
            lower_rate_bound: bounds.lower,
            upper_rate_bound: bounds.upper,
            sample_count: count,
            hits,
            seed: rng.seed,
            estimator,
            status,
        }
    }
}

fn check_window_args(n: usize, w: &WindowSpec, count: usize) -> Result<()> {
    if count < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} samples, got {count}"
        )));
    }
    if n < w.prefix_len() + 2 {
        return Err(Error::InvalidArgument(format!(
            "need n >= l + 2 (n = {n}, l = {})",
            w.prefix_len()
        )));
    }
    Ok(())
}

/// Writes the `top.len()` largest absolute values of `v`, non-increasing.
fn top_abs(v: &[f64], top: &mut [f64]) {
    top.fill(0.0);
    let l = top.len();
    for &x in v {
        let a = x.abs();
        if a > top[l - 1] {
            let mut j = l - 1;
            while j > 0 && top[j - 1] < a {
                top[j] = top[j - 1];
                j -= 1;
            }
            top[j] = a;
        }
    }
}

/// Direct Monte Carlo estimate of `P[η_n ∈ W]`.
pub fn estimate_window_probability(n: usize, w: &WindowSpec, count: usize, rng: &RngSpec) -> Result<LdpEstimate> {
    check_window_args(n, w, count)?;
    let l = w.prefix_len();
    let hits: u64 = par_chunks(rng, count, |rng, len| {
        let mut theta = vec![0.0; n];
        let mut top = vec![0.0; l];
        let mut hits = 0u64;
        for _ in 0..len {
            fill_sphere(rng, &mut theta);
            top_abs(&theta, &mut top);
            hits += w.contains_prefix(&top) as u64;
        }
        hits
    })
    .into_iter()
    .sum();
    Ok(LdpEstimate::assemble(
        n,
        w,
        Estimator::Direct,
        rng,
        hits,
        count,
        1.0,
        0.0,
    ))
}

/// Conditional estimate of `P[η_n ∈ W]`.
///
/// `P = n!/(n-l)! · 2^l · ∫_{B⁺} f(z) q(z) dz` where `B⁺` is the window ball
/// cut to `z₁ > … > z_l > 0`, `f` the density of the first `l`
/// coordinates, and `q(z)` the probability that the other coordinates,
/// uniform on the sphere of radius `√(1-|z|²)` in `R^{n-l}`, all stay
/// below `z_l` in absolute value. `∫_{B⁺} f` comes from quadrature; `z` is
/// drawn from `f` on `B⁺` by rejection and `q` is estimated by Monte
/// Carlo.
pub fn estimate_window_probability_conditional(
    n: usize,
    w: &WindowSpec,
    count: usize,
    rng: &RngSpec,
) -> Result<LdpEstimate> {
    check_window_args(n, w, count)?;
    let l = w.prefix_len();
    let mass = integrate_density_over_window(n, w, Region::OrderedPositive)?;
    let ln_mult = ln_gamma(n as f64 + 1.0) - ln_gamma((n - l) as f64 + 1.0) + l as f64 * std::f64::consts::LN_2;
    if mass.value <= 0.0 {
        return Ok(LdpEstimate::assemble(
            n,
            w,
            Estimator::Conditional,
            rng,
            0,
            count,
            0.0,
            0.0,
        ));
    }
    let geom = WindowGeometry::new(n, w)?;
    let counts: Vec<Result<u64>> = par_chunks(rng, count, |rng, len| {
        let mut z = vec![0.0; l];
        let mut rest = vec![0.0; n - l];
        let mut hits = 0u64;
        for _ in 0..len {
            let mut tries = 0;
            loop {
                tries += 1;
                if tries > MAX_REJECTIONS {
                    return Err(Error::Numerical("rejection sampler acceptance too low".into()));
                }
                geom.uniform_in_ball(rng, &mut z);
                if geom.in_region(&z, Region::OrderedPositive) && rng.random::<f64>() < geom.scaled_density(&z) {
                    break;
                }
            }
            let radius = (1.0 - sum_squares(&z)).max(0.0).sqrt();
            fill_sphere(rng, &mut rest);
            let max_rest = rest.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            hits += (radius * max_rest < z[l - 1]) as u64;
        }
        Ok(hits)
    });
    let hits = counts.into_iter().sum::<Result<u64>>()?;
    let scale = (ln_mult + mass.value.ln()).exp();
    let rel = if mass.value > 0.0 {
        mass.std_err / mass.value
    } else {
        0.0
    };
    Ok(LdpEstimate::assemble(
        n,
        w,
        Estimator::Conditional,
        rng,
        hits,
        count,
        scale,
        rel,
    ))
}

/// Estimate with the chosen estimator.
pub fn estimate_with(
    estimator: Estimator,
    n: usize,
    w: &WindowSpec,
    count: usize,
    rng: &RngSpec,
) -> Result<LdpEstimate> {
    match estimator {
        Estimator::Direct => estimate_window_probability(n, w, count, rng),
        Estimator::Conditional => estimate_window_probability_conditional(n, w, count, rng),
        Estimator::Auto => {
            let direct = estimate_window_probability(n, w, count, rng)?;
            if direct.hits >= AUTO_MIN_HITS {
                Ok(direct)
            } else {
                estimate_window_probability_conditional(n, w, count, &rng.split(u64::MAX))
            }
        }
    }
}

/// One estimate per dimension, each on its own stream `rng.split(i)`.
pub fn empirical_rate_curve(
    n_values: &[usize],
    w: &WindowSpec,
    count: usize,
    rng: &RngSpec,
    estimator: Estimator,
) -> Result<Vec<LdpEstimate>> {
    if n_values.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidArgument("dimensions must be strictly increasing".into()));
    }
    n_values
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut est = estimate_with(estimator, n, w, count, &rng.split(i as u64))?;
            est.seed = rng.seed;
            Ok(est)
        })
        .collect()
}

/// Bonferroni sandwich for `P[Θ_{1:n} ≥ x]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    pub lower: f64,
    pub upper: f64,
}

/// `P[|Θ₁| ≥ x, |Θ₂| ≥ x]`, integrating the two-coordinate density as
/// `∫_x^{√(1-x²)} 2 f₁(z) P[|Θ'₁| ≥ x/√(1-z²)] dz`, where `Θ'` is uniform
/// on the sphere in `R^{n-1}` (the inner integral of the pair density).
pub fn pair_tail_probability(n: usize, x: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("pair tail needs n >= 3, got {n}")));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("threshold must lie in [0, 1), got {x}")));
    }
    if 2.0 * x * x >= 1.0 {
        return Ok(0.0);
    }
    let ln_c = ln_sphere_marginal_const(n, 1);
    let p = (n as f64 - 3.0) / 2.0;
    let mut failure = None;
    let r = integrate(
        |z| {
            let y = x / (1.0 - z * z).sqrt();
            if y >= 1.0 {
                return 0.0;
            }
            match marginal_tail(n - 1, y) {
                Ok(t) => 2.0 * (ln_c + p * (1.0 - z * z).ln()).exp() * t,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        x,
        (1.0 - x * x).sqrt(),
        Tolerance::new(0.0, 1e-9),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if !r.converged {
        return Err(Error::Numerical(format!(
            "pair tail quadrature failed for n = {n}, x = {x}"
        )));
    }
    Ok(r.value.max(0.0))
}

/// `upper = min(1, n T₁)`, `lower = n T₁ - C(n,2) T₂` with `T₁` the
/// single-coordinate tail and `T₂` the pair tail.
pub fn bonferroni_tail_bounds(n: usize, x: f64) -> Result<TailBounds> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need n >= 3, got {n}")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1), got {x}")));
    }
    let nf = n as f64;
    let first = nf * marginal_tail(n, x)?;
    let second = nf * (nf - 1.0) / 2.0 * pair_tail_probability(n, x)?;
    let upper = first.min(1.0);
    let lower = (first - second).clamp(0.0, upper);
    Ok(TailBounds { lower, upper })
}

/// Monte Carlo frequencies of `{Θ_{1:n} ≥ x}` for several thresholds from
/// one batch of sphere samples.
pub fn estimate_max_exceedance(n: usize, thresholds: &[f64], count: usize, rng: &RngSpec) -> Result<Vec<Proportion>> {
    if n == 0 || count == 0 {
        return Err(Error::InvalidArgument("need n >= 1 and count >= 1".into()));
    }
    let k = thresholds.len();
    let per_chunk = par_chunks(rng, count, |rng, len| {
        let mut theta = vec![0.0; n];
        let mut hits = vec![0u64; k];
        for _ in 0..len {
            fill_sphere(rng, &mut theta);
            let m = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (h, &x) in hits.iter_mut().zip(thresholds) {
                *h += (m >= x) as u64;
            }
        }
        hits
    });
    Ok((0..k)
        .map(|j| Proportion::wilson(per_chunk.iter().map(|h| h[j]).sum(), count as u64))
        .collect())
}
