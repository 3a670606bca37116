//! Uniform points on the sphere, their order statistics, exact marginal
//! densities of the first coordinates, and projections of the cube.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::domain::{Direction, ModelKind, OrderStatVector, SampleSet, WindowSpec};
use crate::error::{Error, Result};
use crate::numeric::{ln_sphere_marginal_const, sum_squares, unit_ball_volume};
use crate::quad::{integrate, Tolerance};
use crate::rng::{par_chunks, RngSpec};

/// Relative tolerance of the tail quadrature.
pub const TAIL_REL_TOL: f64 = 1e-10;

/// Relative tolerance of the outer window quadrature.
pub const WINDOW_REL_TOL: f64 = 1e-6;

/// Largest prefix length integrated by nested quadrature; longer prefixes
/// fall back to Monte Carlo.
pub const MAX_QUADRATURE_DIM: usize = 3;

/// Default sample count for Monte Carlo window integrals.
pub const DEFAULT_MC_SAMPLES: usize = 1 << 20;

/// Fills `out` with a uniform point on the sphere: standard normals scaled
/// to unit length. A zero Gaussian vector is redrawn.
pub fn fill_sphere<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut norm_sq = 0.0;
        for c in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *c = g;
            norm_sq += g * g;
        }
        if norm_sq > 0.0 {
            let inv = norm_sq.sqrt().recip();
            out.iter_mut().for_each(|c| *c *= inv);
            return;
        }
    }
}

/// Draws a uniform point of the sphere in `R^n` from the stream `rng`.
pub fn sample_sphere(n: usize, rng: &RngSpec) -> Result<Direction> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut coords = vec![0.0; n];
    fill_sphere(&mut rng.rng(), &mut coords);
    // normalise again with the compensated norm so the unit-norm check is tight
    Direction::normalized(coords)
}

/// Absolute coordinates sorted non-increasingly.
pub fn order_statistics(theta: &Direction) -> OrderStatVector {
    OrderStatVector::from_direction(theta)
}

/// Joint density of the first `l` coordinates of a uniform point on the
/// sphere in `R^n`,
/// `Γ(n/2) / (π^{l/2} Γ((n-l)/2)) · (1 - |s|²)^{(n-l-2)/2}`.
///
/// On the unit sphere `|s| = 1` the value is 0 when the exponent is
/// positive, the constant when it is zero, and
/// [`Error::BoundarySingularity`] when it is negative.
pub fn marginal_density(n: usize, l: usize, s: &[f64]) -> Result<f64> {
    check_dims(n, l)?;
    if s.len() != l {
        return Err(Error::InvalidArgument(format!(
            "expected {l} coordinates, got {}",
            s.len()
        )));
    }
    let norm_sq = sum_squares(s);
    if !norm_sq.is_finite() || norm_sq > 1.0 + crate::domain::NORM_SLACK {
        return Err(Error::OutsideDomain { norm_sq });
    }
    let exponent = (n as f64 - l as f64 - 2.0) / 2.0;
    let ln_c = ln_sphere_marginal_const(n, l);
    let gap = 1.0 - norm_sq;
    if gap <= 0.0 {
        return if exponent > 0.0 {
            Ok(0.0)
        } else if exponent == 0.0 {
            Ok(ln_c.exp())
        } else {
            Err(Error::BoundarySingularity)
        };
    }
    Ok((ln_c + exponent * gap.ln()).exp())
}

fn check_dims(n: usize, l: usize) -> Result<()> {
    if n < 2 || l == 0 || l >= n {
        return Err(Error::InvalidArgument(format!(
            "marginal needs n >= 2 and 1 <= l <= n - 1 (n = {n}, l = {l})"
        )));
    }
    Ok(())
}

/// `ln P[|Θ₁| ≥ x]` for a uniform point of the sphere in `R^n`.
///
/// The tail integral is taken over `v ∈ [0, 1]` with
/// `s = 1 - (1 - x) v²`, and `(1 - x²)^{(n-3)/2}` is factored out, so the
/// result stays finite long after the probability itself underflows.
pub fn ln_marginal_tail(n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "tail threshold must lie in [0, 1), got {x}"
        )));
    }
    if n == 1 || x == 0.0 {
        return Ok(0.0);
    }
    let p = (n as f64 - 3.0) / 2.0;
    let one_minus = 1.0 - x;
    let one_plus = 1.0 + x;
    let integrand = |v: f64| {
        let ratio = v * v * (2.0 - one_minus * v * v) / one_plus;
        (p * ratio.ln() + v.ln()).exp()
    };
    let r = integrate(integrand, 0.0, 1.0, Tolerance::new(0.0, TAIL_REL_TOL));
    if !r.converged || !(r.value > 0.0) {
        return Err(Error::Numerical(format!("tail quadrature failed for n = {n}, x = {x}")));
    }
    let ln_c = ln_sphere_marginal_const(n, 1);
    let ln_tail = (4.0 * one_minus).ln() + ln_c + p * (one_minus * one_plus).ln() + r.value.ln();
    Ok(ln_tail.min(0.0))
}

/// `P[|Θ₁| ≥ x] = ∫_x^1 2 f(s) ds`.
pub fn marginal_tail(n: usize, x: f64) -> Result<f64> {
    ln_marginal_tail(n, x).map(f64::exp)
}

/// Integration region inside the window ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `B_{r,l}(x) ∩ {|z| ≤ 1}`.
    FullBall,
    /// Additionally `z₁ > … > z_l > 0`.
    OrderedPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMethod {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowIntegral {
    pub value: f64,
    /// Quadrature error estimate or Monte Carlo standard error.
    pub std_err: f64,
    pub method: IntegrationMethod,
}

/// `∫ f` over the window ball intersected with `region`, where `f` is the
/// density of the first `l` sphere coordinates. Nested adaptive quadrature
/// for `l ≤ 3`, otherwise Monte Carlo with [`DEFAULT_MC_SAMPLES`] draws.
pub fn integrate_density_over_window(n: usize, w: &WindowSpec, region: Region) -> Result<WindowIntegral> {
    if w.prefix_len() > MAX_QUADRATURE_DIM {
        return integrate_density_over_window_mc(n, w, region, DEFAULT_MC_SAMPLES, &RngSpec::new(0, 0));
    }
    let geom = WindowGeometry::new(n, w)?;
    let mut prefix = Vec::with_capacity(w.prefix_len());
    let (value, err) = geom.nested(&mut prefix, 1.0, region, WINDOW_REL_TOL);
    Ok(WindowIntegral {
        value: value * geom.scale,
        std_err: err * geom.scale,
        method: IntegrationMethod::Quadrature,
    })
}

/// Hit-or-miss Monte Carlo version of [`integrate_density_over_window`]:
/// uniform points of the window ball weighted by the exact density.
pub fn integrate_density_over_window_mc(
    n: usize,
    w: &WindowSpec,
    region: Region,
    samples: usize,
    rng: &RngSpec,
) -> Result<WindowIntegral> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let geom = WindowGeometry::new(n, w)?;
    let l = w.prefix_len();
    let sums = par_chunks(rng, samples, |rng, len| {
        let mut z = vec![0.0; l];
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..len {
            geom.uniform_in_ball(rng, &mut z);
            let v = if geom.in_region(&z, region) {
                geom.scaled_density(&z)
            } else {
                0.0
            };
            s1 += v;
            s2 += v * v;
        }
        (s1, s2)
    });
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |acc, s| (acc.0 + s.0, acc.1 + s.1));
    let m = samples as f64;
    let mean = s1 / m;
    let var = ((s2 / m - mean * mean) * m / (m - 1.0)).max(0.0);
    let vol = unit_ball_volume(l) * w.radius().powi(l as i32);
    Ok(WindowIntegral {
        value: vol * mean * geom.scale,
        std_err: vol * (var / m).sqrt() * geom.scale,
        method: IntegrationMethod::MonteCarlo,
    })
}

/// Window ball with the density rescaled by its value at the point
/// closest to the origin, which is its maximum over the ball when
/// `n ≥ l + 2`. For `n = l + 1` the density has an integrable singularity
/// on the unit sphere and the rescaled value is unbounded there.
pub(crate) struct WindowGeometry<'a> {
    center: &'a [f64],
    radius: f64,
    exponent: f64,
    ln_gap_max: f64,
    /// `f` at the point of the ball closest to the origin.
    pub(crate) scale: f64,
}

impl<'a> WindowGeometry<'a> {
    pub(crate) fn new(n: usize, w: &'a WindowSpec) -> Result<Self> {
        let l = w.prefix_len();
        check_dims(n, l)?;
        let inner = (w.center_norm() - w.radius()).max(0.0);
        if inner >= 1.0 {
            return Err(Error::EmptyWindow);
        }
        let exponent = (n as f64 - l as f64 - 2.0) / 2.0;
        let ln_gap_max = (1.0 - inner * inner).ln();
        let scale = (ln_sphere_marginal_const(n, l) + exponent * ln_gap_max).exp();
        Ok(Self {
            center: w.center(),
            radius: w.radius(),
            exponent,
            ln_gap_max,
            scale,
        })
    }

    /// `f(z) / scale`; zero outside the unit ball.
    pub(crate) fn scaled_density(&self, z: &[f64]) -> f64 {
        let gap = 1.0 - sum_squares(z);
        if gap <= 0.0 {
            return if self.exponent == 0.0 { 1.0 } else { 0.0 };
        }
        (self.exponent * (gap.ln() - self.ln_gap_max)).exp()
    }

    pub(crate) fn in_region(&self, z: &[f64], region: Region) -> bool {
        let in_ball =
            z.iter().zip(self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() < self.radius * self.radius;
        let in_unit = sum_squares(z) <= 1.0;
        let sector = match region {
            Region::FullBall => true,
            Region::OrderedPositive => z.last().is_some_and(|&v| v > 0.0) && z.windows(2).all(|p| p[0] > p[1]),
        };
        in_ball && in_unit && sector
    }

    pub(crate) fn uniform_in_ball<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64]) {
        fill_sphere(rng, z);
        let l = z.len() as f64;
        let u: f64 = rng.random();
        let rad = self.radius * u.powf(1.0 / l);
        for (zi, c) in z.iter_mut().zip(self.center) {
            *zi = c + rad * *zi;
        }
    }

    /// Integral over the remaining coordinates given `prefix`, with
    /// `rem_unit = 1 - |prefix|²` passed down exactly. Each coordinate is
    /// integrated in `z = √rem_unit · sin φ`, which turns the endpoint factor
    /// `(rem_unit - z²)^p` into the smooth `cos^{2p+1} φ` for every `p ≥ -1/2`.
    fn nested(&self, prefix: &mut Vec<f64>, rem_unit: f64, region: Region, rel_tol: f64) -> (f64, f64) {
        let k = prefix.len();
        let l = self.center.len();
        let used_ball: f64 = prefix.iter().zip(self.center).map(|(z, c)| (z - c) * (z - c)).sum();
        let rem_ball = self.radius * self.radius - used_ball;
        if rem_ball <= 0.0 || rem_unit <= 0.0 {
            return (0.0, 0.0);
        }
        let (rb, ru) = (rem_ball.sqrt(), rem_unit.sqrt());
        let mut lo = (self.center[k] - rb).max(-ru);
        let mut hi = (self.center[k] + rb).min(ru);
        // rb and ru come from different roundings; a window edge within
        // rounding of the unit sphere would cost √ε accuracy through asin
        if hi > ru * (1.0 - 1e-12) {
            hi = ru;
        }
        if lo < -ru * (1.0 - 1e-12) {
            lo = -ru;
        }
        if region == Region::OrderedPositive {
            lo = lo.max(0.0);
            if k > 0 {
                hi = hi.min(prefix[k - 1]);
            }
        }
        if lo >= hi {
            return (0.0, 0.0);
        }
        let (plo, phi) = ((lo / ru).clamp(-1.0, 1.0).asin(), (hi / ru).clamp(-1.0, 1.0).asin());
        let last = k + 1 == l;
        let inner_tol = rel_tol * 1e-3;
        let r = integrate(
            |p| {
                let c = p.cos();
                if c <= 0.0 {
                    return 0.0;
                }
                let rem = rem_unit * c * c;
                let v = if last {
                    (self.exponent * (rem.ln() - self.ln_gap_max)).exp()
                } else {
                    prefix.push(ru * p.sin());
                    let v = self.nested(prefix, rem, region, inner_tol).0;
                    prefix.pop();
                    v
                };
                v * ru * c
            },
            plo,
            phi,
            Tolerance::new(0.0, rel_tol),
        );
        (r.value, r.abs_err)
    }
}

/// `count` independent draws of `⟨X, θ⟩` with `X` uniform on the continuous
/// or discrete cube, sorted.
pub fn sample_projection(theta: &Direction, model: ModelKind, count: usize, rng: &RngSpec) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let coords = theta.coords();
    let chunks = par_chunks(rng, count, |rng, len| {
        (0..len)
            .map(|_| match model {
                ModelKind::Continuous => coords
                    .iter()
                    .map(|t| t * (2.0 * rng.random::<f64>() - 1.0))
                    .sum::<f64>(),
                ModelKind::Discrete => {
                    let mut acc = 0.0;
                    for block in coords.chunks(64) {
                        let bits: u64 = rng.random();
                        for (i, t) in block.iter().enumerate() {
                            if bits >> i & 1 == 1 {
                                acc += t;
                            } else {
                                acc -= t;
                            }
                        }
                    }
                    acc
                }
            })
            .collect::<Vec<f64>>()
    });
    SampleSet::new(chunks.concat(), rng.seed)
}
