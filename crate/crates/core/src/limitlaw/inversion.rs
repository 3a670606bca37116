//! Gil–Pelaez inversion of the characteristic function.
//!
//! `F(x) = 1/2 + (1/π) ∫₀^T sin(tx) φ(t)/t dt` and
//! `p(x) = (1/π) ∫₀^T cos(tx) φ(t) dt`, truncated where the Gaussian factor
//! drops below [`INVERSION_CUTOFF`]. The integrands are entire, so a
//! composite 16-point Gauss–Legendre rule with panels no wider than one
//! oscillation period is accurate to rounding.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::LimitLaw;
use crate::error::{Error, Result};
use crate::numeric::sinc;
use crate::quad::gauss_legendre;

/// The integral is truncated at `T` with `exp(-c T²)` below this value.
pub const INVERSION_CUTOFF: f64 = 1e-14;

const GL_POINTS: usize = 16;

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_POINTS))
}

/// Quadrature nodes on `[0, T]` with `φ` pre-evaluated, valid for
/// evaluation points `|x| ≤ x_max`.
#[derive(Debug, Clone)]
pub struct Inverter {
    nodes: Vec<f64>,
    // w_i φ(t_i) / π
    weighted: Vec<f64>,
    x_max: f64,
}

impl Inverter {
    pub fn new(law: &LimitLaw, x_max: f64) -> Result<Self> {
        let rate = law.gaussian_rate();
        if !(rate > 0.0) || law.alpha.norm_sq() >= 1.0 {
            return Err(Error::NoGaussianDamping {
                norm_sq: law.alpha.norm_sq(),
            });
        }
        let t_end = (-INVERSION_CUTOFF.ln() / rate).sqrt();
        let freq = x_max.abs() + law.alpha.l1() + 1.0;
        let width = (2.0 * PI / freq).min(1.0);
        let panels = (t_end / width).ceil() as usize;
        let width = t_end / panels as f64;
        let (gx, gw) = gl16();
        let mut nodes = Vec::with_capacity(panels * GL_POINTS);
        let mut weighted = Vec::with_capacity(panels * GL_POINTS);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (x, w) in gx.iter().zip(gw) {
                let t = mid + 0.5 * width * x;
                nodes.push(t);
                weighted.push(0.5 * width * w * law.char_fn(t) / PI);
            }
        }
        Ok(Self {
            nodes,
            weighted,
            x_max: x_max.abs(),
        })
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn cdf(&self, x: f64) -> f64 {
        debug_assert!(x.abs() <= self.x_max * (1.0 + 1e-12) + 1e-12);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weighted)
            .map(|(t, w)| w * x * sinc(t * x))
            .sum();
        (0.5 + s).clamp(0.0, 1.0)
    }

    /// Values in `(-1e-10, 0)` are clamped to zero; anything more negative
    /// is reported as a numerical failure.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weighted)
            .map(|(t, w)| w * (t * x).cos())
            .sum();
        if s < -1e-10 {
            return Err(Error::Numerical(format!(
                "inverted density is negative ({s}) at x = {x}"
            )));
        }
        Ok(s.max(0.0))
    }
}

/// Distribution function tabulated on a uniform grid and interpolated by
/// cubic Hermite splines that use the inverted density as slope.
#[derive(Debug, Clone)]
pub struct CdfTable {
    lo: f64,
    step: f64,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
}

impl CdfTable {
    pub fn new(law: &LimitLaw) -> Result<Self> {
        let sd = law.gaussian_sd();
        let half = law.alpha.l1() + 9.0 * sd;
        let step = (sd / 16.0).min(0.01);
        let points = (2.0 * half / step).ceil() as usize + 1;
        let step = 2.0 * half / (points - 1) as f64;
        let inv = Inverter::new(law, half)?;
        let mut cdf = Vec::with_capacity(points);
        let mut pdf = Vec::with_capacity(points);
        for i in 0..points {
            let x = -half + i as f64 * step;
            cdf.push(inv.cdf(x));
            pdf.push(inv.pdf(x)?);
        }
        Ok(Self {
            lo: -half,
            step,
            cdf,
            pdf,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.lo + self.step * (self.cdf.len() - 1) as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.lo) / self.step;
        if u <= 0.0 {
            return 0.0;
        }
        let last = self.cdf.len() - 1;
        if u >= last as f64 {
            return 1.0;
        }
        let i = (u.floor() as usize).min(last - 1);
        let s = u - i as f64;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let v = h00 * self.cdf[i]
            + h10 * self.step * self.pdf[i]
            + h01 * self.cdf[i + 1]
            + h11 * self.step * self.pdf[i + 1];
        v.clamp(0.0, 1.0)
    }
}
