//! Recovery of the spike sequence from a characteristic function.
//!
//! The smallest positive zero of `φ(·; α)` is `π/α₁` (continuous cube) or
//! `π/(2α₁)` (discrete cube). Dividing `φ` by the factor of `α₁` exposes
//! `α₂` the same way, and so on. Zeros of the divided factors are
//! removable singularities of the quotient; they are bridged by linear
//! interpolation across a small neighbourhood, which also resolves spikes
//! whose zeros coincide with those of a larger spike (rational ratios such
//! as `α = (0.6, 0.3)`).

use std::f64::consts::PI;
use std::io::BufRead;

use serde::Serialize;

use crate::domain::{make_alpha, AlphaSequence, ModelKind};
use crate::error::{Error, Result};
use crate::numeric::sinc;

/// Half-width of the neighbourhood of a divided zero where the quotient is
/// interpolated instead of evaluated.
const SINGULAR_HALF_WIDTH: f64 = 1e-6;
/// Bisection stops at this relative bracket width.
const BISECTION_REL_TOL: f64 = 1e-10;
/// A zero closer than this (relative) to a divided zero is checked for a pole.
const COLLISION_REL_TOL: f64 = 1e-6;
/// A local minimum of `|q|` this far below its grid neighbours is taken
/// as an even-order zero.
const TOUCH_REL_TOL: f64 = 1e-6;
/// Largest scan step.
const MAX_SCAN_STEP: f64 = 0.01;
/// Tolerance of the pure-Gaussian residual test.
const GAUSSIAN_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Termination {
    /// No zero below `π/min_spike`: the remainder has no spike of size at
    /// least `min_spike`.
    NoZeroFound,
    /// `max_spikes` spikes were recovered.
    MaxSpikes,
    /// A sign change of the quotient sits on a pole of a divided factor,
    /// so the input is not consistent with the spikes found so far.
    ZeroCollision { t: f64 },
    /// The function underflowed to zero before the scan range was covered.
    Underflow { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recovery {
    pub alpha: AlphaSequence,
    /// Zero locations, one per recovered spike.
    pub zeros: Vec<f64>,
    pub termination: Termination,
    /// Fitted `c` when the residual `φ / Π factors` equals `exp(-c t²)` to
    /// within `1e-8` in log scale on the test grid.
    pub gaussian_residual: Option<f64>,
}

struct Quotient<'a, F> {
    phi: &'a F,
    model: ModelKind,
    spikes: Vec<f64>,
}

impl<F: Fn(f64) -> f64> Quotient<'_, F> {
    fn factor(&self, a: f64, t: f64) -> f64 {
        match self.model {
            ModelKind::Continuous => sinc(a * t),
            ModelKind::Discrete => (a * t).cos(),
        }
    }

    fn direct(&self, t: f64) -> f64 {
        let den: f64 = self.spikes.iter().map(|&a| self.factor(a, t)).product();
        (self.phi)(t) / den
    }

    /// Nearest zero of a divided factor to `t`.
    fn nearest_divided_zero(&self, t: f64) -> Option<f64> {
        self.spikes
            .iter()
            .map(|&a| {
                let period = PI / a;
                match self.model {
                    ModelKind::Continuous => (t / period).round().max(1.0) * period,
                    ModelKind::Discrete => ((t / period - 0.5).round().max(0.0) + 0.5) * period,
                }
            })
            .min_by(|x, y| (x - t).abs().total_cmp(&(y - t).abs()))
    }

    fn eval(&self, t: f64) -> f64 {
        if let Some(z) = self.nearest_divided_zero(t) {
            let h = SINGULAR_HALF_WIDTH * z.max(1.0);
            if (t - z).abs() < h {
                let (l, r) = (self.direct(z - 2.0 * h), self.direct(z + 2.0 * h));
                let s = (t - (z - 2.0 * h)) / (4.0 * h);
                return l + s * (r - l);
            }
        }
        self.direct(t)
    }
}

fn first_zero(model: ModelKind, a: f64) -> f64 {
    match model {
        ModelKind::Continuous => PI / a,
        ModelKind::Discrete => PI / (2.0 * a),
    }
}

fn spike_from_zero(model: ModelKind, t: f64) -> f64 {
    match model {
        ModelKind::Continuous => PI / t,
        ModelKind::Discrete => PI / (2.0 * t),
    }
}

enum Scan {
    Zero(f64),
    None,
    Underflow(f64),
}

/// Recovers the spikes of `ν(α)` from its characteristic function.
///
/// Each round scans the current quotient on a grid with step
/// `min(0.01, π/(4 a))`, `a` being the last recovered spike, brackets the
/// first sign change (or touching zero, found as a vanishing local minimum
/// of the modulus), refines it by bisection to relative width `1e-10`,
/// converts the zero to a spike and divides it out. The scan stops at the
/// zero of a spike of size `min_spike`; smaller spikes are left in the
/// Gaussian remainder.
pub fn recover_alpha<F: Fn(f64) -> f64>(
    phi: F,
    model: ModelKind,
    max_spikes: usize,
    min_spike: f64,
) -> Result<Recovery> {
    if !(min_spike > 0.0 && min_spike <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "min_spike must lie in (0, 1], got {min_spike}"
        )));
    }
    let mut q = Quotient {
        phi: &phi,
        model,
        spikes: Vec::new(),
    };
    let mut zeros = Vec::new();
    let t_max = first_zero(model, min_spike) * (1.0 + 1e-9);

    let termination = loop {
        if q.spikes.len() >= max_spikes {
            break Termination::MaxSpikes;
        }
        let (start, cap) = match q.spikes.last() {
            None => (0.0, 1.0),
            Some(&a) => (first_zero(model, a) * (1.0 - 1e-4), a),
        };
        let step = (PI / (4.0 * cap)).min(MAX_SCAN_STEP);
        let t_star = match scan(&q, start, t_max, step)? {
            Scan::Zero(t) => t,
            Scan::None => break Termination::NoZeroFound,
            Scan::Underflow(t) => break Termination::Underflow { t },
        };
        if let Some(z) = q.nearest_divided_zero(t_star) {
            if (t_star - z).abs() <= COLLISION_REL_TOL * z && is_pole(&q, t_star) {
                break Termination::ZeroCollision { t: t_star };
            }
        }
        let a = spike_from_zero(model, t_star);
        if a < min_spike * (1.0 - 1e-9) {
            break Termination::NoZeroFound;
        }
        q.spikes.push(a.min(1.0));
        zeros.push(t_star);
    };

    let gaussian_residual = gaussian_fit(&q, t_max);
    let alpha = make_alpha(&q.spikes)?;
    Ok(Recovery {
        alpha,
        zeros,
        termination,
        gaussian_residual,
    })
}

fn scan<F: Fn(f64) -> f64>(q: &Quotient<'_, F>, start: f64, t_max: f64, step: f64) -> Result<Scan> {
    let mut a = start;
    let mut fa = if start == 0.0 { 1.0 } else { q.eval(start) };
    // previous grid point, for touching zeros (repeated spikes)
    let mut prev: Option<(f64, f64)> = None;
    let mut i = 1u64;
    while a < t_max {
        let b = (start + i as f64 * step).min(t_max);
        i += 1;
        let fb = q.eval(b);
        if !fb.is_finite() {
            return Err(Error::Numerical(format!(
                "characteristic function not finite at t = {b}"
            )));
        }
        if fb == 0.0 {
            let next = q.eval(b + step);
            if next == 0.0 && (q.phi)(b) == 0.0 {
                return Ok(Scan::Underflow(b));
            }
            return Ok(Scan::Zero(b));
        }
        if fa.signum() != fb.signum() {
            return Ok(Scan::Zero(bisect(q, a, b, fa)));
        }
        if let Some((p, fp)) = prev {
            if fa.abs() < fp.abs() && fa.abs() <= fb.abs() {
                if let Some(t) = resolve_dip(q, p, b, TOUCH_REL_TOL * fp.abs().min(fb.abs()), 0) {
                    return Ok(Scan::Zero(t));
                }
            }
        }
        prev = Some((a, fa));
        a = b;
        fa = fb;
    }
    Ok(Scan::None)
}

fn bisect<F: Fn(f64) -> f64>(q: &Quotient<'_, F>, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..200 {
        if b - a <= BISECTION_REL_TOL * b {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = q.eval(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Subdivisions per refinement level of a dip of `|q|`.
const DIP_SUBDIVISIONS: usize = 64;
/// Refinement levels before a dip is treated as a touching zero.
const DIP_DEPTH: usize = 3;

/// Looks inside a dip of `|q|` on `[a, b]` with no sign change at the
/// ends: either two zeros closer than the grid step (returns the first) or
/// a touching zero (accepted when `|q|` falls below `floor`).
fn resolve_dip<F: Fn(f64) -> f64>(q: &Quotient<'_, F>, a: f64, b: f64, floor: f64, depth: usize) -> Option<f64> {
    let h = (b - a) / DIP_SUBDIVISIONS as f64;
    let pts: Vec<(f64, f64)> = (0..=DIP_SUBDIVISIONS)
        .map(|i| a + i as f64 * h)
        .map(|t| (t, q.eval(t)))
        .collect();
    for w in pts.windows(2) {
        if w[1].1 == 0.0 {
            return Some(w[1].0);
        }
        if w[0].1.signum() != w[1].1.signum() {
            return Some(bisect(q, w[0].0, w[1].0, w[0].1));
        }
    }
    let i = (1..DIP_SUBDIVISIONS).min_by(|&i, &j| pts[i].1.abs().total_cmp(&pts[j].1.abs()))?;
    let (lo, hi) = (pts[i - 1].0, pts[i + 1].0);
    if depth + 1 < DIP_DEPTH && hi - lo > BISECTION_REL_TOL * hi {
        return resolve_dip(q, lo, hi, floor, depth + 1);
    }
    let (t, ft) = minimize_abs(q, lo, hi);
    (ft.abs() <= floor).then_some(t)
}

/// Golden-section search for the minimum of `|q|` on `[a, b]`.
fn minimize_abs<F: Fn(f64) -> f64>(q: &Quotient<'_, F>, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (q.eval(c).abs(), q.eval(d).abs());
    for _ in 0..200 {
        if b - a <= BISECTION_REL_TOL * b {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = q.eval(c).abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = q.eval(d).abs();
        }
    }
    let t = 0.5 * (a + b);
    (t, q.eval(t))
}

/// A sign change at `t` is a pole when the quotient grows towards `t`.
fn is_pole<F: Fn(f64) -> f64>(q: &Quotient<'_, F>, t: f64) -> bool {
    let near = q.direct(t * (1.0 - 1e-5)).abs().max(q.direct(t * (1.0 + 1e-5)).abs());
    let far = q.direct(t * (1.0 - 1e-3)).abs().max(q.direct(t * (1.0 + 1e-3)).abs());
    near > far
}

fn gaussian_fit<F: Fn(f64) -> f64>(q: &Quotient<'_, F>, t_max: f64) -> Option<f64> {
    let grid: Vec<(f64, f64)> = (1..=40)
        .map(|i| i as f64 * t_max.min(10.0) / 40.0)
        .map(|t| (t, q.eval(t)))
        .filter(|&(_, r)| r > 1e-250)
        .map(|(t, r)| (t, r.ln()))
        .collect();
    if grid.len() < 3 {
        return None;
    }
    let num: f64 = grid.iter().map(|(t, lr)| -lr * t * t).sum();
    let den: f64 = grid.iter().map(|(t, _)| t.powi(4)).sum();
    let c = num / den;
    grid.iter()
        .all(|(t, lr)| (lr + c * t * t).abs() < GAUSSIAN_RESIDUAL_TOL)
        .then_some(c)
}

/// A real function tabulated on a strictly increasing grid, evaluated by
/// linear interpolation. Outside the grid the value is NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFn {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl TabulatedFn {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() != v.len() || t.len() < 2 {
            return Err(Error::Parse("need at least two (t, value) rows".into()));
        }
        if t.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Parse("t grid must be strictly increasing".into()));
        }
        if t.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::Parse("table contains non-finite values".into()));
        }
        Ok(Self { t, v })
    }

    /// Reads `t,value` rows; lines starting with `#` and a non-numeric
    /// header row are skipped.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self> {
        let (mut t, mut v) = (Vec::new(), Vec::new());
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    t.push(x);
                    v.push(y);
                }
                _ if t.is_empty() => continue,
                _ => return Err(Error::Parse(format!("line {}: not numeric", lineno + 1))),
            }
        }
        Self::new(t, v)
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.t_range();
        if !(lo..=hi).contains(&x) {
            return f64::NAN;
        }
        let i = self.t.partition_point(|&t| t <= x).clamp(1, self.t.len() - 1);
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let s = (x - t0) / (t1 - t0);
        self.v[i - 1] + s * (self.v[i] - self.v[i - 1])
    }
}
