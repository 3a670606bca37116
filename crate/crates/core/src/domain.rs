//! Shared domain types: spike sequences, windows, directions and sample
//! batches.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::sum_squares;

/// Absolute tolerance for unit-norm checks on directions.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Slack allowed above 1 for the squared norm of a spike sequence.
pub const NORM_SLACK: f64 = 1e-12;

/// A finitely supported, non-increasing, non-negative sequence with
/// squared 2-norm at most one. Trailing zeros are never stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "AlphaRepr", into = "AlphaRepr")]
pub struct AlphaSequence {
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AlphaRepr {
    alpha: Vec<f64>,
}

impl TryFrom<AlphaRepr> for AlphaSequence {
    type Error = Error;
    fn try_from(r: AlphaRepr) -> Result<Self> {
        make_alpha(&r.alpha)
    }
}

impl From<AlphaSequence> for AlphaRepr {
    fn from(a: AlphaSequence) -> Self {
        AlphaRepr { alpha: a.entries }
    }
}

/// Canonicalises raw coordinates into a spike sequence: absolute values,
/// sorted non-increasingly, trailing zeros trimmed.
pub fn make_alpha(raw: &[f64]) -> Result<AlphaSequence> {
    if let Some((index, &value)) = raw.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    let mut entries: Vec<f64> = raw.iter().map(|v| v.abs()).collect();
    entries.sort_by(|a, b| b.total_cmp(a));
    while entries.last() == Some(&0.0) {
        entries.pop();
    }
    let norm_sq = sum_squares(&entries);
    if norm_sq > 1.0 + NORM_SLACK {
        return Err(Error::NormTooLarge { norm_sq });
    }
    Ok(AlphaSequence { entries })
}

impl AlphaSequence {
    /// The zero sequence.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Coordinate `k` (0-based), zero beyond the stored support.
    pub fn get(&self, k: usize) -> f64 {
        self.entries.get(k).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `‖α‖₂²` by compensated summation.
    pub fn norm_sq(&self) -> f64 {
        sum_squares(&self.entries)
    }

    /// `1 - ‖α‖₂²`, clamped at zero.
    pub fn gaussian_weight(&self) -> f64 {
        (1.0 - self.norm_sq()).max(0.0)
    }

    /// Sum of the spikes; bounds the support of the spike part of the law.
    pub fn l1(&self) -> f64 {
        self.entries.iter().sum()
    }
}

impl fmt::Display for AlphaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Which cube is projected: `[-1,1]^n` or `{-1,+1}^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[serde(alias = "continuous-cube")]
    Continuous,
    #[serde(alias = "discrete-cube")]
    Discrete,
}

impl ModelKind {
    /// Variance of a single coordinate of the cube.
    pub fn atom_variance(self) -> f64 {
        match self {
            ModelKind::Continuous => 1.0 / 3.0,
            ModelKind::Discrete => 1.0,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Continuous => "continuous",
            ModelKind::Discrete => "discrete",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "continuous" | "continuous-cube" | "c" => Ok(ModelKind::Continuous),
            "discrete" | "discrete-cube" | "d" => Ok(ModelKind::Discrete),
            other => Err(Error::Parse(format!("unknown model '{other}'"))),
        }
    }
}

/// Open window `W_{r,l}(x)`: the order-statistic prefix of length
/// `l = center.len()` lies in the open Euclidean ball of radius `r` about
/// `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "WindowRepr")]
pub struct WindowSpec {
    center: Vec<f64>,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
struct WindowRepr {
    center: Vec<f64>,
    radius: f64,
}

impl TryFrom<WindowRepr> for WindowSpec {
    type Error = Error;
    fn try_from(r: WindowRepr) -> Result<Self> {
        WindowSpec::new(r.center, r.radius)
    }
}

impl From<WindowSpec> for WindowRepr {
    fn from(w: WindowSpec) -> Self {
        WindowRepr {
            center: w.center,
            radius: w.radius,
        }
    }
}

impl WindowSpec {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidWindow("prefix length must be positive".into()));
        }
        if let Some((index, &value)) = center.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidWindow(format!("radius must be positive, got {radius}")));
        }
        if center.iter().any(|&c| c < 0.0) {
            return Err(Error::InvalidWindow("center coordinates must be non-negative".into()));
        }
        if center.windows(2).any(|p| p[0] < p[1]) {
            return Err(Error::InvalidWindow("center must be non-increasing".into()));
        }
        let norm_sq = sum_squares(&center);
        if norm_sq > 1.0 + NORM_SLACK {
            return Err(Error::NormTooLarge { norm_sq });
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn prefix_len(&self) -> usize {
        self.center.len()
    }

    pub fn center_norm(&self) -> f64 {
        sum_squares(&self.center).sqrt()
    }

    /// Whether the prefix `z` (zero padded) lies in the open ball.
    pub fn contains_prefix(&self, z: &[f64]) -> bool {
        let d2: f64 = self
            .center
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let d = z.get(i).copied().unwrap_or(0.0) - c;
                d * d
            })
            .sum();
        d2 < self.radius * self.radius
    }
}

/// Membership of an order-statistic vector in the window. Coordinates
/// beyond the vector's length count as zero.
pub fn window_contains(w: &WindowSpec, eta: &OrderStatVector) -> bool {
    w.contains_prefix(eta.coords())
}

/// A point of the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    coords: Vec<f64>,
}

impl Direction {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument(
                "direction must have at least one coordinate".into(),
            ));
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        let norm = sum_squares(&coords).sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotUnitNorm { norm });
        }
        Ok(Self { coords })
    }

    /// Scales a non-zero vector to unit length.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let norm = sum_squares(&coords).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotUnitNorm { norm });
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Self::new(coords)
    }

    /// `(1/√n, …, 1/√n)`.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::normalized(vec![1.0; n])
    }

    /// Spikes `α` on the first coordinates, remaining mass spread equally
    /// over the other `n - len(α)` coordinates.
    pub fn spiked(alpha: &AlphaSequence, n: usize) -> Result<Self> {
        let k = alpha.len();
        if k > n {
            return Err(Error::InvalidArgument(format!(
                "{k} spikes do not fit in dimension {n}"
            )));
        }
        let rest = alpha.gaussian_weight();
        let mut coords = alpha.entries().to_vec();
        if k < n {
            let fill = (rest / (n - k) as f64).sqrt();
            coords.resize(n, fill);
        } else if rest > UNIT_NORM_TOL {
            return Err(Error::InvalidArgument(
                "spikes fill every coordinate but do not have unit norm".into(),
            ));
        }
        Self::normalized(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Absolute values of a direction in non-increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatVector {
    coords: Vec<f64>,
}

impl OrderStatVector {
    pub fn from_direction(theta: &Direction) -> Self {
        let mut coords: Vec<f64> = theta.coords().iter().map(|c| c.abs()).collect();
        // stable sort: ties keep their original order
        coords.sort_by(|a, b| b.total_cmp(a));
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Coordinate `k` (0-based), zero beyond the dimension.
    pub fn get(&self, k: usize) -> f64 {
        self.coords.get(k).copied().unwrap_or(0.0)
    }

    pub fn to_alpha(&self) -> AlphaSequence {
        // already canonical up to rounding of the norm
        make_alpha(&self.coords).unwrap_or_else(|_| {
            let norm = sum_squares(&self.coords).sqrt();
            let scaled: Vec<f64> = self.coords.iter().map(|c| c / norm).collect();
            make_alpha(&scaled).expect("rescaled order statistics are valid")
        })
    }
}

/// A sorted batch of draws together with the seed that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    seed: u64,
}

impl SampleSet {
    /// Sorts `values`; NaN entries are rejected.
    pub fn new(mut values: Vec<f64>, seed: u64) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| v.is_nan()) {
            return Err(Error::NonFinite { index, value });
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values, seed })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.values.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
    }

    /// One value per line under a `value` header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "value")?;
        for v in &self.values {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }
}
