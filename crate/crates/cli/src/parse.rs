//! Parsers for the compact argument syntaxes: number lists, grids,
//! windows and direction specs.

use std::fmt;
use std::str::FromStr;

use projldp::WindowSpec;
use serde::{Deserialize, Serialize};

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

/// Comma-separated numbers; the empty string is the empty list.
pub fn float_list(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(number).collect()
}

pub fn usize_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("'{p}' is not a dimension"))
        })
        .collect()
}

/// Comma-separated numbers as a single argument.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        float_list(s).map(FloatList)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimList(pub Vec<usize>);

impl FromStr for DimList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        usize_list(s).map(DimList)
    }
}

/// `start:stop:step`, inclusive of `stop` within half a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// Upper bound on grid sizes, to catch typos like a missing decimal point.
const MAX_GRID_POINTS: usize = 10_000_000;

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        // every start + i·step strictly below stop + step/2
        let m = ((self.stop - self.start) / self.step - 0.5).ceil().max(0.0) as usize;
        (0..=m).map(|i| self.start + i as f64 * self.step).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.points().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("grid '{s}' must have the form start:stop:step"));
        };
        let g = Grid {
            start: number(a)?,
            stop: number(b)?,
            step: number(c)?,
        };
        if g.step <= 0.0 {
            return Err(format!("grid step must be positive in '{s}'"));
        }
        if g.stop < g.start {
            return Err(format!("grid stop lies below start in '{s}'"));
        }
        if (g.stop - g.start) / g.step > MAX_GRID_POINTS as f64 {
            return Err(format!("grid '{s}' has more than {MAX_GRID_POINTS} points"));
        }
        Ok(g)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

/// `x1,x2,...:r`.
pub fn window(s: &str) -> Result<WindowSpec, String> {
    let (center, radius) = s
        .split_once(':')
        .ok_or_else(|| format!("window '{s}' must have the form x1,x2,...:r"))?;
    let center = float_list(center)?;
    WindowSpec::new(center, number(radius)?).map_err(|e| e.to_string())
}

/// Direction of a `project` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThetaSpec {
    UniformRandom,
    Explicit {
        coords: Vec<f64>,
    },
    /// Spikes followed by equal coordinates carrying the remaining mass.
    Spiked {
        alpha: Vec<f64>,
    },
}

impl FromStr for ThetaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "uniform-random" {
            Ok(ThetaSpec::UniformRandom)
        } else if let Some(rest) = s.strip_prefix("spiked:") {
            Ok(ThetaSpec::Spiked {
                alpha: float_list(rest)?,
            })
        } else {
            let coords = float_list(s)?;
            if coords.is_empty() {
                return Err("explicit direction is empty".into());
            }
            Ok(ThetaSpec::Explicit { coords })
        }
    }
}
