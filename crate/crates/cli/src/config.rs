//! Resolved run configurations and their execution.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use projldp::ldp::{empirical_rate_curve, EstimateStatus, Estimator};
use projldp::limitlaw::{CdfTable, Inverter, TabulatedFn};
use projldp::{
    ks_distance, make_alpha, marginal_density, rate_function, recover_alpha, sample_projection, sample_sphere,
    Direction, LimitLaw, ModelKind, RngSpec, WindowSpec,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::parse::{Grid, ThetaSpec};
use crate::table::{Cell, Format, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Pdf,
    Cdf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum RecoverSource {
    /// Tabulated `t,phi` CSV file.
    PhiTable { path: PathBuf },
    /// Characteristic function of `ν(alpha)` evaluated exactly.
    Roundtrip { alpha: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Project {
        n: usize,
        model: ModelKind,
        theta: ThetaSpec,
        count: usize,
        seed: u64,
    },
    Rate {
        alpha: Vec<f64>,
    },
    Charfn {
        alpha: Vec<f64>,
        model: ModelKind,
        t_grid: Grid,
    },
    Density {
        alpha: Vec<f64>,
        model: ModelKind,
        x_grid: Grid,
        kind: DensityKind,
    },
    Recover {
        input: RecoverSource,
        model: ModelKind,
        max_spikes: usize,
        min_spike: f64,
    },
    VerifyLdp {
        window: WindowSpec,
        n: Vec<usize>,
        count: usize,
        seed: u64,
        estimator: Estimator,
        strict: bool,
    },
    Marginal {
        n: usize,
        l: usize,
        grid: Grid,
    },
}

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub command: Command,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command, format: Format, out: Option<PathBuf>) -> Self {
        Self {
            tool: "projldp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            format,
            out,
        }
    }

    /// Reads the config from the first line of an output file.
    pub fn from_output(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        let first = text.lines().next().unwrap_or_default();
        let body = match first.strip_prefix('#') {
            Some(json) => json.trim().to_string(),
            None => {
                // JSON output: the config sits under "config"
                let doc: serde_json::Value =
                    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                doc.get("config")
                    .ok_or_else(|| CliError::Config(format!("{}: no embedded config", path.display())))?
                    .to_string()
            }
        };
        serde_json::from_str(&body)
            .map_err(|e| CliError::Config(format!("{}: bad embedded config: {e}", path.display())))
    }

    pub fn run(&self) -> CliResult<()> {
        let table = self.command.execute(self.out.as_deref())?;
        match &self.out {
            Some(path) => {
                let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                table.write(self, self.format, std::io::BufWriter::new(file))?;
            }
            None => table.write(self, self.format, std::io::stdout().lock())?,
        }
        if let (Command::VerifyLdp { strict: true, .. }, Some(notes)) = (&self.command, &table.notes) {
            if notes["zero_hits"].as_bool() == Some(true) {
                return Err(CliError::Numerical("a window estimate had zero hits".into()));
            }
        }
        Ok(())
    }
}

fn alpha_of(raw: &[f64]) -> CliResult<projldp::AlphaSequence> {
    Ok(make_alpha(raw)?)
}

impl Command {
    fn execute(&self, out: Option<&Path>) -> CliResult<Table> {
        match self {
            Command::Project {
                n,
                model,
                theta,
                count,
                seed,
            } => project(*n, *model, theta, *count, *seed, out),
            Command::Rate { alpha } => {
                let mut t = Table::new(vec!["rate"]);
                t.push(vec![rate_function(&alpha_of(alpha)?).into()]);
                Ok(t)
            }
            Command::Charfn { alpha, model, t_grid } => {
                let law = LimitLaw::new(alpha_of(alpha)?, *model);
                let mut t = Table::new(vec!["t", "phi"]);
                for x in t_grid.points() {
                    t.push(vec![x.into(), law.char_fn(x).into()]);
                }
                Ok(t)
            }
            Command::Density {
                alpha,
                model,
                x_grid,
                kind,
            } => {
                let law = LimitLaw::new(alpha_of(alpha)?, *model);
                let inv = Inverter::new(&law, x_grid.max_abs())?;
                let mut t = Table::new(vec![
                    "x",
                    match kind {
                        DensityKind::Pdf => "pdf",
                        DensityKind::Cdf => "cdf",
                    },
                ]);
                for x in x_grid.points() {
                    let v = match kind {
                        DensityKind::Pdf => inv.pdf(x)?,
                        DensityKind::Cdf => inv.cdf(x),
                    };
                    t.push(vec![x.into(), v.into()]);
                }
                Ok(t)
            }
            Command::Recover {
                input,
                model,
                max_spikes,
                min_spike,
            } => recover(input, *model, *max_spikes, *min_spike),
            Command::VerifyLdp {
                window,
                n,
                count,
                seed,
                estimator,
                ..
            } => verify_ldp(window, n, *count, *seed, *estimator),
            Command::Marginal { n, l, grid } => marginal(*n, *l, grid),
        }
    }
}

fn gaussian_cdf(model: ModelKind) -> impl Fn(f64) -> f64 {
    let sd = model.atom_variance().sqrt();
    move |x| projldp::numeric::std_normal_cdf(x / sd)
}

/// Closed-form law of `⟨X, e₁⟩`.
fn coordinate_cdf(model: ModelKind) -> impl Fn(f64) -> f64 {
    move |x| match model {
        ModelKind::Continuous => ((x + 1.0) / 2.0).clamp(0.0, 1.0),
        ModelKind::Discrete => {
            if x < -1.0 {
                0.0
            } else if x < 1.0 {
                0.5
            } else {
                1.0
            }
        }
    }
}

fn project(
    n: usize,
    model: ModelKind,
    theta: &ThetaSpec,
    count: usize,
    seed: u64,
    out: Option<&Path>,
) -> CliResult<Table> {
    let rng = RngSpec::new(seed, 0);
    let direction = match theta {
        ThetaSpec::UniformRandom => sample_sphere(n, &rng.split(0))?,
        ThetaSpec::Explicit { coords } => {
            if coords.len() != n {
                return Err(CliError::Config(format!(
                    "explicit direction has {} coordinates, n = {n}",
                    coords.len()
                )));
            }
            Direction::new(coords.clone())?
        }
        ThetaSpec::Spiked { alpha } => Direction::spiked(&alpha_of(alpha)?, n)?,
    };
    let samples = sample_projection(&direction, model, count, &rng.split(1))?;
    let ks_limit = match theta {
        ThetaSpec::Spiked { alpha } => {
            let table = CdfTable::new(&LimitLaw::new(alpha_of(alpha)?, model))?;
            Some(ks_distance(&samples, |x| table.eval(x)))
        }
        ThetaSpec::Explicit { coords } if coords.iter().filter(|c| **c != 0.0).count() == 1 => {
            Some(ks_distance(&samples, coordinate_cdf(model)))
        }
        _ => None,
    };
    let summary = json!({
        "count": samples.count(),
        "mean": samples.mean(),
        "variance": samples.variance(),
        "ks_gaussian": ks_distance(&samples, gaussian_cdf(model)),
        "gaussian_variance": model.atom_variance(),
        "ks_limit": ks_limit,
        "max_abs_theta": direction.max_abs(),
    });
    if let Some(path) = out {
        let path = summary_path(path);
        let mut f = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::to_writer_pretty(&mut f, &summary).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(f)?;
    } else {
        eprintln!("{summary}");
    }
    let mut t = Table::new(vec!["value"]);
    t.rows = samples.values().iter().map(|v| vec![Cell::Num(*v)]).collect();
    t.notes = Some(summary);
    Ok(t)
}

/// `out.csv` → `out.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

fn recover(input: &RecoverSource, model: ModelKind, max_spikes: usize, min_spike: f64) -> CliResult<Table> {
    let (recovery, truth, min_used) = match input {
        RecoverSource::Roundtrip { alpha } => {
            let alpha = alpha_of(alpha)?;
            let law = LimitLaw::new(alpha.clone(), model);
            (
                recover_alpha(|t| law.char_fn(t), model, max_spikes, min_spike)?,
                Some(alpha),
                min_spike,
            )
        }
        RecoverSource::PhiTable { path } => {
            let f = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let table = TabulatedFn::from_csv(BufReader::new(f))?;
            let (lo, hi) = table.t_range();
            if lo > 0.0 {
                return Err(CliError::Config("phi table must start at t <= 0".into()));
            }
            // the scan cannot look past the end of the table
            let reach = match model {
                ModelKind::Continuous => PI / hi,
                ModelKind::Discrete => PI / (2.0 * hi),
            };
            let min_used = min_spike.max(reach * (1.0 + 1e-9));
            if min_used > 1.0 {
                return Err(CliError::Config(format!(
                    "phi table ends at t = {hi}, too short to detect any spike"
                )));
            }
            (
                recover_alpha(|t| table.eval(t), model, max_spikes, min_used)?,
                None,
                min_used,
            )
        }
    };
    let mut t = Table::new(vec!["k", "alpha", "zero", "true_alpha", "abs_error"]);
    let k_max = recovery.alpha.len().max(truth.as_ref().map_or(0, |a| a.len()));
    let mut max_err = 0.0f64;
    for k in 0..k_max {
        let found = recovery.alpha.entries().get(k).copied();
        let zero = recovery.zeros.get(k).copied();
        let mut row = vec![
            Cell::Int(k as u64 + 1),
            found.map_or(Cell::Text(String::new()), Cell::Num),
            zero.map_or(Cell::Text(String::new()), Cell::Num),
        ];
        match &truth {
            Some(a) => {
                let exact = a.get(k);
                let err = (found.unwrap_or(0.0) - exact).abs();
                max_err = max_err.max(err);
                row.push(Cell::Num(exact));
                row.push(Cell::Num(err));
            }
            None => row.extend([Cell::Text(String::new()), Cell::Text(String::new())]),
        }
        t.push(row);
    }
    t.notes = Some(json!({
        "termination": recovery.termination,
        "gaussian_residual": recovery.gaussian_residual,
        "min_spike_used": min_used,
        "max_abs_error": truth.as_ref().map(|_| max_err),
    }));
    Ok(t)
}

fn verify_ldp(window: &WindowSpec, n: &[usize], count: usize, seed: u64, estimator: Estimator) -> CliResult<Table> {
    let estimates = empirical_rate_curve(n, window, count, &RngSpec::new(seed, 0), estimator)?;
    let mut t = Table::new(vec![
        "n",
        "p_hat",
        "ci_low",
        "ci_high",
        "rate_hat",
        "lower_bound",
        "upper_bound",
        "samples",
        "seed",
    ]);
    for e in &estimates {
        t.push(vec![
            e.n.into(),
            e.p_hat.into(),
            e.ci_low.into(),
            e.ci_high.into(),
            e.rate_hat.into(),
            e.lower_rate_bound.into(),
            e.upper_rate_bound.into(),
            e.sample_count.into(),
            e.seed.into(),
        ]);
    }
    let zero_hits = estimates.iter().any(|e| e.status == EstimateStatus::ZeroHits);
    t.notes = Some(json!({
        "estimators": estimates.iter().map(|e| e.estimator).collect::<Vec<_>>(),
        "hits": estimates.iter().map(|e| e.hits).collect::<Vec<_>>(),
        "rate_std_err": estimates.iter().map(|e| crate::table::fmt_f64(e.rate_std_err)).collect::<Vec<_>>(),
        "zero_hits": zero_hits,
    }));
    Ok(t)
}

fn marginal(n: usize, l: usize, grid: &Grid) -> CliResult<Table> {
    const NAMES: [&str; 8] = ["s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8"];
    if l == 0 || l > NAMES.len() {
        return Err(CliError::Config(format!("l must lie in 1..={}", NAMES.len())));
    }
    let axis = grid.points();
    let total = axis.len().checked_pow(l as u32).filter(|&m| m <= 10_000_000);
    let Some(total) = total else {
        return Err(CliError::Config("tensor grid exceeds 10^7 points".into()));
    };
    let mut columns = NAMES[..l].to_vec();
    columns.push("density");
    let mut t = Table::new(columns);
    let mut s = vec![0.0; l];
    for idx in 0..total {
        let mut rem = idx;
        for j in (0..l).rev() {
            s[j] = axis[rem % axis.len()];
            rem /= axis.len();
        }
        let d = match marginal_density(n, l, &s) {
            Ok(v) => v,
            Err(projldp::Error::OutsideDomain { .. }) => 0.0,
            Err(projldp::Error::BoundarySingularity) => f64::INFINITY,
            Err(e) => return Err(e.into()),
        };
        let mut row: Vec<Cell> = s.iter().map(|&v| Cell::Num(v)).collect();
        row.push(Cell::Num(d));
        t.push(row);
    }
    Ok(t)
}
