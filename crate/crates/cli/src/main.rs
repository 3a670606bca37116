//! `projldp`: experiments on random projections of the cube.

mod config;
mod error;
mod parse;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use projldp::ldp::Estimator;
use projldp::{ModelKind, WindowSpec};

use config::{Command, DensityKind, RecoverSource, RunConfig};
use error::{CliError, CliResult};
use parse::{DimList, FloatList, Grid, ThetaSpec};
use table::Format;

/// Environment variable capping the number of worker threads.
const THREADS_VAR: &str = "PROJLDP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "projldp",
    version,
    about = "Large deviations of random projections of the cube"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Output {
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Sample <X, θ> for X uniform on the cube.
    Project {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "continuous")]
        model: ModelKind,
        /// `uniform-random`, an explicit list `t1,t2,...`, or `spiked:a1,a2,...`.
        #[arg(long, default_value = "uniform-random")]
        theta: ThetaSpec,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Rate function -½ log(1 - ‖α‖²).
    Rate {
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        alpha: FloatList,
        #[command(flatten)]
        output: Output,
    },
    /// Characteristic function of ν(α) on a grid.
    Charfn {
        #[arg(long, default_value = "")]
        alpha: FloatList,
        #[arg(long, default_value = "continuous")]
        model: ModelKind,
        /// start:stop:step
        #[arg(long, default_value = "0:20:0.1", allow_hyphen_values = true)]
        t_grid: Grid,
        #[command(flatten)]
        output: Output,
    },
    /// Density or distribution function of ν(α) on a grid.
    Density {
        #[arg(long, default_value = "")]
        alpha: FloatList,
        #[arg(long, default_value = "continuous")]
        model: ModelKind,
        #[arg(long, default_value = "-3:3:0.01", allow_hyphen_values = true)]
        x_grid: Grid,
        #[arg(long, value_enum, default_value_t = DensityKind::Pdf)]
        kind: DensityKind,
        #[command(flatten)]
        output: Output,
    },
    /// Recover α from a characteristic function.
    Recover {
        /// CSV file of `t,phi` rows.
        #[arg(long, conflicts_with = "roundtrip", required_unless_present = "roundtrip")]
        phi_table: Option<PathBuf>,
        /// Recover from the exact characteristic function of ν(α).
        #[arg(long)]
        roundtrip: Option<FloatList>,
        #[arg(long, default_value = "continuous")]
        model: ModelKind,
        #[arg(long, default_value_t = 16)]
        max_spikes: usize,
        #[arg(long, default_value_t = 0.05)]
        min_spike: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Empirical decay rates of a window probability.
    VerifyLdp {
        /// `x1,x2,...:r`
        #[arg(long, value_parser = parse::window)]
        window: WindowSpec,
        /// Comma-separated, strictly increasing dimensions.
        #[arg(long)]
        n: DimList,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// direct, conditional, or auto
        #[arg(long, default_value = "auto")]
        estimator: Estimator,
        /// Exit with code 4 when some dimension has zero hits.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Density of the first l sphere coordinates on a tensor grid.
    Marginal {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value = "-1:1:0.1", allow_hyphen_values = true)]
        grid: Grid,
        #[command(flatten)]
        output: Output,
    },
    /// Re-run the configuration embedded in an output file.
    Replay {
        /// A file previously written by this tool.
        config: PathBuf,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve(cmd: Cmd) -> CliResult<RunConfig> {
    let (command, output) = match cmd {
        Cmd::Project {
            n,
            model,
            theta,
            count,
            seed,
            output,
        } => (
            Command::Project {
                n,
                model,
                theta,
                count,
                seed,
            },
            output,
        ),
        Cmd::Rate { alpha, output } => (Command::Rate { alpha: alpha.0 }, output),
        Cmd::Charfn {
            alpha,
            model,
            t_grid,
            output,
        } => (
            Command::Charfn {
                alpha: alpha.0,
                model,
                t_grid,
            },
            output,
        ),
        Cmd::Density {
            alpha,
            model,
            x_grid,
            kind,
            output,
        } => (
            Command::Density {
                alpha: alpha.0,
                model,
                x_grid,
                kind,
            },
            output,
        ),
        Cmd::Recover {
            phi_table,
            roundtrip,
            model,
            max_spikes,
            min_spike,
            output,
        } => {
            let input = match (phi_table, roundtrip) {
                (Some(path), None) => RecoverSource::PhiTable { path },
                (None, Some(alpha)) => RecoverSource::Roundtrip { alpha: alpha.0 },
                _ => {
                    return Err(CliError::Config(
                        "give exactly one of --phi-table and --roundtrip".into(),
                    ))
                }
            };
            (
                Command::Recover {
                    input,
                    model,
                    max_spikes,
                    min_spike,
                },
                output,
            )
        }
        Cmd::VerifyLdp {
            window,
            n,
            count,
            seed,
            estimator,
            strict,
            output,
        } => (
            Command::VerifyLdp {
                window,
                n: n.0,
                count,
                seed,
                estimator,
                strict,
            },
            output,
        ),
        Cmd::Marginal { n, l, grid, output } => (Command::Marginal { n, l, grid }, output),
        Cmd::Replay { config, out } => {
            let mut cfg = RunConfig::from_output(&config)?;
            cfg.out = out;
            return Ok(cfg);
        }
    };
    Ok(RunConfig::new(command, output.format, output.out))
}

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads()
        .and_then(|_| resolve(cli.command))
        .and_then(|cfg| cfg.run());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("projldp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
