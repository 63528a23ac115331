//! `scatter1d`: run transfer-matrix scattering jobs described by a JSON
//! configuration file.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence,
//! 3 failed identity check (`verify --ci`).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{Command, Job, Overrides};
use config::{Format, GridConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("one or more identity checks failed")]
    VerifyFailed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::VerifyFailed => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "scatter1d",
    version,
    about = "One-dimensional transfer-matrix scattering"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scattering amplitudes over a real wavenumber grid.
    Sweep(Common),
    /// Zeros of M22 and M11 in a complex rectangle, classified.
    Spectra(Common),
    /// Threshold of a homogeneous gain slab.
    Laser(Common),
    /// P, T and PT classification on the grid.
    Symmetry(Common),
    /// Identity checks on the grid.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Exit with status 3 if any applicable check fails.
        #[arg(long)]
        ci: bool,
    },
    /// Plane-wave coefficients between the pieces of a model.
    Profile(Common),
    /// Reflectionless, transparent and invisible wavenumbers in the grid range.
    Invisibility(Common),
}

#[derive(Args)]
struct Common {
    /// JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance override: identity checks for verify, symmetry residual for
    /// symmetry, Newton residual for spectra and invisibility.
    #[arg(long)]
    tol: Option<f64>,
    /// Wavenumber grid as min,max,count,log|lin.
    #[arg(long)]
    grid: Option<GridConfig>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SCATTER1D_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("SCATTER1D_THREADS: not a count: {v:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("SCATTER1D_THREADS: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (command, common, ci) = match cli.command {
        Cmd::Sweep(c) => (Command::Sweep, c, false),
        Cmd::Spectra(c) => (Command::Spectra, c, false),
        Cmd::Laser(c) => (Command::Laser, c, false),
        Cmd::Symmetry(c) => (Command::Symmetry, c, false),
        Cmd::Verify { common, ci } => (Command::Verify, common, ci),
        Cmd::Profile(c) => (Command::Profile, c, false),
        Cmd::Invisibility(c) => (Command::Invisibility, c, false),
    };
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", common.config.display())))?;
    let cfg = config::parse(&text)?;
    let flags = Overrides {
        out: common.out,
        tol: common.tol,
        grid: common.grid,
        format: common.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
        ci,
    };
    Job::new(command, cfg, flags)?.run()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scatter1d: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
