//! `nlgs`: ground states, spectra, continuation and the identity suite.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 invalid input.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigFile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl From<nlgs_core::error::Error> for CliError {
    fn from(e: nlgs_core::error::Error) -> Self {
        if e.is_invalid_input() {
            CliError::Invalid(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numerical(format!("json: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "nlgs", version, about = "Nonlocal ground states, sharp constants and their identity suite")]
pub struct Cli {
    /// `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for all outputs.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Leave the timestamp out of JSON reports.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Petviashvili solve of `m(D)Q + μQ = Q^{α+1}`.
    Solve(SolveArgs),
    /// Run the identity suite and write a verification report.
    Verify(VerifyArgs),
    /// Continue the ground-state branch from `s = 1`.
    Continue(ContinueArgs),
    /// Spectrum and kernel certificate of a linearized operator.
    Spectrum(SpectrumArgs),
    /// Sweep `θ` and tabulate the Kato–Sobolev constants.
    Constants(ConstantsArgs),
}

#[derive(Debug, Args, Default)]
pub struct GridArgs {
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// `frac` or `ilw`.
    #[arg(long)]
    pub op: Option<commands::Op>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Defaults to 2/π for `ilw`, 1 for `frac`.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run only these groups (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<nlgs_core::verify::CheckGroup>,
    #[arg(long, value_delimiter = ',')]
    pub skip: Vec<nlgs_core::verify::CheckGroup>,
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    #[arg(long)]
    pub lmax: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Continuation steps; the refinement check doubles this.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Report path; defaults to `verify.json` in the output directory.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct ContinueArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub s_to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub max_halvings: Option<u32>,
    /// Constant predictor instead of the secant.
    #[arg(long)]
    pub no_secant: bool,
    /// Also run the full kernel certificate at every point.
    #[arg(long)]
    pub certify: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub op: Option<commands::Op>,
    /// `sech`, `soliton`, `lorentzian` or `solve`.
    #[arg(long)]
    pub profile: Option<commands::ProfileSource>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub zero_tol: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub theta_min: Option<f64>,
    #[arg(long)]
    pub theta_max: Option<f64>,
    /// Number of `θ` values, endpoints included.
    #[arg(long)]
    pub steps: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NLGS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("NLGS_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let file = ConfigFile::load(cli.config.as_deref())?;
    let ctx = commands::Context::new(&cli, &file)?;
    let ok = match &cli.command {
        Command::Solve(a) => commands::solve(&ctx, a)?,
        Command::Verify(a) => commands::verify(&ctx, a)?,
        Command::Continue(a) => commands::continue_branch(&ctx, a)?,
        Command::Spectrum(a) => commands::spectrum(&ctx, a)?,
        Command::Constants(a) => commands::constants(&ctx, a)?,
    };
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
