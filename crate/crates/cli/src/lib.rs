//! Batch front-end for `renewal-percolation`: JSON configuration, CSV/JSONL
//! tables, the verify battery and phase-diagram sweeps.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::RunConfig;
pub use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Validation(_) | Self::Io(_) => 2,
            Self::Verification(_) => 3,
        }
    }
}

impl From<renewal_percolation::Error> for CliError {
    fn from(e: renewal_percolation::Error) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "renperc",
    version,
    about = "Renewal-driven interval percolation: exact brackets, bounds and Monte Carlo"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Horizon used by the command: N for exact/bounds/sweep, the site index
    /// for simulate/dual/verify, the step count for coupling.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    #[arg(long, global = true)]
    pub reps: Option<u64>,
    /// Output table; summaries go to `PATH.summary.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Add a wall-clock column to sweep rows.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Generating-function table, dual law and percolation bracket.
    Exact,
    /// Closed-form bounds next to the exact terms.
    Bounds,
    /// Monte Carlo estimate of P(0 <-> k) for k <= n.
    Simulate,
    /// Monte Carlo estimate of P(Y_k = 1) for k <= n.
    Dual,
    /// Shared-uniform coupling of delayed renewal chains.
    Coupling,
    /// Oracle, dynamic programs and simulators cross-checked.
    Verify,
    /// Bracket, bounds and verdict over a parameter grid.
    Sweep,
}

/// Loads the configuration, applies flag overrides and validates.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = cli.reps {
        cfg.reps = reps;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(h) = cli.horizon {
        match cli.command {
            Command::Exact | Command::Bounds | Command::Sweep => cfg.horizon = h,
            Command::Simulate | Command::Dual | Command::Verify => cfg.n = h,
            Command::Coupling => cfg.coupling_horizon = h,
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    let opts = commands::Options {
        format: cli.format,
        timing: cli.timing,
    };
    match cli.command {
        Command::Exact => commands::exact(&cfg, opts),
        Command::Bounds => commands::bounds(&cfg, opts),
        Command::Simulate => commands::simulate(&cfg, opts, false),
        Command::Dual => commands::simulate(&cfg, opts, true),
        Command::Coupling => commands::coupling(&cfg, opts),
        Command::Verify => commands::verify(&cfg, opts),
        Command::Sweep => commands::sweep(&cfg, opts),
    }
}
