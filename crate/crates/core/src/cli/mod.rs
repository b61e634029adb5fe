//! Command-line front end.
//!
//! ```text
//! qgtlab analytic|drive|chern|circuit --config <path> --out <dir> [--seed <u64>] [--format csv,json,svg]
//! ```
//!
//! Exit codes: 0 success, 2 configuration or I/O error, 3 numerical
//! failure, 4 Z2 bound violated by `chern`. Files are written before a
//! Z2 violation is reported.

mod commands;
pub mod config;
pub mod output;
pub mod svg;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

pub use commands::{
    cmd_analytic, cmd_chern, cmd_circuit, cmd_drive, CommandOutput, ANALYTIC_N_THETA, DRIVEN_N_THETA,
    RELATIVE_ERROR_FLOOR,
};
pub use config::{Format, RunConfig};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_Z2: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qgtlab", version, about = "Quantum geometric tensor spectroscopy simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form metric and curvature over a grid.
    Analytic(RunArgs),
    /// Simulated weak-drive extraction.
    Drive(RunArgs),
    /// Chern numbers and the Z2 gate.
    Chern(RunArgs),
    /// Full-circuit calibration of the Bessel coupling law.
    Circuit(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; falls back to `output.directory`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `noise.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<String>>,
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConfigInvalid(_) | Error::UnknownParam(_) | Error::InvalidDrive(_) | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Runs one command, writes its files and returns the process exit code.
pub fn run(cli: &Cli) -> (i32, Option<String>) {
    match execute(cli) {
        Ok(out) => match out.z2_violation {
            Some((z2, bound)) => (EXIT_Z2, Some(format!("|C+ + C-| = {} exceeds the bound {bound}", z2.abs()))),
            None => (EXIT_OK, None),
        },
        Err(e) => (exit_code(&e), Some(e.to_string())),
    }
}

type CommandFn = fn(&RunConfig, &[Format]) -> crate::Result<CommandOutput>;

fn execute(cli: &Cli) -> crate::Result<CommandOutput> {
    let (args, cmd): (&RunArgs, CommandFn) = match &cli.command {
        Command::Analytic(a) => (a, cmd_analytic),
        Command::Drive(a) => (a, cmd_drive),
        Command::Chern(a) => (a, cmd_chern),
        Command::Circuit(a) => (a, cmd_circuit),
    };
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.noise.seed = seed;
    }
    let mut formats: Vec<Format> = match &args.format {
        Some(list) => list.iter().map(|s| Format::parse(s)).collect::<crate::Result<_>>()?,
        None => cfg.output.formats.clone().unwrap_or_else(|| Format::ALL.to_vec()),
    };
    formats.sort();
    formats.dedup();
    if formats.is_empty() {
        return Err(Error::ConfigInvalid("no output format selected".into()));
    }
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.directory.clone())
        .ok_or_else(|| Error::ConfigInvalid("no output directory: pass --out or set output.directory".into()))?;
    let out = cmd(&cfg, &formats)?;
    out.artifacts.write(&dir)?;
    Ok(out)
}
