//! `fracbm`: path generation, fractional integration, Itô and pathwise
//! integration, path statistics and the acceptance harness.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing experiment,
//! 2 for usage, configuration and input errors.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{FbmIntegrateArgs, FracintArgs, ItoArgs, StatsArgs, Status, VerifyArgs};
use config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "fracbm", version, about = "Fractional Brownian motion toolkit")]
struct Cli {
    /// Flat key = value config file; command-line flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample paths and write them as CSV
    Generate,
    /// Fractional integral or derivative of a tabulated function
    Fracint(FracintArgs),
    /// Itô integral along a path, or isometry and endpoint checks over a
    /// Brownian ensemble
    Ito(ItoArgs),
    /// Pathwise integral against fBm; each run appends to results.jsonl
    FbmIntegrate(FbmIntegrateArgs),
    /// Path statistics of an imported series
    Stats(StatsArgs),
    /// Run acceptance experiments and write their records
    Verify(VerifyArgs),
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_file(&text)?;
    }
    cfg.apply_flags(&cli.overrides);
    commands::check_config(&cfg)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Status> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Generate => commands::generate(&cfg),
        Command::Fracint(a) => commands::fracint(&cfg, a),
        Command::Ito(a) => commands::ito(&cfg, a),
        Command::FbmIntegrate(a) => commands::fbm_integrate(&cfg, a),
        Command::Stats(a) => commands::stats(&cfg, a),
        Command::Verify(a) => commands::verify(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
