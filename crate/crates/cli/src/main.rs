// SPDX-License-Identifier: Apache-2.0

//! `mixfbm`: convergence studies, noise self-tests and moment diagnostics for
//! the Euler scheme of mixed Brownian / fractional Brownian SDEs.
//!
//! Exit status: 0 when every check passes, 1 on a failed check or a run
//! error, 2 on a usage or configuration error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mixfbm::noise::SamplerKind;

use config::{Command, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "mixfbm", version, about = "Euler-scheme experiments for mixed fBm SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Option<CommandArg>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides `experiment.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory; overrides `experiment.output_dir`.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// fGn sampler; overrides `experiment.sampler`.
    #[arg(long, global = true)]
    sampler: Option<SamplerKind>,
    /// Accept H = 0.5, replacing the fractional noise by a second Brownian motion.
    #[arg(long, global = true)]
    degenerate_brownian: bool,
}

#[derive(Debug, Subcommand)]
enum CommandArg {
    /// Strong-error study on coupled grids with a log-log rate fit.
    Convergence,
    /// Dump one trajectory and its noise.
    Simulate,
    /// Empirical against analytic fGn autocovariance.
    NoiseTest,
    /// Exponential-moment, derivative-moment and grid-continuity checks.
    Diagnostics,
}

impl From<&CommandArg> for Command {
    fn from(c: &CommandArg) -> Self {
        match c {
            CommandArg::Convergence => Command::Convergence,
            CommandArg::Simulate => Command::Simulate,
            CommandArg::NoiseTest => Command::NoiseTest,
            CommandArg::Diagnostics => Command::Diagnostics,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or usage.
    Config(String),
    /// The experiment could not complete.
    Run(String),
}

impl From<mixfbm::Error> for CliError {
    fn from(e: mixfbm::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

fn resolve(cli: &Cli) -> Result<(Command, ExperimentConfig), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(dir) = &cli.output {
        cfg.experiment.output_dir = dir.clone();
    }
    if let Some(sampler) = cli.sampler {
        cfg.experiment.sampler = sampler;
    }
    let command = match (&cli.command, cfg.experiment.command) {
        (Some(c), _) => c.into(),
        (None, Some(c)) => c,
        (None, None) => {
            return Err(CliError::Config(
                "no command given on the command line or in experiment.command".into(),
            ))
        }
    };
    cfg.experiment.command = Some(command);
    Ok((command, cfg))
}

fn run(cli: &Cli) -> Result<Verdict, CliError> {
    let (command, cfg) = resolve(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {:?} workers: {e}", cli.workers)))?;
    pool.install(|| commands::run(command, &cfg, cli.degenerate_brownian))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
    }
}
