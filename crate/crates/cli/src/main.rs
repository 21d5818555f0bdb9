//! Command-line driver for the polar-overlap experiments. Every command writes
//! CSV headed by a provenance comment line.

mod commands;
mod config;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{ConfigArgs, ExperimentConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("equivalence failure: {0}")]
    Equivalence(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Equivalence(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<polar_overlap::Error> for CliError {
    fn from(e: polar_overlap::Error) -> Self {
        match e {
            polar_overlap::Error::Schedule(msg) => CliError::Equivalence(msg),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "polar-overlap",
    version,
    about = "Path-overlapped list SC decoding experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// FER/BER of SC and the overlapped list decoder, checked against the
    /// reference list decoder on every frame
    Fer(ConfigArgs),
    /// Latency overhead over a rate sweep, closed form checked by simulation
    Latency(ConfigArgs),
    /// Hardware-efficiency ratio over a rate sweep
    Efficiency(ConfigArgs),
    /// Cycle timetable of one frame
    Trace(ConfigArgs),
}

type Runner = fn(&ExperimentConfig) -> Result<String, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, args, body): (&str, &ConfigArgs, Runner) = match &cli.command {
        Command::Fer(a) => ("fer", a, commands::run_fer),
        Command::Latency(a) => ("latency", a, commands::run_latency),
        Command::Efficiency(a) => ("efficiency", a, commands::run_efficiency),
        Command::Trace(a) => ("trace", a, commands::run_trace),
    };
    let cfg = ExperimentConfig::resolve(args)?;
    if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    let text = format!("{}\n{}", cfg.provenance(name), body(&cfg)?);
    match &cfg.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
