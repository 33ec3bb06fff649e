//! `kinetic`: runs kinetic-continuum scenarios, the particle oracle, the
//! closed-form flows and the temperance tools.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kinetic_continua::Exec;

mod analytic;
mod config;
mod out;
mod run;
mod temperance;

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3.
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "kinetic", version, about = "Kinetic continua: solver, particle oracle and analytics")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output directory; standard output when omitted (for single-table commands).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed, overriding the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a continuum scenario.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Snapshot interval in time units, overriding the config file.
        #[arg(long)]
        snapshot_every: Option<f64>,
    },
    /// Run the discrete mass-point oracle.
    Particles {
        #[arg(long)]
        config: PathBuf,
    },
    /// Closed-form stationary shear, dispersion relation and example flows.
    Analytic {
        #[command(subcommand)]
        command: analytic::AnalyticCommand,
    },
    /// Velocity-distribution moments and the canonical temperance.
    Temperance {
        #[command(subcommand)]
        command: temperance::TemperanceCommand,
    },
}

fn exec_for(threads: Option<usize>) -> Result<Exec, CliError> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(1) => Ok(Exec::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
            Ok(Exec::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Exec::Sequential),
        None => Ok(Exec::default()),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let exec = exec_for(cli.common.threads)?;
    let c = &cli.common;
    match cli.command {
        Command::Run {
            config,
            snapshot_every,
        } => run::cmd_run(&config, c, snapshot_every, exec),
        Command::Particles { config } => run::cmd_particles(&config, c),
        Command::Analytic { command } => analytic::cmd_analytic(command, c),
        Command::Temperance { command } => temperance::cmd_temperance(command, c, exec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kinetic: {e}");
            ExitCode::from(e.code())
        }
    }
}
