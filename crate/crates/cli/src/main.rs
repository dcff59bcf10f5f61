//! `divland`: command-line workbench around the divergence-landing
//! simulator. Subcommands cover the whole pipeline: evolve controller
//! populations, replay single episodes, re-score archived fronts,
//! export steady-state maps, and sanity-check the flow estimator.

mod evolve;
mod flow_check;
mod map;
mod output;
mod simulate;
mod validate;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Failure classes with distinct exit codes: 2 for anything wrong with
/// the request, 3 for a file operation that failed after the work ran.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<divland_core::Error> for CliError {
    fn from(e: divland_core::Error) -> Self {
        match e {
            divland_core::Error::Io(msg) => CliError::Io(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "divland", version, about = "Divergence-landing evolution workbench")]
struct Cli {
    /// Master seed; every random stream in a run derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory receiving the run's files.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a controller population and archive every generation.
    Evolve(evolve::EvolveArgs),
    /// Fly one landing episode and export its trajectory.
    Simulate(simulate::SimulateArgs),
    /// Re-score an archived final front on a fresh batch of conditions.
    Validate(validate::ValidateArgs),
    /// Export a policy's settled command over a divergence input grid.
    Map(map::MapArgs),
    /// Compare the divergence estimator against its analytic value.
    FlowCheck(flow_check::FlowCheckArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    }
    match &cli.command {
        Command::Evolve(args) => evolve::run(args, cli.seed, &cli.out),
        Command::Simulate(args) => simulate::run(args, cli.seed, &cli.out),
        Command::Validate(args) => validate::run(args, cli.seed, &cli.out),
        Command::Map(args) => map::run(args, cli.seed, &cli.out),
        Command::FlowCheck(args) => flow_check::run(args, cli.seed, &cli.out),
    }
}
