//! `divland evolve`: run the mutation-only multi-objective search and
//! archive every generation, with the front-quality series alongside.

use clap::Args;
use divland_core::archive::{ARCHIVE_FILE, GENOMES_FILE};
use divland_core::evolution::{evolve, EvoConfig};
use divland_core::genome::Arch;
use divland_core::pareto::nu_series;
use serde_json::json;
use std::path::{Path, PathBuf};

use crate::output::{fmt9, RunOutput};
use crate::CliError;

pub const NU_SERIES_FILE: &str = "nu_series.csv";

#[derive(Args)]
pub struct EvolveArgs {
    /// Run configuration file (flat TOML; see the repository README).
    #[arg(
        long,
        value_name = "FILE",
        required_unless_present = "desk",
        conflicts_with_all = ["desk", "arch"]
    )]
    config: Option<PathBuf>,
    /// Use the small built-in setup: 50 parents, 50 offspring, 50 generations.
    #[arg(long, requires = "arch")]
    desk: bool,
    /// Controller architecture for --desk: nn, rnn or ctrnn.
    #[arg(long, value_name = "ARCH")]
    arch: Option<Arch>,
}

pub fn run(args: &EvolveArgs, seed: u64, out: &Path) -> Result<(), CliError> {
    let config = load_config(args)?;
    config.validate()?;
    let mut run_out = RunOutput::create(out)?;
    let archive = evolve(config.clone(), seed)?;
    let (series, reference) = nu_series(&archive, None)?;
    let front = archive.final_front()?;

    run_out.write(ARCHIVE_FILE, archive.to_jsonl()?.as_bytes())?;
    run_out.write(GENOMES_FILE, archive.genomes_json()?.as_bytes())?;
    run_out.write(NU_SERIES_FILE, nu_csv(&series).as_bytes())?;
    run_out.finish(
        "evolve",
        seed,
        json!({ "evolution": config, "nu_reference": reference }),
    )?;

    println!(
        "evolved {} over {} generations: front holds {} of {}, nu {} -> {}",
        config.arch.name(),
        config.generations,
        front.len(),
        config.mu,
        fmt9(series[0]),
        fmt9(*series.last().expect("series covers every archived generation")),
    );
    Ok(())
}

fn load_config(args: &EvolveArgs) -> Result<EvoConfig, CliError> {
    if args.desk {
        let arch = args.arch.expect("clap ties --desk to --arch");
        return Ok(EvoConfig::desk(arch));
    }
    let path = args.config.as_ref().expect("clap demands --config without --desk");
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn nu_csv(series: &[f64]) -> String {
    let mut out = String::from("gen,nu\n");
    for (g, nu) in series.iter().enumerate() {
        out.push_str(&format!("{g},{}\n", fmt9(*nu)));
    }
    out
}
