//! `divland validate`: re-score an archived run's final front on one
//! shared batch of randomly drawn conditions.

use clap::Args;
use divland_core::archive::{RunArchive, ARCHIVE_FILE, GENOMES_FILE};
use divland_core::genome::Genome;
use divland_core::validation::{validate, ValidationReport, DEFAULT_DRAWS};
use serde_json::json;
use std::path::{Path, PathBuf};

use crate::output::{fmt9, RunOutput};
use crate::CliError;

pub const SUMMARY_FILE: &str = "validation.csv";
pub const DRAWS_FILE: &str = "validation_draws.csv";

#[derive(Args)]
pub struct ValidateArgs {
    /// Run directory holding archive.jsonl and genomes.json.
    #[arg(long, value_name = "DIR")]
    archive: PathBuf,
    /// Number of condition draws; every individual flies the same batch.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_DRAWS)]
    draws: usize,
    /// Release altitudes flown per draw, m (comma separated).
    #[arg(long, value_name = "M,..", value_delimiter = ',', default_values_t = [2.0, 4.0, 6.0, 8.0])]
    altitudes: Vec<f64>,
}

pub fn run(args: &ValidateArgs, seed: u64, out: &Path) -> Result<(), CliError> {
    let archive_path = args.archive.join(ARCHIVE_FILE);
    let genomes_path = args.archive.join(GENOMES_FILE);
    for p in [&archive_path, &genomes_path] {
        if !p.is_file() {
            return Err(CliError::Usage(format!("{} not found", p.display())));
        }
    }
    let archive = RunArchive::load(&archive_path, &genomes_path)?;
    let front = archive.final_front()?;
    let candidates = front
        .iter()
        .map(|r| Ok((r.genome_id, archive.genome(r.genome_id)?.clone())))
        .collect::<divland_core::Result<Vec<(u64, Genome)>>>()?;
    let mut run_out = RunOutput::create(out)?;
    let report = validate(&candidates, &args.altitudes, args.draws, seed)?;

    run_out.write(SUMMARY_FILE, summary_csv(&report).as_bytes())?;
    run_out.write(DRAWS_FILE, draws_csv(&report).as_bytes())?;
    run_out.finish(
        "validate",
        seed,
        json!({
            "archive": args.archive.display().to_string(),
            "draws": args.draws,
            "altitudes_m": args.altitudes,
            "individuals": report.individuals.len(),
        }),
    )?;

    println!(
        "validated {} front members over {} draws x {} altitudes",
        report.individuals.len(),
        args.draws,
        args.altitudes.len(),
    );
    Ok(())
}

/// One row per individual: the quartiles of each objective.
fn summary_csv(report: &ValidationReport) -> String {
    let mut out = String::from(
        "genome_id,f1_p25,f1_p50,f1_p75,f2_p25,f2_p50,f2_p75,f3_p25,f3_p50,f3_p75\n",
    );
    for ind in &report.individuals {
        out.push_str(&ind.genome_id.to_string());
        for objective in &ind.quartiles {
            for q in objective {
                out.push(',');
                out.push_str(&fmt9(*q));
            }
        }
        out.push('\n');
    }
    out
}

/// Every raw score: one row per individual per draw.
fn draws_csv(report: &ValidationReport) -> String {
    let mut out = String::from("genome_id,draw,f1,f2,f3\n");
    for ind in &report.individuals {
        for (draw, f) in ind.fitness.iter().enumerate() {
            out.push_str(&format!(
                "{},{draw},{},{},{}\n",
                ind.genome_id,
                fmt9(f.f1),
                fmt9(f.f2),
                fmt9(f.f3)
            ));
        }
    }
    out
}
