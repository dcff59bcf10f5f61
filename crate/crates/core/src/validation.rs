//! Robustness validation over a shared batch of environment draws.
//!
//! Every candidate is scored on the identical sequence of parameter
//! draws and episode seeds, so differences in the report reflect the
//! policies alone and never the luck of the draw.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::episode::FitnessVector;
use crate::error::{Error, Result};
use crate::evolution::evaluate;
use crate::genome::Genome;
use crate::rng::{self, TAG_VALIDATE_EVAL, TAG_VALIDATE_PARAMS};
use crate::sim_params::{sample_params, SimParams};

pub const DEFAULT_DRAWS: usize = 250;

/// Linear-interpolation percentile of unsorted data. `p` in [0, 100].
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("percentile of an empty set".into()));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::InvalidConfig(format!(
            "percentile {p} outside [0, 100]"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// One candidate's validation outcome: all raw scores plus the three
/// quartiles per objective, rows ordered (f1, f2, f3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualValidation {
    pub genome_id: u64,
    pub fitness: Vec<FitnessVector>,
    pub quartiles: [[f64; 3]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub master_seed: u64,
    pub draws: usize,
    pub altitudes_m: Vec<f64>,
    pub individuals: Vec<IndividualValidation>,
}

/// Score every candidate on `draws` shared parameter sets, each
/// averaged over the given altitudes. Candidates may repeat; repeats
/// produce identical rows.
pub fn validate(
    candidates: &[(u64, Genome)],
    altitudes_m: &[f64],
    draws: usize,
    master_seed: u64,
) -> Result<ValidationReport> {
    if draws == 0 {
        return Err(Error::InvalidConfig("at least one draw is required".into()));
    }
    if altitudes_m.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one evaluation altitude is required".into(),
        ));
    }
    let mut params_rng = rng::stream(master_seed, &[TAG_VALIDATE_PARAMS]);
    let batch: Vec<SimParams> = (0..draws).map(|_| sample_params(&mut params_rng)).collect();
    let seeds: Vec<u64> = (0..draws)
        .map(|d| rng::derive_seed(master_seed, &[TAG_VALIDATE_EVAL, d as u64]))
        .collect();

    let individuals = candidates
        .par_iter()
        .map(|(id, genome)| {
            let fitness = batch
                .iter()
                .zip(&seeds)
                .map(|(params, &seed)| evaluate(genome, params, altitudes_m, seed))
                .collect::<Result<Vec<FitnessVector>>>()?;
            let mut quartiles = [[0.0; 3]; 3];
            for (k, row) in quartiles.iter_mut().enumerate() {
                let column: Vec<f64> = fitness.iter().map(|f| f.as_array()[k]).collect();
                for (w, p) in [25.0, 50.0, 75.0].iter().enumerate() {
                    row[w] = percentile(&column, *p)?;
                }
            }
            Ok(IndividualValidation {
                genome_id: *id,
                fitness,
                quartiles,
            })
        })
        .collect::<Result<Vec<IndividualValidation>>>()?;

    Ok(ValidationReport {
        master_seed,
        draws,
        altitudes_m: altitudes_m.to_vec(),
        individuals,
    })
}
