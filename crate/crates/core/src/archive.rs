//! On-disk run archives.
//!
//! A run is stored as two files: a JSON-lines archive with one
//! generation record per line, and a sidecar JSON map holding each
//! genome once, keyed by id. Records reference genomes by id only, so
//! the archive stays compact while every population snapshot remains
//! fully replayable.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::episode::FitnessVector;
use crate::error::{Error, Result};
use crate::genome::Genome;
use crate::sim_params::SimParams;

/// Crowding distance serialized with `null` standing in for the
/// infinite boundary value, which plain JSON cannot carry.
mod crowding_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if value.is_finite() {
            Some(*value).serialize(ser)
        } else {
            None::<f64>.serialize(ser)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(de)?.unwrap_or(f64::INFINITY))
    }
}

/// One population member as archived: fitness plus the selection
/// standing it held within its own snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndividualRecord {
    pub genome_id: u64,
    pub fitness: FitnessVector,
    pub rank: usize,
    #[serde(with = "crowding_serde")]
    pub crowding: f64,
}

/// One archived population: the surviving individuals of generation
/// `gen` together with the environment draw they were evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationRecord {
    pub gen: usize,
    pub params: SimParams,
    pub individuals: Vec<IndividualRecord>,
}

pub const ARCHIVE_FILE: &str = "archive.jsonl";
pub const GENOMES_FILE: &str = "genomes.json";

/// A full evolution run: every generation snapshot plus the genome
/// sidecar.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunArchive {
    pub records: Vec<GenerationRecord>,
    pub genomes: BTreeMap<u64, Genome>,
}

impl RunArchive {
    /// The archive body: one JSON object per line, in generation order.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(
                &serde_json::to_string(record)
                    .map_err(|e| Error::MalformedArchive(e.to_string()))?,
            );
            out.push('\n');
        }
        Ok(out)
    }

    pub fn genomes_json(&self) -> Result<String> {
        let mut out = serde_json::to_string_pretty(&self.genomes)
            .map_err(|e| Error::MalformedArchive(e.to_string()))?;
        out.push('\n');
        Ok(out)
    }

    /// Write both files into `dir`, returning their paths.
    pub fn save(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(e.to_string()))?;
        let archive_path = dir.join(ARCHIVE_FILE);
        let genomes_path = dir.join(GENOMES_FILE);
        write_atomic(&archive_path, self.to_jsonl()?.as_bytes())?;
        write_atomic(&genomes_path, self.genomes_json()?.as_bytes())?;
        Ok((archive_path, genomes_path))
    }

    pub fn load(archive_path: &Path, genomes_path: &Path) -> Result<RunArchive> {
        let body = fs::read_to_string(archive_path).map_err(|e| Error::Io(e.to_string()))?;
        let mut records: Vec<GenerationRecord> = Vec::new();
        for (lineno, line) in body.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: GenerationRecord = serde_json::from_str(line).map_err(|e| {
                Error::MalformedArchive(format!("line {}: {e}", lineno + 1))
            })?;
            records.push(record);
        }
        let genomes_body =
            fs::read_to_string(genomes_path).map_err(|e| Error::Io(e.to_string()))?;
        let genomes: BTreeMap<u64, Genome> = serde_json::from_str(&genomes_body)
            .map_err(|e| Error::MalformedArchive(format!("genome sidecar: {e}")))?;
        for genome in genomes.values() {
            genome.validate()?;
        }
        let archive = RunArchive { records, genomes };
        for record in &archive.records {
            for ind in &record.individuals {
                if !archive.genomes.contains_key(&ind.genome_id) {
                    return Err(Error::MalformedArchive(format!(
                        "generation {} references unknown genome {}",
                        record.gen, ind.genome_id
                    )));
                }
            }
        }
        Ok(archive)
    }

    pub fn last(&self) -> Result<&GenerationRecord> {
        self.records
            .last()
            .ok_or_else(|| Error::MalformedArchive("no generation records".into()))
    }

    /// Rank-0 members of the final snapshot, in archived order.
    pub fn final_front(&self) -> Result<Vec<IndividualRecord>> {
        Ok(self
            .last()?
            .individuals
            .iter()
            .filter(|ind| ind.rank == 0)
            .cloned()
            .collect())
    }

    pub fn genome(&self, id: u64) -> Result<&Genome> {
        self.genomes
            .get(&id)
            .ok_or_else(|| Error::MalformedArchive(format!("unknown genome id {id}")))
    }
}

/// Write via a sibling temp file and rename, so readers never observe a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::Io(e.to_string()))?;
    tmp.write_all(bytes).map_err(|e| Error::Io(e.to_string()))?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}
