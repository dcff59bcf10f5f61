//! Run-directory plumbing: every subcommand funnels its files through
//! [`RunOutput`], which writes them atomically, records their digests,
//! and seals the directory with a manifest written last. A manifest on
//! disk therefore implies every file it lists is complete.

use chrono::{SecondsFormat, Utc};
use divland_core::archive::write_atomic;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Float formatting for the CSV exporters, matching the trajectory
/// files. NaN cells become `nan`.
pub fn fmt9(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.8e}")
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    master_seed: u64,
    config: serde_json::Value,
    started_utc: &'a str,
    finished_utc: String,
    files: &'a BTreeMap<String, String>,
}

/// Collects one run's data files. Timestamps live only here and in the
/// manifest, keeping the data files byte-reproducible across reruns.
pub struct RunOutput {
    dir: PathBuf,
    started: String,
    files: BTreeMap<String, String>,
}

impl RunOutput {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("create {}: {e}", dir.display())))?;
        Ok(RunOutput {
            dir: dir.to_path_buf(),
            started: timestamp(),
            files: BTreeMap::new(),
        })
    }

    /// Write one data file into the run directory and record its digest.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Serialize a value as pretty JSON and write it as a data file.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut body = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("encode {name}: {e}")))?;
        body.push('\n');
        self.write(name, body.as_bytes())
    }

    /// Seal the run: write the manifest naming every file written so far.
    pub fn finish(
        self,
        command: &str,
        master_seed: u64,
        config: serde_json::Value,
    ) -> Result<(), CliError> {
        let manifest = RunManifest {
            tool: "divland",
            version: env!("CARGO_PKG_VERSION"),
            command,
            master_seed,
            config,
            started_utc: &self.started,
            finished_utc: timestamp(),
            files: &self.files,
        };
        let mut body = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Io(format!("encode manifest: {e}")))?;
        body.push('\n');
        write_atomic(&self.dir.join(MANIFEST_FILE), body.as_bytes())?;
        Ok(())
    }
}

fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}
