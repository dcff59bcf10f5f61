//! End-to-end checks of the `divland` binary: exit codes, file layout,
//! manifest integrity, and byte-level reproducibility.

use divland_core::genome::{Arch, Genome};
use sha2::{Digest, Sha256};
use std::path::Path;
use std::process::{Command, Output};

fn divland(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divland"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn divland")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, rel: &str) -> Vec<u8> {
    std::fs::read(dir.join(rel)).unwrap_or_else(|e| panic!("read {rel}: {e}"))
}

fn read_json(dir: &Path, rel: &str) -> serde_json::Value {
    serde_json::from_slice(&read(dir, rel)).unwrap_or_else(|e| panic!("parse {rel}: {e}"))
}

fn write_zero_genome(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("zero.json");
    let body = serde_json::to_string(&Genome::zero(Arch::Nn)).unwrap();
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(tmp.path(), &["evolve", "--config", "no_such.toml", "--out", "o"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn out_of_range_release_altitude_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(
        tmp.path(),
        &["simulate", "--baseline-gain", "1.5", "--altitude", "20", "--out", "o"],
    );
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("altitude"), "{}", stderr(&out));
}

#[test]
fn malformed_genome_json_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.json"), "not json").unwrap();
    let out = divland(
        tmp.path(),
        &["simulate", "--genome", "bad.json", "--out", "o"],
    );
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn zero_workers_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(
        tmp.path(),
        &["evolve", "--desk", "--arch", "nn", "--workers", "0", "--out", "o"],
    );
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn repeated_seed_reproduces_every_data_file() {
    let tmp = tempfile::tempdir().unwrap();
    for out_dir in ["a", "b"] {
        let out = divland(
            tmp.path(),
            &["evolve", "--desk", "--arch", "nn", "--seed", "7", "--out", out_dir],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["archive.jsonl", "genomes.json", "nu_series.csv"] {
        assert_eq!(
            read(tmp.path(), &format!("a/{name}")),
            read(tmp.path(), &format!("b/{name}")),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn manifest_checksums_match_the_files_on_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(
        tmp.path(),
        &["evolve", "--desk", "--arch", "ctrnn", "--seed", "3", "--out", "run"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest = read_json(tmp.path(), "run/manifest.json");
    let files = manifest["files"].as_object().expect("files map");
    assert_eq!(files.len(), 3);
    for (name, digest) in files {
        let actual = hex::encode(Sha256::digest(read(tmp.path(), &format!("run/{name}"))));
        assert_eq!(&actual, digest.as_str().unwrap(), "digest mismatch for {name}");
    }
    assert_eq!(manifest["master_seed"], 3);
    assert_eq!(manifest["config"]["evolution"]["mu"], 50);
}

#[test]
fn baseline_lands_smoothly_without_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(
        tmp.path(),
        &[
            "simulate",
            "--baseline-gain",
            "1.5",
            "--noiseless",
            "--delay-samples",
            "1",
            "--out",
            "run",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let episode = read_json(tmp.path(), "run/episode.json");
    assert_eq!(episode["termination"], "landed");
    assert!(episode["fitness"]["f3"].as_f64().unwrap() < 0.5);
    let csv = String::from_utf8(read(tmp.path(), "run/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,h,v,T,T_sp,D_true,D_obs,dD_obs,missed"
    );
    assert_eq!(lines.count() as u64, episode["records"].as_u64().unwrap());
}

#[test]
fn zero_genome_hovers_until_the_time_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let genome = write_zero_genome(tmp.path());
    let out = divland(
        tmp.path(),
        &[
            "simulate",
            "--genome",
            genome.to_str().unwrap(),
            "--noiseless",
            "--out",
            "run",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let episode = read_json(tmp.path(), "run/episode.json");
    assert_eq!(episode["termination"], "timeout");
    assert_eq!(episode["fitness"]["f2"].as_f64().unwrap(), 4.0);
    assert_eq!(episode["fitness"]["f3"].as_f64().unwrap(), 0.0);
}

#[test]
fn default_map_grid_is_81_by_81_with_axis_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let genome = write_zero_genome(tmp.path());
    let out = divland(
        tmp.path(),
        &["map", "--genome", genome.to_str().unwrap(), "--out", "run"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = String::from_utf8(read(tmp.path(), "run/map.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2 + 81);
    for line in &lines {
        assert_eq!(line.split(',').count(), 81);
    }
    // A memoryless all-zero policy settles at zero everywhere.
    for line in &lines[2..] {
        for cell in line.split(',') {
            assert_eq!(cell.parse::<f64>().unwrap(), 0.0);
        }
    }
    let meta = read_json(tmp.path(), "run/map.meta.json");
    assert_eq!(meta["non_convergent"], 0);
}

#[test]
fn validate_is_deterministic_and_keeps_quartiles_ordered() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(
        tmp.path(),
        &["evolve", "--desk", "--arch", "nn", "--seed", "4", "--out", "evo"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for out_dir in ["v1", "v2"] {
        let out = divland(
            tmp.path(),
            &[
                "validate",
                "--archive",
                "evo",
                "--draws",
                "3",
                "--seed",
                "11",
                "--out",
                out_dir,
            ],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["validation.csv", "validation_draws.csv"] {
        assert_eq!(
            read(tmp.path(), &format!("v1/{name}")),
            read(tmp.path(), &format!("v2/{name}")),
            "{name} differs between identical runs"
        );
    }

    let summary = String::from_utf8(read(tmp.path(), "v1/validation.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    let front: Vec<String> = {
        let archive = String::from_utf8(read(tmp.path(), "evo/archive.jsonl")).unwrap();
        let last: serde_json::Value =
            serde_json::from_str(archive.lines().last().unwrap()).unwrap();
        last["individuals"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|i| i["rank"] == 0)
            .map(|i| i["genome_id"].to_string())
            .collect()
    };
    assert_eq!(rows.len(), front.len());
    for row in rows {
        let fields: Vec<f64> = row
            .split(',')
            .skip(1)
            .map(|f| f.parse().unwrap())
            .collect();
        assert_eq!(fields.len(), 9);
        for objective in fields.chunks(3) {
            assert!(objective[0] <= objective[1] && objective[1] <= objective[2]);
        }
    }

    let draws = String::from_utf8(read(tmp.path(), "v1/validation_draws.csv")).unwrap();
    assert_eq!(draws.lines().count(), 1 + 3 * front.len());
}

#[test]
fn single_draw_validation_has_one_row_per_individual() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(
        tmp.path(),
        &["evolve", "--desk", "--arch", "rnn", "--seed", "6", "--out", "evo"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = divland(
        tmp.path(),
        &["validate", "--archive", "evo", "--draws", "1", "--out", "val"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = String::from_utf8(read(tmp.path(), "val/validation.csv")).unwrap();
    let draws = String::from_utf8(read(tmp.path(), "val/validation_draws.csv")).unwrap();
    assert_eq!(summary.lines().count(), draws.lines().count());
}

#[test]
fn missing_archive_directory_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(tmp.path(), &["validate", "--archive", "nowhere", "--out", "o"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("not found"), "{}", stderr(&out));
}

#[test]
fn static_camera_reports_exactly_zero_divergence() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(tmp.path(), &["flow-check", "--scaled-vz", "0", "--out", "run"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read_json(tmp.path(), "run/flow_check.json");
    assert_eq!(report["analytic_divergence_per_s"].as_f64().unwrap(), 0.0);
    assert_eq!(report["estimated_divergence_per_s"].as_f64().unwrap(), 0.0);
}

#[test]
fn estimator_tracks_the_analytic_divergence() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(tmp.path(), &["flow-check", "--out", "run"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read_json(tmp.path(), "run/flow_check.json");
    let analytic = report["analytic_divergence_per_s"].as_f64().unwrap();
    let estimate = report["estimated_divergence_per_s"].as_f64().unwrap();
    assert_eq!(analytic, 1.0);
    assert!((estimate - analytic).abs() <= 0.01 * analytic.abs());
}

#[test]
fn pair_budget_caps_at_one_hundred() {
    let tmp = tempfile::tempdir().unwrap();
    let out = divland(
        tmp.path(),
        &["flow-check", "--points", "150", "--out", "run"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read_json(tmp.path(), "run/flow_check.json");
    assert_eq!(report["pairs_used"], 100);
    assert_eq!(report["scene"]["points"], 150);
}
