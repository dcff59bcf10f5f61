//! `divland simulate`: one landing attempt under a chosen policy and
//! sensor setup, exported step by step.

use clap::Args;
use divland_core::controller::{BaselineController, Controller, BASELINE_SETPOINT};
use divland_core::episode::{run_episode, EpisodeSummary};
use divland_core::genome::Genome;
use divland_core::network::NeuroController;
use divland_core::rng;
use divland_core::sim_params::{
    sample_params, SimParams, DELAY_SAMPLES_RANGE, FREQ_HZ_RANGE, TAU_THRUST_RANGE,
};
use serde_json::json;
use std::path::{Path, PathBuf};

use crate::output::RunOutput;
use crate::CliError;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const EPISODE_FILE: &str = "episode.json";

#[derive(Args)]
pub struct SimulateArgs {
    /// Controller genome JSON file.
    #[arg(
        long,
        value_name = "FILE",
        required_unless_present = "baseline_gain",
        conflicts_with_all = ["baseline_gain", "baseline_setpoint"]
    )]
    genome: Option<PathBuf>,
    /// Fly the built-in proportional baseline with this gain instead.
    #[arg(long, value_name = "K", allow_negative_numbers = true)]
    baseline_gain: Option<f64>,
    /// Divergence setpoint for the baseline, 1/s.
    #[arg(
        long,
        value_name = "D",
        default_value_t = BASELINE_SETPOINT,
        allow_negative_numbers = true
    )]
    baseline_setpoint: f64,
    /// Release altitude, m.
    #[arg(long, value_name = "M", default_value_t = 4.0, allow_negative_numbers = true)]
    altitude: f64,
    /// Draw sensor/actuator parameters from the seed instead of flags.
    #[arg(
        long,
        conflicts_with_all = [
            "delay_samples", "jitter_prob", "sigma_w", "sigma_p",
            "tau_thrust", "freq_hz", "noiseless"
        ]
    )]
    sample: bool,
    /// Sensor latency, whole samples.
    #[arg(long, value_name = "N")]
    delay_samples: Option<u32>,
    /// Probability a sensor tick delivers no fresh reading.
    #[arg(long, value_name = "P")]
    jitter_prob: Option<f64>,
    /// White divergence noise, 1/s.
    #[arg(long, value_name = "SIGMA")]
    sigma_w: Option<f64>,
    /// Divergence noise proportional to the reading's magnitude.
    #[arg(long, value_name = "SIGMA")]
    sigma_p: Option<f64>,
    /// Thrust lag time constant, s.
    #[arg(long, value_name = "S")]
    tau_thrust: Option<f64>,
    /// Control and sensing rate, Hz.
    #[arg(long, value_name = "HZ")]
    freq_hz: Option<f64>,
    /// Zero all sensor noise and dropout; keeps delay, lag and rate.
    #[arg(long, conflicts_with_all = ["jitter_prob", "sigma_w", "sigma_p"])]
    noiseless: bool,
}

pub fn run(args: &SimulateArgs, seed: u64, out: &Path) -> Result<(), CliError> {
    let params = build_params(args, seed)?;
    let (mut controller, descriptor) = build_controller(args)?;
    let mut run_out = RunOutput::create(out)?;
    let traj = run_episode(controller.as_mut(), args.altitude, &params, seed)?;
    let summary = EpisodeSummary::of(&traj, args.altitude, &params, seed);

    run_out.write(TRAJECTORY_FILE, traj.to_csv().as_bytes())?;
    run_out.write_json(EPISODE_FILE, &summary)?;
    run_out.finish(
        "simulate",
        seed,
        json!({
            "controller": descriptor,
            "altitude_m": args.altitude,
            "params": params,
            "sampled": args.sample,
            "noiseless": args.noiseless,
        }),
    )?;

    println!(
        "{:?} after {:.2} s: residual height {:.3} m, touchdown speed {:.3} m/s, {} steps",
        summary.termination,
        summary.fitness.f1,
        summary.fitness.f2,
        summary.fitness.f3,
        summary.records,
    );
    Ok(())
}

/// Parse and sanity-check a single-genome JSON file.
pub fn load_genome(path: &Path) -> Result<Genome, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("read {}: {e}", path.display())))?;
    let genome: Genome = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    genome.validate()?;
    Ok(genome)
}

fn build_controller(
    args: &SimulateArgs,
) -> Result<(Box<dyn Controller>, serde_json::Value), CliError> {
    if let Some(path) = &args.genome {
        let genome = load_genome(path)?;
        let descriptor = json!({ "kind": "genome", "file": path.display().to_string(), "arch": genome.arch });
        return Ok((Box::new(NeuroController::new(genome)), descriptor));
    }
    let gain = args
        .baseline_gain
        .expect("clap demands a genome or a baseline gain");
    let descriptor = json!({
        "kind": "baseline",
        "gain": gain,
        "setpoint": args.baseline_setpoint,
    });
    Ok((
        Box::new(BaselineController::new(gain, args.baseline_setpoint)),
        descriptor,
    ))
}

fn build_params(args: &SimulateArgs, seed: u64) -> Result<SimParams, CliError> {
    if args.sample {
        return Ok(sample_params(&mut rng::stream(seed, &[rng::TAG_PARAMS])));
    }
    let mut p = SimParams::nominal();
    if let Some(v) = args.delay_samples {
        p.delay_samples = v;
    }
    if let Some(v) = args.jitter_prob {
        p.jitter_prob = v;
    }
    if let Some(v) = args.sigma_w {
        p.sigma_w_per_s = v;
    }
    if let Some(v) = args.sigma_p {
        p.sigma_p_per_s = v;
    }
    if let Some(v) = args.tau_thrust {
        p.tau_thrust_s = v;
    }
    if let Some(v) = args.freq_hz {
        p.freq_hz = v;
    }
    if args.noiseless {
        // Diagnostic escape hatch: zeroed noise sits below the sampled
        // ranges, so only the dynamics fields keep their range checks.
        p.jitter_prob = 0.0;
        p.sigma_w_per_s = 0.0;
        p.sigma_p_per_s = 0.0;
        p.validate_finite()?;
        let (dlo, dhi) = DELAY_SAMPLES_RANGE;
        check_range("delay_samples", p.delay_samples as f64, (dlo as f64, dhi as f64))?;
        check_range("tau_thrust_s", p.tau_thrust_s, TAU_THRUST_RANGE)?;
        check_range("freq_hz", p.freq_hz, FREQ_HZ_RANGE)?;
    } else {
        p.validate_in_ranges()?;
    }
    Ok(p)
}

fn check_range(field: &str, value: f64, (lo, hi): (f64, f64)) -> Result<(), CliError> {
    if !(lo..=hi).contains(&value) {
        return Err(CliError::Usage(format!(
            "{field} = {value} outside [{lo}, {hi}]"
        )));
    }
    Ok(())
}
