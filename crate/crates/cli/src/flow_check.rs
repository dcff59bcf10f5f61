//! `divland flow-check`: drop the size-divergence estimator onto a
//! synthetic planar scene and report how close it lands to the
//! analytic value.

use clap::Args;
use divland_core::flow_geometry::{
    canonical_divergence, estimate_divergence, observables, CameraState, PlanarScene,
    TrackedPointSet, MAX_PAIRS,
};
use serde_json::json;
use std::path::Path;

use crate::output::{fmt9, RunOutput};
use crate::CliError;

pub const REPORT_FILE: &str = "flow_check.json";

#[derive(Args)]
pub struct FlowCheckArgs {
    /// Distance to the scene along the optical axis, m.
    #[arg(long, value_name = "M", default_value_t = 2.0, allow_negative_numbers = true)]
    z0: f64,
    /// Scene depth slope along image x.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    slope_x: f64,
    /// Scene depth slope along image y.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    slope_y: f64,
    /// Number of scattered feature points.
    #[arg(long, value_name = "N", default_value_t = 40)]
    points: usize,
    /// Image-coordinate bound the points scatter within.
    #[arg(long, default_value_t = 0.5)]
    half_fov: f64,
    /// Approach rate over scene distance, 1/s.
    #[arg(long, value_name = "V", default_value_t = 0.5, allow_negative_numbers = true)]
    scaled_vz: f64,
    /// Frame interval, s.
    #[arg(long, value_name = "S", default_value_t = 0.005)]
    dt: f64,
}

pub fn run(args: &FlowCheckArgs, seed: u64, out: &Path) -> Result<(), CliError> {
    let mut scene = PlanarScene::new(args.z0, args.slope_x, args.slope_y)?;
    let mut run_out = RunOutput::create(out)?;
    scene.scatter(args.points, args.half_fov, seed)?;
    let cam = CameraState::descending(args.scaled_vz * args.z0);
    let analytic = observables(&cam, &scene).divergence;
    let tracked = TrackedPointSet::from_translation(&scene, cam.velocity, args.dt)?;
    let estimate = canonical_divergence(estimate_divergence(&tracked, seed)?);
    let pairs_used = (args.points * (args.points - 1) / 2).min(MAX_PAIRS);

    let report = json!({
        "scene": {
            "z0_m": args.z0,
            "slope_x": args.slope_x,
            "slope_y": args.slope_y,
            "points": args.points,
            "half_fov": args.half_fov,
        },
        "motion": {
            "scaled_vz_per_s": args.scaled_vz,
            "frame_dt_s": args.dt,
        },
        "pairs_used": pairs_used,
        "analytic_divergence_per_s": analytic,
        "estimated_divergence_per_s": estimate,
        "bias_per_s": estimate - analytic,
    });

    run_out.write_json(REPORT_FILE, &report)?;
    run_out.finish("flow-check", seed, report)?;

    println!("analytic divergence  {}", fmt9(analytic));
    println!("estimated divergence {}", fmt9(estimate));
    println!("bias                 {}", fmt9(estimate - analytic));
    println!("points {}, pairs used {}", args.points, pairs_used);
    Ok(())
}
