//! `divland map`: tabulate where a policy's output settles for every
//! combination of frozen divergence inputs.

use clap::Args;
use divland_core::network::{steady_state_response, SS_DT};
use divland_core::ssmap::{
    linspace, steady_state_map, DEFAULT_DD_HI, DEFAULT_DD_LO, DEFAULT_D_HI, DEFAULT_D_LO,
    DEFAULT_GRID_POINTS,
};
use serde_json::json;
use std::path::{Path, PathBuf};

use crate::output::RunOutput;
use crate::simulate::load_genome;
use crate::CliError;

pub const MAP_FILE: &str = "map.csv";
pub const MAP_META_FILE: &str = "map.meta.json";

#[derive(Args)]
pub struct MapArgs {
    /// Controller genome JSON file.
    #[arg(long, value_name = "FILE")]
    genome: PathBuf,
    /// Divergence axis start, 1/s.
    #[arg(long, value_name = "LO", default_value_t = DEFAULT_D_LO, allow_negative_numbers = true)]
    d_min: f64,
    /// Divergence axis end, 1/s.
    #[arg(long, value_name = "HI", default_value_t = DEFAULT_D_HI, allow_negative_numbers = true)]
    d_max: f64,
    /// Points along the divergence axis.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_GRID_POINTS)]
    d_points: usize,
    /// Divergence-rate axis start, 1/s^2.
    #[arg(long, value_name = "LO", default_value_t = DEFAULT_DD_LO, allow_negative_numbers = true)]
    dd_min: f64,
    /// Divergence-rate axis end, 1/s^2.
    #[arg(long, value_name = "HI", default_value_t = DEFAULT_DD_HI, allow_negative_numbers = true)]
    dd_max: f64,
    /// Points along the divergence-rate axis.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_GRID_POINTS)]
    dd_points: usize,
}

pub fn run(args: &MapArgs, seed: u64, out: &Path) -> Result<(), CliError> {
    let genome = load_genome(&args.genome)?;
    let mut run_out = RunOutput::create(out)?;
    let d_grid = linspace(args.d_min, args.d_max, args.d_points);
    let dd_grid = linspace(args.dd_min, args.dd_max, args.dd_points);
    let map = steady_state_map(
        |d, dd| steady_state_response(&genome, d, dd),
        &d_grid,
        &dd_grid,
    )?;

    let meta = json!({
        "genome": args.genome.display().to_string(),
        "arch": genome.arch,
        "d_grid": { "min": args.d_min, "max": args.d_max, "points": args.d_points },
        "dd_grid": { "min": args.dd_min, "max": args.dd_max, "points": args.dd_points },
        "settle_dt_s": SS_DT,
        "non_convergent": map.non_convergent(),
    });

    run_out.write(MAP_FILE, map.to_csv().as_bytes())?;
    run_out.write_json(MAP_META_FILE, &meta)?;
    run_out.finish("map", seed, meta)?;

    println!(
        "mapped {} x {} inputs, {} without a settled response",
        args.d_points,
        args.dd_points,
        map.non_convergent(),
    );
    Ok(())
}
