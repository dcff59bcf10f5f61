//! Steady-state input-output maps.
//!
//! A policy's long-run command surface over a grid of held inputs:
//! rows sweep the divergence axis, columns the divergence-rate axis.
//! Cells where the response never settles are carried as missing
//! values rather than dropped, so the grid shape is always full.

use serde::{Deserialize, Serialize};

use crate::episode::fmt9;
use crate::error::{Error, Result};

pub const DEFAULT_D_LO: f64 = -1.0;
pub const DEFAULT_D_HI: f64 = 2.0;
pub const DEFAULT_DD_LO: f64 = -4.0;
pub const DEFAULT_DD_HI: f64 = 4.0;
pub const DEFAULT_GRID_POINTS: usize = 81;

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn default_d_grid() -> Vec<f64> {
    linspace(DEFAULT_D_LO, DEFAULT_D_HI, DEFAULT_GRID_POINTS)
}

pub fn default_dd_grid() -> Vec<f64> {
    linspace(DEFAULT_DD_LO, DEFAULT_DD_HI, DEFAULT_GRID_POINTS)
}

/// Settled command per grid cell; `None` marks non-convergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateMap {
    pub d_grid: Vec<f64>,
    pub dd_grid: Vec<f64>,
    pub cells: Vec<Vec<Option<f64>>>,
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(name));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

/// Evaluate `response` over the grid cross product. Row `i` holds
/// `response(d_grid[i], dd_grid[j])` for every `j`.
pub fn steady_state_map(
    response: impl Fn(f64, f64) -> Option<f64>,
    d_grid: &[f64],
    dd_grid: &[f64],
) -> Result<SteadyStateMap> {
    check_grid("divergence", d_grid)?;
    check_grid("divergence rate", dd_grid)?;
    let cells = d_grid
        .iter()
        .map(|&d| dd_grid.iter().map(|&dd| response(d, dd)).collect())
        .collect();
    Ok(SteadyStateMap {
        d_grid: d_grid.to_vec(),
        dd_grid: dd_grid.to_vec(),
        cells,
    })
}

impl SteadyStateMap {
    pub fn non_convergent(&self) -> usize {
        self.cells
            .iter()
            .map(|row| row.iter().filter(|c| c.is_none()).count())
            .sum()
    }

    /// CSV form: two axis rows (row grid, then column grid), then the
    /// matrix with `nan` in unsettled cells.
    pub fn to_csv(&self) -> String {
        let join = |values: &[f64]| {
            values
                .iter()
                .map(|&v| fmt9(v))
                .collect::<Vec<String>>()
                .join(",")
        };
        let mut out = String::new();
        out.push_str(&join(&self.d_grid));
        out.push('\n');
        out.push_str(&join(&self.dd_grid));
        out.push('\n');
        for row in &self.cells {
            let line = row
                .iter()
                .map(|c| fmt9(c.unwrap_or(f64::NAN)))
                .collect::<Vec<String>>()
                .join(",");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}
