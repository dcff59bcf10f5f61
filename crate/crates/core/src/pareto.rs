//! Pareto-front geometry over the two live objectives.
//!
//! Fronts are compared by ν: the area of the reference box the front
//! has NOT yet claimed, divided by the length of the front polyline.
//! Descent time (f1) and touchdown speed (f3) span the trade-off;
//! final height is left out because successful runs all drive it to
//! the floor, which would collapse the third dimension to a plane.
//!
//! Smaller ν is better. Progress shrinks it from both sides: members
//! moving toward the origin shrink the unclaimed area, and a front
//! spreading along the trade-off grows the dividing length.

use serde::{Deserialize, Serialize};

use crate::archive::{IndividualRecord, RunArchive};
use crate::episode::FitnessVector;
use crate::error::{Error, Result};

/// Factor applied to the per-objective maxima when no explicit
/// reference point is given.
pub const REFERENCE_MARGIN: f64 = 1.1;

/// One front member: fitness plus the genome it points back to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub genome_id: u64,
    pub fitness: FitnessVector,
}

/// A set of mutually non-dominated individuals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParetoFront {
    pub members: Vec<FrontMember>,
}

impl ParetoFront {
    pub fn from_records(records: &[IndividualRecord]) -> Self {
        ParetoFront {
            members: records
                .iter()
                .map(|r| FrontMember {
                    genome_id: r.genome_id,
                    fitness: r.fitness,
                })
                .collect(),
        }
    }

    /// Projection of each member onto (f1, f3).
    fn points(&self) -> Vec<[f64; 2]> {
        self.members
            .iter()
            .map(|m| [m.fitness.f1, m.fitness.f3])
            .collect()
    }
}

/// The attainment staircase: unique 2-D non-dominated points, sorted by
/// the first coordinate with the second strictly decreasing.
fn staircase(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .expect("finite objectives")
            .then(a[1].partial_cmp(&b[1]).expect("finite objectives"))
    });
    let mut keep: Vec<[f64; 2]> = Vec::new();
    for p in sorted {
        match keep.last() {
            Some(last) if p == *last => continue,
            Some(last) if p[1] >= last[1] => continue,
            _ => keep.push(p),
        }
    }
    keep
}

/// ν of one front against a reference point (upper bounds on both
/// objectives; the box floor is the origin, where both objectives are
/// ideal). Unclaimed box area over polyline length; a front that
/// reduces to a single distinct point uses length 1.
pub fn nu_metric(front: &ParetoFront, reference: [f64; 2]) -> Result<f64> {
    if front.members.is_empty() {
        return Err(Error::EmptyFront);
    }
    let points = front.points();
    for p in &points {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(Error::UnevaluatedIndividual);
        }
        if p[0] < 0.0 || p[1] < 0.0 || p[0] > reference[0] || p[1] > reference[1] {
            return Err(Error::OutsideReference {
                x: p[0],
                y: p[1],
                rx: reference[0],
                ry: reference[1],
            });
        }
    }
    let stairs = staircase(&points);
    let mut claimed = 0.0;
    for (i, p) in stairs.iter().enumerate() {
        let next_x = if i + 1 < stairs.len() {
            stairs[i + 1][0]
        } else {
            reference[0]
        };
        claimed += (next_x - p[0]) * (reference[1] - p[1]);
    }
    let unclaimed = reference[0] * reference[1] - claimed;
    let length = if stairs.len() < 2 {
        1.0
    } else {
        stairs
            .windows(2)
            .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
            .sum()
    };
    Ok(unclaimed / length)
}

/// Reference point spanning every front in `fronts`: per-objective max
/// across all members, widened by the standard margin.
pub fn default_reference<'a>(fronts: impl IntoIterator<Item = &'a ParetoFront>) -> Result<[f64; 2]> {
    let mut max = [f64::NEG_INFINITY; 2];
    let mut any = false;
    for front in fronts {
        for p in front.points() {
            any = true;
            max[0] = max[0].max(p[0]);
            max[1] = max[1].max(p[1]);
        }
    }
    if !any {
        return Err(Error::EmptyFront);
    }
    Ok([max[0] * REFERENCE_MARGIN, max[1] * REFERENCE_MARGIN])
}

fn generation_fronts(archive: &RunArchive) -> Result<Vec<ParetoFront>> {
    if archive.records.is_empty() {
        return Err(Error::MalformedArchive("no generation records".into()));
    }
    Ok(archive
        .records
        .iter()
        .map(|record| {
            let rank0: Vec<IndividualRecord> = record
                .individuals
                .iter()
                .filter(|i| i.rank == 0)
                .cloned()
                .collect();
            ParetoFront::from_records(&rank0)
        })
        .collect())
}

/// ν of every archived generation's front under one shared reference.
/// With no explicit reference, the point spans the whole run so the
/// series is comparable along its length.
pub fn nu_series(archive: &RunArchive, reference: Option<[f64; 2]>) -> Result<(Vec<f64>, [f64; 2])> {
    let fronts = generation_fronts(archive)?;
    let reference = match reference {
        Some(r) => r,
        None => default_reference(fronts.iter())?,
    };
    let series = fronts
        .iter()
        .map(|f| nu_metric(f, reference))
        .collect::<Result<Vec<f64>>>()?;
    Ok((series, reference))
}

/// Cross-run ν summary, generation by generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub reference: [f64; 2],
    pub per_run: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// ν trend over several runs of equal length, under one reference point
/// spanning them all.
pub fn trend(archives: &[RunArchive]) -> Result<TrendSummary> {
    if archives.is_empty() {
        return Err(Error::EmptyFront);
    }
    let all_fronts: Vec<Vec<ParetoFront>> = archives
        .iter()
        .map(generation_fronts)
        .collect::<Result<_>>()?;
    let generations = all_fronts[0].len();
    for fronts in &all_fronts {
        if fronts.len() != generations {
            return Err(Error::DimensionMismatch(fronts.len(), generations));
        }
    }
    let reference = default_reference(all_fronts.iter().flatten())?;
    let per_run: Vec<Vec<f64>> = all_fronts
        .iter()
        .map(|fronts| {
            fronts
                .iter()
                .map(|f| nu_metric(f, reference))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut mean = vec![0.0; generations];
    let mut min = vec![f64::INFINITY; generations];
    let mut max = vec![f64::NEG_INFINITY; generations];
    for series in &per_run {
        for (g, &v) in series.iter().enumerate() {
            mean[g] += v / per_run.len() as f64;
            min[g] = min[g].min(v);
            max[g] = max[g].max(v);
        }
    }
    Ok(TrendSummary {
        reference,
        per_run,
        mean,
        min,
        max,
    })
}
