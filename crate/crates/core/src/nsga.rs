//! Non-dominated sorting, crowding, and survivor truncation.
//!
//! All objectives are minimized. Sorting follows the classic fast
//! non-dominated sort; crowding is the usual normalized neighbor-gap
//! sum with infinite distance at each front boundary. Ties in the
//! per-objective orderings are broken by original index so the whole
//! pipeline stays deterministic.

use crate::episode::FitnessVector;
use crate::error::{Error, Result};

/// Strict Pareto dominance for minimization: no component worse, at
/// least one strictly better.
pub fn dominates(a: &FitnessVector, b: &FitnessVector) -> bool {
    let a = a.as_array();
    let b = b.as_array();
    let mut strictly = false;
    for k in 0..3 {
        if a[k] > b[k] {
            return false;
        }
        if a[k] < b[k] {
            strictly = true;
        }
    }
    strictly
}

fn ensure_evaluated(fitness: &[FitnessVector]) -> Result<()> {
    if fitness.iter().any(|f| !f.is_finite()) {
        return Err(Error::UnevaluatedIndividual);
    }
    Ok(())
}

/// Partition indices into fronts: front 0 is non-dominated, front 1 is
/// non-dominated once front 0 is removed, and so on. Within a front,
/// indices keep their input order.
pub fn non_dominated_sort(fitness: &[FitnessVector]) -> Result<Vec<Vec<usize>>> {
    ensure_evaluated(fitness)?;
    let n = fitness.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            if dominates(&fitness[p], &fitness[q]) {
                dominated_by[p].push(q);
            } else if dominates(&fitness[q], &fitness[p]) {
                domination_count[p] += 1;
            }
        }
        if domination_count[p] == 0 {
            current.push(p);
        }
    }
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::take(&mut current));
        current = next;
    }
    Ok(fronts)
}

/// Crowding distance of each member of one front, in the member order
/// given. Boundary members of each objective get infinity; interior
/// members accumulate the normalized gap between their neighbors. An
/// objective with zero spread contributes nothing.
pub fn crowding_distance(fitness: &[FitnessVector], front: &[usize]) -> Vec<f64> {
    let m = front.len();
    if m == 0 {
        return Vec::new();
    }
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    let mut distance = vec![0.0f64; m];
    for k in 0..3 {
        let value = |slot: usize| fitness[front[slot]].as_array()[k];
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            value(a)
                .partial_cmp(&value(b))
                .expect("finite fitness")
                .then(front[a].cmp(&front[b]))
        });
        let span = value(order[m - 1]) - value(order[0]);
        distance[order[0]] = f64::INFINITY;
        distance[order[m - 1]] = f64::INFINITY;
        if span <= 0.0 {
            continue;
        }
        for w in 1..m - 1 {
            let gap = value(order[w + 1]) - value(order[w - 1]);
            if distance[order[w]].is_finite() {
                distance[order[w]] += gap / span;
            }
        }
    }
    distance
}

/// One survivor: population slot plus the rank and crowding that earned
/// its place, recomputed among the survivors themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Survivor {
    pub slot: usize,
    pub rank: usize,
    pub crowding: f64,
}

/// Choose `capacity` survivors from the pooled population. Whole fronts
/// are taken in rank order; the front that straddles the cut is thinned
/// by descending crowding. Rank and crowding are then recomputed within
/// the chosen set, and the result is ordered by rank, then descending
/// crowding, then slot.
pub fn truncate(fitness: &[FitnessVector], capacity: usize) -> Result<Vec<Survivor>> {
    let fronts = non_dominated_sort(fitness)?;
    let mut chosen: Vec<usize> = Vec::with_capacity(capacity);
    for front in &fronts {
        if chosen.len() >= capacity {
            break;
        }
        let room = capacity - chosen.len();
        if front.len() <= room {
            chosen.extend_from_slice(front);
        } else {
            let crowding = crowding_distance(fitness, front);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| {
                crowding[b]
                    .partial_cmp(&crowding[a])
                    .expect("crowding is never NaN")
                    .then(front[a].cmp(&front[b]))
            });
            chosen.extend(order[..room].iter().map(|&w| front[w]));
        }
    }

    // Re-rank the survivors among themselves so the stored rank and
    // crowding describe the population that actually goes forward.
    let kept: Vec<FitnessVector> = chosen.iter().map(|&s| fitness[s]).collect();
    let fronts = non_dominated_sort(&kept)?;
    let mut survivors: Vec<Survivor> = Vec::with_capacity(chosen.len());
    for (rank, front) in fronts.iter().enumerate() {
        let crowding = crowding_distance(&kept, front);
        for (w, &local) in front.iter().enumerate() {
            survivors.push(Survivor {
                slot: chosen[local],
                rank,
                crowding: crowding[w],
            });
        }
    }
    survivors.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then(
                b.crowding
                    .partial_cmp(&a.crowding)
                    .expect("crowding is never NaN"),
            )
            .then(a.slot.cmp(&b.slot))
    });
    Ok(survivors)
}
