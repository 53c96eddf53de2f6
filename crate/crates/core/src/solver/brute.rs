//! Exhaustive reference solver for tiny instances.

use std::time::Instant;

use crate::circuit::Circuit;
use crate::constraints::CheckModel;
use crate::error::SolveError;
use crate::layout::ObjectiveTuple;

use super::{empty_layout, to_layout, SolveConfig, SolveResult, Status};

/// Largest number of translation-canonical assignments the oracle accepts.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// Assignments of `pins` pins to a `strips` x `positions` grid whose smallest
/// strip and smallest position are both 1.
pub fn canonical_assignments(pins: usize, strips: u32, positions: u32) -> f64 {
    let f = |s: u32, p: u32| (s as f64 * p as f64).powi(pins as i32);
    f(strips, positions) - f(strips - 1, positions) - f(strips, positions - 1)
        + f(strips - 1, positions - 1)
}

/// Enumerates every total assignment with its smallest strip and position at
/// 1, keeps those the constraint checks accept ([`CheckModel::is_feasible`],
/// the allocation-free form of `check_all`), and returns the first
/// lexicographic minimum.
pub fn brute_force_solve(
    circuit: &Circuit,
    config: &SolveConfig,
) -> Result<SolveResult, SolveError> {
    config.validate()?;
    let start = Instant::now();
    if circuit.components().is_empty() {
        return Ok(empty_layout(config.grid, Status::Optimal));
    }
    let grid = config.grid;
    let model = CheckModel::new(circuit, &config.span_rules());
    let n = model.pin_count();
    let count = canonical_assignments(n, grid.max_strips, grid.max_positions);
    if count > BRUTE_FORCE_LIMIT {
        return Err(SolveError::TooLarge {
            assignments: count,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let holes: Vec<(i32, i32)> = (1..=grid.max_strips as i32)
        .flat_map(|s| (1..=grid.max_positions as i32).map(move |p| (s, p)))
        .collect();
    let mut idx = vec![0usize; n];
    let mut coords = vec![holes[0]; n];
    let mut best: Option<(ObjectiveTuple, Vec<(i32, i32)>)> = None;
    let mut trace = Vec::new();
    let mut nodes = 0u64;
    loop {
        nodes += 1;
        let min_s = coords.iter().map(|c| c.0).min().unwrap_or(1);
        let min_p = coords.iter().map(|c| c.1).min().unwrap_or(1);
        if min_s == 1 && min_p == 1 && model.is_feasible(&coords, grid) {
            let td: u64 = model
                .pairs
                .iter()
                .map(|pr| (coords[pr.first].0 - coords[pr.second].0).unsigned_abs() as u64)
                .sum();
            let w = coords.iter().map(|c| c.0).max().unwrap_or(0) as u64;
            let l = coords.iter().map(|c| c.1).max().unwrap_or(0) as u64;
            let t = ObjectiveTuple::new(td, w * l, w);
            if best.as_ref().is_none_or(|b| t < b.0) {
                trace.push(t);
                best = Some((t, coords.clone()));
            }
        }
        // Odometer step, last pin fastest.
        let mut i = n;
        loop {
            if i == 0 {
                let status = if best.is_some() {
                    Status::Optimal
                } else {
                    Status::Infeasible
                };
                let (layout, objective) = match best {
                    Some((t, c)) => (Some(to_layout(circuit, grid, &c)), Some(t)),
                    None => (None, None),
                };
                let elapsed = start.elapsed().as_secs_f64();
                return Ok(SolveResult {
                    layout,
                    objective,
                    status,
                    phase1_time: 0.0,
                    phase2_time: elapsed,
                    total_time: elapsed,
                    note: None,
                    trace,
                    nodes,
                });
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < holes.len() {
                coords[i] = holes[idx[i]];
                break;
            }
            idx[i] = 0;
            coords[i] = holes[0];
        }
    }
}
