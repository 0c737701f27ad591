//! Exhaustive grid enumeration for small node counts, used as an
//! independent check on the optimizer.

use std::cmp::Ordering;

use super::{compare, Candidate, Objective, OptimizationProblem, OptimizationResult};
use crate::error::{Error, Result};

/// Largest node count the grid oracle accepts.
pub const MAX_GRID_NODES: usize = 3;

/// Enumerates every composition of the link length into spans that are
/// multiples of `grid_step_km` (the tail takes the remainder), with
/// saturating gains, and returns the best one. Deterministic.
pub fn brute_force_grid(problem: &OptimizationProblem, grid_step_km: f64) -> Result<OptimizationResult> {
    problem.validate()?;
    let n = problem.node_count;
    if n > MAX_GRID_NODES {
        return Err(Error::GridTooLarge {
            nodes: n,
            max: MAX_GRID_NODES,
        });
    }
    if !(grid_step_km.is_finite() && grid_step_km > 0.0) {
        return Err(Error::Domain {
            name: "grid_step_km",
            value: grid_step_km,
            requirement: "finite and > 0",
        });
    }

    let total = problem.total_length_km;
    let units = (total / grid_step_km + 1e-9).floor() as usize;
    let objective = Objective::new(problem);
    let mut spans = vec![0.0; n + 1];
    let mut best: Option<Candidate> = None;
    let mut evaluations = 0;
    let mut counts = vec![0usize; n];

    loop {
        let used: usize = counts.iter().sum();
        if used <= units {
            for (s, &k) in spans.iter_mut().zip(&counts) {
                *s = k as f64 * grid_step_km;
            }
            let amplified: f64 = spans[..n].iter().sum();
            spans[n] = (total - amplified).max(0.0);
            let candidate = Candidate {
                value: objective.value(&spans, &[]),
                spans: spans.clone(),
                fractions: Vec::new(),
            };
            evaluations += 1;
            let better = match &best {
                None => true,
                Some(b) => compare(&candidate, b) == Ordering::Greater,
            };
            if better {
                best = Some(candidate);
            }
        }
        // odometer over counts with the running sum bounded by `units`
        let mut pos = 0;
        loop {
            if pos == n {
                let best = best.expect("at least one grid point");
                let config = objective.config(&best.spans, &[]);
                return Ok(OptimizationResult::from_config(
                    config,
                    problem.criterion,
                    true,
                    evaluations,
                ));
            }
            counts[pos] += 1;
            if counts.iter().sum::<usize>() <= units {
                break;
            }
            counts[pos] = 0;
            pos += 1;
        }
    }
}

/// Upper estimate of how much objective a grid of spacing `grid_step_km` can
/// lose against the continuous optimum near `result`: half the curvature along
/// each tail-to-span exchange direction times the squared step, summed.
pub fn grid_resolution_bound(problem: &OptimizationProblem, result: &OptimizationResult, grid_step_km: f64) -> f64 {
    let objective = Objective::new(problem);
    let base = result.config.spans_km();
    let n = base.len() - 1;
    let f0 = objective.value(&base, &[]);
    let h = grid_step_km;
    let mut bound = 0.0;
    for i in 0..n {
        let shifted = |delta: f64| {
            let mut s = base.clone();
            s[i] += delta;
            s[n] -= delta;
            (s[i] >= 0.0 && s[n] >= 0.0).then(|| objective.value(&s, &[]))
        };
        let curvature = match (shifted(h), shifted(-h)) {
            (Some(up), Some(down)) => (up - 2.0 * f0 + down) / (h * h),
            (Some(up), None) => match shifted(2.0 * h) {
                Some(up2) => (up2 - 2.0 * up + f0) / (h * h),
                None => 0.0,
            },
            (None, Some(down)) => match shifted(-2.0 * h) {
                Some(down2) => (down2 - 2.0 * down + f0) / (h * h),
                None => 0.0,
            },
            (None, None) => 0.0,
        };
        bound += 0.5 * curvature.abs() * h * h;
    }
    bound
}
