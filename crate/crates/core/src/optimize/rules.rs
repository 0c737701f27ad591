//! Structural checks on optimized configurations.

use super::{optimize_with, GainMode, OptimizationProblem, OptimizationResult, OptimizerSettings, SE_TIE_TOL};
use crate::capacity::{Criterion, InputPower, NoisyChannel};
use crate::error::{Error, Result};
use crate::link::{attenuation_db, saturating_gain_clamped, span_transmittance};

/// Bisection stops once the bracket is narrower than this, km.
pub const THRESHOLD_TOL_KM: f64 = 0.01;

/// Relative gain gap under which the max-gain rule is considered to hold.
pub const MAX_GAIN_RULE_TOL: f64 = 1e-4;

const THRESHOLD_SEARCH_LIMIT_KM: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub length_km: f64,
    pub attenuation_db: f64,
}

/// Link length beyond which `N` amplifiers first beat the loss-only link under
/// the Holevo criterion by more than the tie tolerance.
pub fn loss_only_threshold(
    alpha_per_km: f64,
    n_bar: InputPower,
    node_count: usize,
    settings: &OptimizerSettings,
) -> Result<Threshold> {
    if node_count == 0 {
        return Err(Error::InvalidConfig("threshold needs at least one node".into()));
    }
    let amplification_wins = |length: f64| -> Result<bool> {
        let problem = OptimizationProblem::new(length, node_count, alpha_per_km, n_bar, Criterion::Holevo)?;
        let best = optimize_with(&problem, settings)?;
        Ok(best.se - problem.loss_only_se() > SE_TIE_TOL)
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    while !amplification_wins(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > THRESHOLD_SEARCH_LIMIT_KM {
            return Err(Error::InvalidConfig(format!(
                "no loss-only crossover below {THRESHOLD_SEARCH_LIMIT_KM} km"
            )));
        }
    }
    while hi - lo > THRESHOLD_TOL_KM {
        let mid = 0.5 * (lo + hi);
        if amplification_wins(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let length_km = 0.5 * (lo + hi);
    Ok(Threshold {
        length_km,
        attenuation_db: attenuation_db(length_km, alpha_per_km),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxGainReport {
    /// `(G_sat - G) / G_sat` at each node, using the actual pre-amplifier state.
    pub relative_gaps: Vec<f64>,
    pub holds: bool,
}

/// Compares every optimized gain with the saturating gain at that node.
pub fn verify_max_gain_rule(result: &OptimizationResult) -> MaxGainReport {
    let cfg = &result.config;
    let n_bar = cfg.n_bar();
    let mut ch = NoisyChannel::identity();
    let relative_gaps: Vec<f64> = cfg
        .stages()
        .iter()
        .map(|stage| {
            let pre = ch.attenuate(span_transmittance(stage.span_km(), cfg.alpha_per_km()));
            let g_sat = saturating_gain_clamped(pre.total_power(n_bar), n_bar);
            ch = crate::link::propagate_stage(ch, stage, cfg.alpha_per_km());
            (g_sat - stage.gain()) / g_sat
        })
        .collect();
    let holds = relative_gaps.iter().all(|g| g.abs() <= MAX_GAIN_RULE_TOL);
    MaxGainReport { relative_gaps, holds }
}

/// Free-gain optimization of `problem` followed by [`verify_max_gain_rule`].
pub fn free_gain_report(problem: &OptimizationProblem, settings: &OptimizerSettings) -> Result<(OptimizationResult, MaxGainReport)> {
    let problem = problem.with_gain_mode(GainMode::Free);
    let result = optimize_with(&problem, settings)?;
    let report = verify_max_gain_rule(&result);
    Ok((result, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_without_nodes() {
        let p = OptimizationProblem::new(50.0, 0, 0.05, InputPower::new(100.0).unwrap(), Criterion::Holevo).unwrap();
        let r = super::super::optimize(&p).unwrap();
        let report = verify_max_gain_rule(&r);
        assert!(report.relative_gaps.is_empty());
        assert!(report.holds);
    }

    #[test]
    fn threshold_needs_nodes() {
        let p = InputPower::new(100.0).unwrap();
        assert!(loss_only_threshold(0.05, p, 0, &OptimizerSettings::default()).is_err());
    }
}
