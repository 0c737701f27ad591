//! Constrained maximization of spectral efficiency over amplifier locations
//! and gains.
//!
//! The search space for `N` nodes over a link of length `L` is the simplex of
//! span lengths `L_1..L_{N+1}` summing to `L` (the last one is the
//! unamplified tail). In [`GainMode::Saturating`] every gain is the largest
//! value the power cap allows; in [`GainMode::Free`] each gain is an extra
//! variable `G = 1 + u (G_sat - 1)` with `u` projected onto `[0, 1]`, which
//! keeps every candidate feasible.
//!
//! Each start runs Nelder-Mead on an unconstrained parameterization of the
//! simplex (`L_i = L x_i^2 / sum x^2`, which reaches the faces exactly) and
//! then a pattern-search polish that trades length between pairs of spans.
//! The best start wins; near-ties go to the longer tail, then to the
//! lexicographically smaller span vector.

mod nelder_mead;
mod oracle;
mod rules;

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::{Criterion, InputPower};
use crate::error::{check_at_least, Error, Result};
use crate::link::{
    check_alpha, check_power_constraint, saturating_gain_clamped, span_transmittance, AmplifierStage,
    LinkConfig,
};

pub use oracle::{brute_force_grid, grid_resolution_bound, MAX_GRID_NODES};
pub use rules::{
    free_gain_report, loss_only_threshold, verify_max_gain_rule, MaxGainReport, Threshold, MAX_GAIN_RULE_TOL,
    THRESHOLD_TOL_KM,
};

/// Largest supported node count.
pub const MAX_NODES: usize = 64;

/// Objective differences below this are treated as ties, bits/(s·Hz).
pub const SE_TIE_TOL: f64 = 1e-9;

/// How amplifier gains are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainMode {
    /// Gain restores the total PSD to the cap at every node.
    Saturating,
    /// Gains are free variables between 1 and the saturating value.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationProblem {
    pub total_length_km: f64,
    pub node_count: usize,
    pub alpha_per_km: f64,
    pub n_bar: InputPower,
    pub criterion: Criterion,
    pub gain_mode: GainMode,
}

impl OptimizationProblem {
    pub fn new(
        total_length_km: f64,
        node_count: usize,
        alpha_per_km: f64,
        n_bar: InputPower,
        criterion: Criterion,
    ) -> Result<Self> {
        let problem = Self {
            total_length_km,
            node_count,
            alpha_per_km,
            n_bar,
            criterion,
            gain_mode: GainMode::Saturating,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_gain_mode(mut self, gain_mode: GainMode) -> Self {
        self.gain_mode = gain_mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_at_least("total_length_km", self.total_length_km, 0.0, "finite and >= 0")?;
        check_alpha(self.alpha_per_km)?;
        if self.node_count > MAX_NODES {
            return Err(Error::InvalidConfig(format!(
                "{} nodes requested, at most {MAX_NODES} supported",
                self.node_count
            )));
        }
        Ok(())
    }

    /// Spectral efficiency of the unamplified link of the same length.
    pub fn loss_only_se(&self) -> f64 {
        let tau = span_transmittance(self.total_length_km, self.alpha_per_km);
        self.criterion
            .evaluate(crate::capacity::NoisyChannel::from_parts(tau, 0.0), self.n_bar)
    }
}

/// Knobs of the multi-start search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    /// Number of starts: equal spacing, zero tail, then random simplex points.
    pub starts: usize,
    pub seed: u64,
    /// Objective calls allowed per start are `budget_factor * (N + 1)^2`.
    pub budget_factor: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            budget_factor: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub config: LinkConfig,
    pub se: f64,
    pub criterion: Criterion,
    pub converged: bool,
    pub evaluations: usize,
    pub constraint_margins: Vec<f64>,
}

impl OptimizationResult {
    pub(crate) fn from_config(config: LinkConfig, criterion: Criterion, converged: bool, evaluations: usize) -> Self {
        let se = config.spectral_efficiency(criterion);
        let constraint_margins = check_power_constraint(&config);
        Self {
            config,
            se,
            criterion,
            converged,
            evaluations,
            constraint_margins,
        }
    }

    pub fn tail_span_km(&self) -> f64 {
        self.config.tail_span_km()
    }
}

/// A candidate in natural coordinates.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Candidate {
    /// `L_1..L_{N+1}`, tail last.
    pub spans: Vec<f64>,
    /// Gain fractions `u_i` (Free mode only).
    pub fractions: Vec<f64>,
    pub value: f64,
}

/// Evaluates candidates of one problem without allocating.
pub(crate) struct Objective<'a> {
    problem: &'a OptimizationProblem,
}

impl<'a> Objective<'a> {
    pub fn new(problem: &'a OptimizationProblem) -> Self {
        Self { problem }
    }

    fn gain(&self, pre_power: f64, fraction: Option<f64>) -> f64 {
        let g_sat = saturating_gain_clamped(pre_power, self.problem.n_bar);
        match fraction {
            None => g_sat,
            Some(u) => 1.0 + u.clamp(0.0, 1.0) * (g_sat - 1.0),
        }
    }

    /// Calls `visit(span, gain)` for every amplifier and returns the end-to-end
    /// `(tau, nu)`. Arithmetic mirrors `link::propagate_stage` step for step.
    fn walk(&self, spans: &[f64], fractions: &[f64], mut visit: impl FnMut(f64, f64)) -> (f64, f64) {
        let p = self.problem;
        let n_bar = p.n_bar.get();
        let (tail, amplified) = spans.split_last().expect("tail span");
        let (mut tau, mut nu) = (1.0f64, 0.0f64);
        for (i, &span) in amplified.iter().enumerate() {
            let t = span_transmittance(span, p.alpha_per_km);
            let pre_power = (tau * t) * n_bar + nu * t;
            let g = self.gain(pre_power, fractions.get(i).copied());
            visit(span, g);
            let factor = g * t;
            tau *= factor;
            nu = factor * nu + g - 1.0;
        }
        let t = span_transmittance(*tail, p.alpha_per_km);
        (tau * t, nu * t)
    }

    pub fn value(&self, spans: &[f64], fractions: &[f64]) -> f64 {
        let (tau, nu) = self.walk(spans, fractions, |_, _| {});
        let ch = crate::capacity::NoisyChannel::from_parts(tau, nu);
        self.problem.criterion.evaluate(ch, self.problem.n_bar)
    }

    pub fn config(&self, spans: &[f64], fractions: &[f64]) -> LinkConfig {
        let mut stages = Vec::with_capacity(spans.len() - 1);
        self.walk(spans, fractions, |span, gain| {
            stages.push(AmplifierStage { span_km: span, gain });
        });
        let p = self.problem;
        LinkConfig::new(p.alpha_per_km, p.n_bar, stages, spans[spans.len() - 1])
            .expect("problem parameters were validated")
    }
}

/// Deterministic preference between two candidates.
pub(crate) fn compare(a: &Candidate, b: &Candidate) -> Ordering {
    if a.value > b.value + SE_TIE_TOL {
        return Ordering::Greater;
    }
    if b.value > a.value + SE_TIE_TOL {
        return Ordering::Less;
    }
    let tail_a = a.spans[a.spans.len() - 1];
    let tail_b = b.spans[b.spans.len() - 1];
    tail_a
        .total_cmp(&tail_b)
        .then_with(|| {
            // smaller span vector preferred
            for (x, y) in a.spans.iter().zip(&b.spans) {
                match y.total_cmp(x) {
                    Ordering::Equal => continue,
                    other => return other,
                }
            }
            Ordering::Equal
        })
}

/// Maps unconstrained coordinates onto spans summing to `total`.
fn spans_from_params(x: &[f64], total: f64, out: &mut [f64]) {
    let norm: f64 = x.iter().map(|v| v * v).sum();
    if norm == 0.0 || !norm.is_finite() {
        let each = total / out.len() as f64;
        out.iter_mut().for_each(|s| *s = each);
        return;
    }
    let last = out.len() - 1;
    for (s, v) in out[..last].iter_mut().zip(x) {
        *s = total * (v * v) / norm;
    }
    // the tail takes the remainder so that the spans sum to `total`
    out[last] = (total - out[..last].iter().sum::<f64>()).max(0.0);
}

fn params_from_spans(spans: &[f64], total: f64) -> Vec<f64> {
    spans
        .iter()
        .map(|s| if total > 0.0 { (s / total).sqrt() } else { 1.0 })
        .collect()
}

/// Runs one start: Nelder-Mead then pattern polish.
fn local_search(
    objective: &Objective<'_>,
    start: &Candidate,
    total: f64,
    budget: usize,
) -> (Candidate, usize, bool) {
    let dim_spans = start.spans.len();
    let free = !start.fractions.is_empty();
    let mut x0 = params_from_spans(&start.spans, total);
    x0.extend_from_slice(&start.fractions);

    let mut scratch = vec![0.0; dim_spans];
    let nm = nelder_mead::minimize(
        |x| {
            spans_from_params(&x[..dim_spans], total, &mut scratch);
            -objective.value(&scratch, &x[dim_spans..])
        },
        &x0,
        nelder_mead::NmOptions {
            max_evals: budget * 3 / 4,
            ftol: 1e-13,
            restart_gain: 1e-12,
            max_restarts: 50,
        },
    );

    let mut spans = vec![0.0; dim_spans];
    spans_from_params(&nm.x[..dim_spans], total, &mut spans);
    let fractions: Vec<f64> = if free {
        nm.x[dim_spans..].iter().map(|u| u.clamp(0.0, 1.0)).collect()
    } else {
        Vec::new()
    };
    let value = objective.value(&spans, &fractions);
    let mut candidate = Candidate {
        spans,
        fractions,
        value,
    };

    let remaining = budget.saturating_sub(nm.evaluations + 1);
    let (polish_evals, polished) = polish(objective, &mut candidate, total, remaining);
    (candidate, nm.evaluations + 1 + polish_evals, polished)
}

/// Pattern search in natural coordinates: move length between every ordered
/// pair of spans, and nudge each gain fraction, halving the step until it is
/// negligible. Returns (evaluations, reached the final step size).
fn polish(objective: &Objective<'_>, c: &mut Candidate, total: f64, budget: usize) -> (usize, bool) {
    const MAX_REL_STEP: f64 = 1.0 / 64.0;
    const MIN_REL_STEP: f64 = 1e-11;
    let n = c.spans.len();
    let mut evaluations = 0;
    let mut rel = MAX_REL_STEP;
    let mut spans = c.spans.clone();
    let mut fractions = c.fractions.clone();

    while rel >= MIN_REL_STEP {
        let h = rel * total;
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n {
                for j in 0..n {
                    if i == j || spans[j] <= 0.0 || h == 0.0 {
                        continue;
                    }
                    if evaluations >= budget {
                        return (evaluations, false);
                    }
                    let delta = h.min(spans[j]);
                    let (old_i, old_j) = (spans[i], spans[j]);
                    spans[i] = old_i + delta;
                    spans[j] = if delta == old_j { 0.0 } else { old_j - delta };
                    if i == n - 1 || j == n - 1 {
                        spans[n - 1] = (total - spans[..n - 1].iter().sum::<f64>()).max(0.0);
                    }
                    let v = objective.value(&spans, &fractions);
                    evaluations += 1;
                    if v > c.value {
                        c.value = v;
                        improved = true;
                    } else {
                        spans[i] = old_i;
                        spans[j] = old_j;
                    }
                }
            }
            for k in 0..fractions.len() {
                for dir in [1.0, -1.0] {
                    if evaluations >= budget {
                        return (evaluations, false);
                    }
                    let old = fractions[k];
                    let next = (old + dir * rel).clamp(0.0, 1.0);
                    if next == old {
                        continue;
                    }
                    fractions[k] = next;
                    let v = objective.value(&spans, &fractions);
                    evaluations += 1;
                    if v > c.value {
                        c.value = v;
                        improved = true;
                    } else {
                        fractions[k] = old;
                    }
                }
            }
            if improved {
                c.spans.clone_from(&spans);
                c.fractions.clone_from(&fractions);
            }
        }
        rel *= 0.5;
    }
    (evaluations, true)
}

fn starting_points(problem: &OptimizationProblem, settings: &OptimizerSettings) -> Vec<Candidate> {
    let n = problem.node_count;
    let total = problem.total_length_km;
    let free = problem.gain_mode == GainMode::Free;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let fixed_fractions = || if free { vec![0.5; n] } else { Vec::new() };

    let mut starts = Vec::with_capacity(settings.starts);
    for k in 0..settings.starts {
        let (spans, fractions) = match k {
            0 => (vec![total / (n + 1) as f64; n + 1], fixed_fractions()),
            1 => {
                let mut spans = vec![total / n as f64; n + 1];
                spans[n] = 0.0;
                (spans, fixed_fractions())
            }
            _ => {
                // uniform point on the simplex
                let weights: Vec<f64> = (0..=n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                let sum: f64 = weights.iter().sum();
                let spans = weights.iter().map(|w| total * w / sum).collect();
                let fractions = if free {
                    (0..n).map(|_| rng.gen::<f64>()).collect()
                } else {
                    Vec::new()
                };
                (spans, fractions)
            }
        };
        starts.push(Candidate {
            spans,
            fractions,
            value: f64::NEG_INFINITY,
        });
    }
    starts
}

/// Maximizes the problem's criterion with default settings.
pub fn optimize(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    optimize_with(problem, &OptimizerSettings::default())
}

pub fn optimize_with(problem: &OptimizationProblem, settings: &OptimizerSettings) -> Result<OptimizationResult> {
    problem.validate()?;
    let n = problem.node_count;
    let total = problem.total_length_km;
    let objective = Objective::new(problem);
    let free = problem.gain_mode == GainMode::Free;

    // The loss-only vertex is always a candidate.
    let mut loss_only_spans = vec![0.0; n + 1];
    loss_only_spans[n] = total;
    let loss_only_fractions = if free { vec![1.0; n] } else { Vec::new() };
    let mut best = Candidate {
        value: objective.value(&loss_only_spans, &loss_only_fractions),
        spans: loss_only_spans,
        fractions: loss_only_fractions,
    };
    let mut evaluations = 1;
    let mut converged = true;

    if n > 0 && total > 0.0 {
        let budget = settings.budget_factor.max(1) * (n + 1) * (n + 1);
        for start in starting_points(problem, settings) {
            let (candidate, evals, ok) = local_search(&objective, &start, total, budget);
            evaluations += evals;
            if compare(&candidate, &best) == Ordering::Greater {
                best = candidate;
                converged = ok;
            }
        }
    }

    let config = objective.config(&best.spans, &best.fractions);
    Ok(OptimizationResult::from_config(
        config,
        problem.criterion,
        converged,
        evaluations,
    ))
}
