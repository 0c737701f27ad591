//! Distance and node-count sweeps and their CSV/JSON tables.
//!
//! Sweep CSV columns: `criterion,n_nodes,length_km,se_bits,tail_span_km,converged,evaluations`.
//! `n_nodes` is `0` for the loss-only link and `inf` for the distributed
//! model. Positions CSV columns: `length_km,pos_1,...,pos_N,distributed_termination_km`,
//! with an empty field where an amplifier is unused. Floats carry nine
//! significant digits.

use std::io::Write;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::capacity::{Criterion, InputPower};
use crate::distributed::optimal_termination;
use crate::error::{check_at_least, Error, Result};
use crate::link::check_alpha;
use crate::optimize::{optimize_with, OptimizationProblem, OptimizerSettings, MAX_NODES};

/// Gains within this of 1 mark an amplifier as unused.
const UNUSED_GAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub l_min_km: f64,
    pub l_max_km: f64,
    pub l_step_km: f64,
    pub node_counts: Vec<usize>,
    pub alpha_per_km: f64,
    pub n_bar: InputPower,
    pub criteria: Vec<Criterion>,
    pub include_loss_only: bool,
    pub include_distributed: bool,
    pub seed: u64,
    pub starts: usize,
    pub budget_factor: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha_per_km)?;
        check_at_least("l_min_km", self.l_min_km, 0.0, "finite and >= 0")?;
        check_at_least("l_max_km", self.l_max_km, self.l_min_km, "finite and >= l_min_km")?;
        if !(self.l_step_km.is_finite() && self.l_step_km > 0.0) {
            return Err(Error::Domain {
                name: "l_step_km",
                value: self.l_step_km,
                requirement: "finite and > 0",
            });
        }
        if self.node_counts.is_empty() && !self.include_loss_only {
            return Err(Error::InvalidConfig(
                "node_counts is empty and the loss-only curve is not requested".into(),
            ));
        }
        if let Some(&n) = self.node_counts.iter().find(|&&n| n > MAX_NODES) {
            return Err(Error::InvalidConfig(format!(
                "node count {n} exceeds the supported maximum {MAX_NODES}"
            )));
        }
        if self.criteria.is_empty() {
            return Err(Error::InvalidConfig("no criterion selected".into()));
        }
        if self.starts == 0 {
            return Err(Error::InvalidConfig("optimizer.starts must be at least 1".into()));
        }
        Ok(())
    }

    /// `l_min, l_min + step, ...` up to and including `l_max`.
    pub fn lengths(&self) -> Vec<f64> {
        let count = ((self.l_max_km - self.l_min_km) / self.l_step_km + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| (self.l_min_km + k as f64 * self.l_step_km).min(self.l_max_km))
            .collect()
    }

    pub fn settings(&self) -> OptimizerSettings {
        OptimizerSettings {
            starts: self.starts,
            seed: self.seed,
            budget_factor: self.budget_factor,
        }
    }

    /// Curves in output order: loss-only, amplified by ascending N, distributed.
    pub fn models(&self) -> Vec<Model> {
        let mut models = Vec::new();
        if self.include_loss_only || self.node_counts.contains(&0) {
            models.push(Model::LossOnly);
        }
        let mut counts: Vec<usize> = self.node_counts.iter().copied().filter(|&n| n > 0).collect();
        counts.sort_unstable();
        counts.dedup();
        models.extend(counts.into_iter().map(Model::Amplified));
        if self.include_distributed {
            models.push(Model::Distributed);
        }
        models
    }

    fn sorted_criteria(&self) -> Vec<Criterion> {
        let mut c = self.criteria.clone();
        c.sort();
        c.dedup();
        c
    }
}

/// Which curve a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Model {
    LossOnly,
    Amplified(usize),
    Distributed,
}

impl Model {
    pub fn n_nodes_label(&self) -> String {
        match self {
            Model::LossOnly => "0".into(),
            Model::Amplified(n) => n.to_string(),
            Model::Distributed => "inf".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub criterion: Criterion,
    pub model: Model,
    pub length_km: f64,
    pub se_bits: f64,
    pub tail_span_km: f64,
    pub converged: bool,
    pub evaluations: usize,
}

pub const SWEEP_HEADER: [&str; 7] = [
    "criterion",
    "n_nodes",
    "length_km",
    "se_bits",
    "tail_span_km",
    "converged",
    "evaluations",
];

fn evaluate_cell(spec: &SweepSpec, criterion: Criterion, model: Model, length_km: f64) -> Result<SweepRow> {
    let row = |se_bits, tail_span_km, converged, evaluations| SweepRow {
        criterion,
        model,
        length_km,
        se_bits,
        tail_span_km,
        converged,
        evaluations,
    };
    match model {
        Model::LossOnly => {
            let problem = OptimizationProblem::new(length_km, 0, spec.alpha_per_km, spec.n_bar, criterion)?;
            Ok(row(problem.loss_only_se(), length_km, true, 1))
        }
        Model::Amplified(n) => {
            let problem = OptimizationProblem::new(length_km, n, spec.alpha_per_km, spec.n_bar, criterion)?;
            let r = optimize_with(&problem, &spec.settings())?;
            Ok(row(r.se, r.tail_span_km(), r.converged, r.evaluations))
        }
        Model::Distributed => {
            let t = optimal_termination(spec.alpha_per_km, spec.n_bar, length_km, criterion)?;
            Ok(row(t.se, t.l_prime_km, true, t.evaluations))
        }
    }
}

/// Evaluates every (criterion, curve, length) cell. Cells run in parallel;
/// rows come back sorted by criterion, then curve, then length.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let lengths = spec.lengths();
    let cells: Vec<(Criterion, Model, f64)> = spec
        .sorted_criteria()
        .into_iter()
        .flat_map(|c| {
            let lengths = &lengths;
            spec.models()
                .into_iter()
                .flat_map(move |m| lengths.iter().map(move |&l| (c, m, l)))
        })
        .collect();
    cells
        .par_iter()
        .map(|&(c, m, l)| evaluate_cell(spec, c, m, l))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocationRow {
    pub length_km: f64,
    /// Cumulative amplifier positions; `None` for unused amplifiers.
    pub positions_km: Vec<Option<f64>>,
    pub distributed_termination_km: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocationTable {
    pub node_count: usize,
    pub criterion: Criterion,
    pub rows: Vec<LocationRow>,
}

impl LocationTable {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    pub fn header(&self) -> Vec<String> {
        std::iter::once("length_km".to_owned())
            .chain((1..=self.node_count).map(|i| format!("pos_{i}")))
            .chain(std::iter::once("distributed_termination_km".to_owned()))
            .collect()
    }
}

/// Optimal amplifier positions versus link length for a single node count.
///
/// Uses the sweep's criterion when exactly one is selected, Holevo otherwise.
pub fn run_locations(spec: &SweepSpec) -> Result<LocationTable> {
    spec.validate()?;
    let node_count = match spec.node_counts.as_slice() {
        [n] if *n > 0 => *n,
        _ => {
            return Err(Error::InvalidConfig(
                "locations needs exactly one positive node count".into(),
            ))
        }
    };
    let criterion = match spec.sorted_criteria().as_slice() {
        [c] => *c,
        _ => Criterion::Holevo,
    };
    let settings = spec.settings();
    let rows = spec
        .lengths()
        .par_iter()
        .map(|&length_km| -> Result<LocationRow> {
            let problem = OptimizationProblem::new(length_km, node_count, spec.alpha_per_km, spec.n_bar, criterion)?;
            let r = optimize_with(&problem, &settings)?;
            let positions_km = r
                .config
                .node_positions_km()
                .into_iter()
                .zip(r.config.stages())
                .map(|(pos, stage)| ((stage.gain() - 1.0).abs() > UNUSED_GAIN_TOL).then_some(pos))
                .collect();
            let t = optimal_termination(spec.alpha_per_km, spec.n_bar, length_km, criterion)?;
            Ok(LocationRow {
                length_km,
                positions_km,
                distributed_termination_km: t.termination_point_km(length_km),
                converged: r.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocationTable {
        node_count,
        criterion,
        rows,
    })
}

/// Formats like C's `%.9g`.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_owned()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn sweep_record(row: &SweepRow) -> [String; 7] {
    [
        row.criterion.to_string(),
        row.model.n_nodes_label(),
        format_sig9(row.length_km),
        format_sig9(row.se_bits),
        format_sig9(row.tail_span_km),
        row.converged.to_string(),
        row.evaluations.to_string(),
    ]
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(format!("cannot write output: {e}"))
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(csv_error)?;
    for row in rows {
        w.write_record(sweep_record(row)).map_err(csv_error)?;
    }
    w.flush().map_err(csv_error)
}

/// Parses a formatted float back so JSON carries the same digits as CSV.
fn json_number(v: f64) -> Value {
    let text = format_sig9(v);
    text.parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::String(text), Value::Number)
}

pub fn write_sweep_json<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    let array: Vec<Value> = rows
        .iter()
        .map(|row| {
            let n_nodes = match row.model {
                Model::LossOnly => json!(0),
                Model::Amplified(n) => json!(n),
                Model::Distributed => json!("inf"),
            };
            json!({
                "criterion": row.criterion.as_str(),
                "n_nodes": n_nodes,
                "length_km": json_number(row.length_km),
                "se_bits": json_number(row.se_bits),
                "tail_span_km": json_number(row.tail_span_km),
                "converged": row.converged,
                "evaluations": row.evaluations,
            })
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &array).map_err(csv_error)?;
    writeln!(out).map_err(csv_error)
}

pub fn write_locations_csv<W: Write>(table: &LocationTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.header()).map_err(csv_error)?;
    for row in &table.rows {
        let record: Vec<String> = std::iter::once(format_sig9(row.length_km))
            .chain(row.positions_km.iter().map(|p| p.map(format_sig9).unwrap_or_default()))
            .chain(std::iter::once(format_sig9(row.distributed_termination_km)))
            .collect();
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush().map_err(csv_error)
}

pub fn write_locations_json<W: Write>(table: &LocationTable, mut out: W) -> Result<()> {
    let array: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            obj.insert("length_km".into(), json_number(row.length_km));
            for (i, p) in row.positions_km.iter().enumerate() {
                obj.insert(format!("pos_{}", i + 1), p.map_or(Value::Null, json_number));
            }
            obj.insert(
                "distributed_termination_km".into(),
                json_number(row.distributed_termination_km),
            );
            Value::Object(obj)
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &array).map_err(csv_error)?;
    writeln!(out).map_err(csv_error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn sig9_matches_printf() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(8.093_740_813_7), "8.09374081");
        assert_eq!(format_sig9(1000.0), "1000");
        assert_eq!(format_sig9(5.0), "5");
        assert_eq!(format_sig9(0.1), "0.1");
        assert_eq!(format_sig9(1.234_567_890_12e-7), "1.23456789e-07");
        assert_eq!(format_sig9(123_456_789_012.0), "1.23456789e+11");
        assert_eq!(format_sig9(9.999_999_999_9), "10");
        assert_eq!(format_sig9(-2.5e-3), "-0.0025");
        assert_eq!(format_sig9(0.000_123_456_789_1), "0.000123456789");
    }

    fn spec() -> SweepSpec {
        Scenario::default().to_spec().unwrap()
    }

    #[test]
    fn lengths_include_endpoint() {
        let mut s = spec();
        s.l_min_km = 0.0;
        s.l_max_km = 1.0;
        s.l_step_km = 0.1;
        let l = s.lengths();
        assert_eq!(l.len(), 11);
        assert_eq!(*l.last().unwrap(), 1.0);
    }

    #[test]
    fn validation() {
        let mut s = spec();
        s.l_max_km = -1.0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.l_step_km = 0.0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.node_counts.clear();
        s.include_loss_only = false;
        assert!(s.validate().is_err());
        s.include_loss_only = true;
        assert!(s.validate().is_ok());
        let mut s = spec();
        s.node_counts = vec![65];
        assert!(s.validate().is_err());
    }

    #[test]
    fn model_order_and_labels() {
        let mut s = spec();
        s.node_counts = vec![4, 2, 4, 0];
        s.include_loss_only = false;
        assert_eq!(
            s.models(),
            vec![Model::LossOnly, Model::Amplified(2), Model::Amplified(4), Model::Distributed]
        );
        assert_eq!(Model::Distributed.n_nodes_label(), "inf");
    }

    #[test]
    fn locations_needs_single_count() {
        let mut s = spec();
        s.node_counts = vec![2, 4];
        assert!(run_locations(&s).is_err());
    }
}
