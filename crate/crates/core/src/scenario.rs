//! Scenario and link documents.
//!
//! Both are TOML (or JSON when the file name ends in `.json`). A scenario has
//! three tables, and every key may equally be written as a flat dotted name
//! (`sweep.l_max_km = 1000`):
//!
//! ```toml
//! [link]
//! alpha_per_km = 0.05
//! n_bar = 100.0
//!
//! [sweep]
//! l_min_km = 0.0
//! l_max_km = 1000.0
//! l_step_km = 5.0
//! node_counts = [2, 4, 8, 16, 64]
//! criteria = ["shannon", "holevo"]
//! include_loss_only = true
//! include_distributed = true
//! seed = 0
//!
//! [optimizer]
//! starts = 8
//! budget_factor = 200
//! ```
//!
//! Missing keys take the values shown above.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::capacity::{Criterion, InputPower};
use crate::error::{Error, Result};
use crate::link::LinkConfig;
use crate::optimize::OptimizerSettings;
use crate::sweep::SweepSpec;

/// Attenuation of standard single-mode fiber at 1550 nm, 1/km.
pub const DEFAULT_ALPHA_PER_KM: f64 = 0.05;
/// Input PSD, photons/(s·Hz); about 12.8 uW/THz at 1550 nm.
pub const DEFAULT_N_BAR: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub alpha_per_km: f64,
    pub n_bar: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            alpha_per_km: DEFAULT_ALPHA_PER_KM,
            n_bar: DEFAULT_N_BAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub l_min_km: f64,
    pub l_max_km: f64,
    pub l_step_km: f64,
    pub node_counts: Vec<usize>,
    pub criteria: Vec<Criterion>,
    pub include_loss_only: bool,
    pub include_distributed: bool,
    pub seed: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            l_min_km: 0.0,
            l_max_km: 1000.0,
            l_step_km: 5.0,
            node_counts: vec![2, 4, 8, 16, 64],
            criteria: Criterion::ALL.to_vec(),
            include_loss_only: true,
            include_distributed: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub starts: usize,
    pub budget_factor: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerSettings::default();
        Self {
            starts: d.starts,
            budget_factor: d.budget_factor,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub link: LinkSection,
    pub sweep: SweepSection,
    pub optimizer: OptimizerSection,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        load_document(path)
    }

    /// Validated sweep description.
    pub fn to_spec(&self) -> Result<SweepSpec> {
        let spec = SweepSpec {
            l_min_km: self.sweep.l_min_km,
            l_max_km: self.sweep.l_max_km,
            l_step_km: self.sweep.l_step_km,
            node_counts: self.sweep.node_counts.clone(),
            alpha_per_km: self.link.alpha_per_km,
            n_bar: InputPower::new(self.link.n_bar)?,
            criteria: self.sweep.criteria.clone(),
            include_loss_only: self.sweep.include_loss_only,
            include_distributed: self.sweep.include_distributed,
            seed: self.sweep.seed,
            starts: self.optimizer.starts,
            budget_factor: self.optimizer.budget_factor,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Reads a [`LinkConfig`] document.
pub fn load_link_config(path: &Path) -> Result<LinkConfig> {
    load_document(path)
}

fn load_document<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    if is_json {
        parse_json(&text)
    } else {
        parse_toml(&text)
    }
    .map_err(|e| match e {
        Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string().trim_end().to_owned()))
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
}
