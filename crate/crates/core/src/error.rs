use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({requirement})")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("pre-amplifier power {power} exceeds the cap {cap}")]
    ConstraintViolation { power: f64, cap: f64 },

    #[error("integration failed at l = {position_km} km: {reason}")]
    Integration { position_km: f64, reason: String },

    #[error("brute-force grid refuses {nodes} nodes (at most {max})")]
    GridTooLarge { nodes: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Rejects NaN/inf and values below `min` (inclusive bound).
pub(crate) fn check_at_least(name: &'static str, value: f64, min: f64, requirement: &'static str) -> Result<f64> {
    if value.is_finite() && value >= min {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            requirement,
        })
    }
}
