//! Spectral-efficiency limits of a phase-insensitive Gaussian channel.
//!
//! A channel is summarised by its power transmittance `tau` and the excess
//! noise `nu` it has picked up, both in photon-number units per unit
//! bandwidth. Given the input power spectral density `n_bar`:
//!
//! * the Shannon limit for shot-noise-limited coherent detection is
//!   `log2(1 + tau * n_bar / (1 + nu))`,
//! * the Holevo limit over all receivers is `g(tau * n_bar + nu) - g(nu)`
//!   with `g(x) = log2(1 + x) + x * log2(1 + 1/x)`.
//!
//! All logarithms are taken in base e and rescaled once by `1 / ln 2`.

use std::f64::consts::{LN_2, LOG2_E};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_at_least, Error, Result};

/// End-to-end (or partial) channel: transmittance and excess noise PSD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyChannel {
    tau: f64,
    nu: f64,
}

impl NoisyChannel {
    pub fn new(tau: f64, nu: f64) -> Result<Self> {
        let tau = check_at_least("tau", tau, 0.0, "finite and >= 0")?;
        let nu = check_at_least("nu", nu, 0.0, "finite and >= 0")?;
        Ok(Self { tau, nu })
    }

    /// The identity channel (tau = 1, nu = 0).
    pub const fn identity() -> Self {
        Self { tau: 1.0, nu: 0.0 }
    }

    /// Internal constructor for values produced by the propagation formulas,
    /// which preserve non-negativity on their own.
    pub(crate) const fn from_parts(tau: f64, nu: f64) -> Self {
        Self { tau, nu }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Total output PSD `tau * n_bar + nu` for the given input.
    pub fn total_power(&self, p: InputPower) -> f64 {
        self.tau * p.get() + self.nu
    }

    /// Multiplies both signal and noise by a pure-loss factor.
    pub fn attenuate(&self, transmittance: f64) -> Self {
        Self::from_parts(self.tau * transmittance, self.nu * transmittance)
    }
}

/// Input signal power spectral density, photons/(s·Hz). Always > 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct InputPower(f64);

impl InputPower {
    pub fn new(n_bar: f64) -> Result<Self> {
        if n_bar.is_finite() && n_bar > 0.0 {
            Ok(Self(n_bar))
        } else {
            Err(Error::Domain {
                name: "n_bar",
                value: n_bar,
                requirement: "finite and > 0",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for InputPower {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<InputPower> for f64 {
    fn from(p: InputPower) -> f64 {
        p.0
    }
}

/// Which capacity expression is used as the figure of merit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Shannon,
    Holevo,
}

impl Criterion {
    pub const ALL: [Criterion; 2] = [Criterion::Shannon, Criterion::Holevo];

    pub fn evaluate(self, ch: NoisyChannel, p: InputPower) -> f64 {
        match self {
            Criterion::Shannon => shannon_se(ch, p),
            Criterion::Holevo => holevo_se(ch, p),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Shannon => "shannon",
            Criterion::Holevo => "holevo",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "shannon" => Ok(Criterion::Shannon),
            "holevo" => Ok(Criterion::Holevo),
            other => Err(Error::InvalidConfig(format!(
                "unknown criterion `{other}` (expected shannon or holevo)"
            ))),
        }
    }
}

/// Bosonic entropy function `g(x) = log2(1+x) + x log2(1 + 1/x)`, in bits.
///
/// `g(0) = 0`. Negative or non-finite arguments are rejected.
pub fn g_function(x: f64) -> Result<f64> {
    check_at_least("x", x, 0.0, "finite and >= 0")?;
    Ok(g_unchecked(x))
}

/// `g` without argument validation; callers guarantee `x >= 0`.
pub(crate) fn g_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let first = x.ln_1p();
    // x ln(1 + 1/x): log1p of the small reciprocal for large x, and the
    // difference of logs for small x where 1/x would overflow precision.
    let second = if x >= 1.0 {
        x * (1.0 / x).ln_1p()
    } else {
        x * (x.ln_1p() - x.ln())
    };
    (first + second) / LN_2
}

/// Shannon spectral efficiency `log2(1 + tau n_bar / (1 + nu))`.
pub fn shannon_se(ch: NoisyChannel, p: InputPower) -> f64 {
    let snr = ch.tau * p.get() / (1.0 + ch.nu);
    snr.ln_1p() / LN_2
}

/// Holevo spectral efficiency `g(tau n_bar + nu) - g(nu)`.
pub fn holevo_se(ch: NoisyChannel, p: InputPower) -> f64 {
    let se = g_unchecked(ch.tau * p.get() + ch.nu) - g_unchecked(ch.nu);
    // g is increasing, so the exact value is >= 0; clamp rounding residue.
    se.max(0.0)
}

/// Limit of the Holevo-Shannon gap for a loss-only channel as `tau n_bar -> inf`:
/// `log2(e)`.
pub fn asymptotic_gap() -> f64 {
    LOG2_E
}
