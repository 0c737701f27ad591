//! Capacity limits of multi-span optical links with quantum-limited
//! phase-insensitive amplification.
//!
//! * [`capacity`]: Shannon and Holevo spectral efficiency of a lossy, noisy
//!   Gaussian channel.
//! * [`link`]: discrete amplifier chains and the total-power constraint.
//! * [`distributed`]: the continuum (distributed gain) model.
//! * [`optimize`]: placement and gain optimization, with a grid oracle.
//! * [`sweep`]: distance and node-count sweeps with CSV/JSON output.

pub mod capacity;
pub mod distributed;
pub mod error;
pub mod link;
pub mod optimize;
pub mod scenario;
pub mod search;
pub mod sweep;

pub use capacity::{asymptotic_gap, g_function, holevo_se, shannon_se, Criterion, InputPower, NoisyChannel};
pub use error::{Error, Result};
pub use link::{AmplifierStage, LinkConfig};
pub use optimize::{optimize, optimize_with, GainMode, OptimizationProblem, OptimizationResult, OptimizerSettings};
