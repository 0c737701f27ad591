//! Discrete amplifier chain.
//!
//! The link is a sequence of fiber spans, each followed by a quantum-limited
//! phase-insensitive amplifier, and a final unamplified tail span. A stage of
//! gain `G` after a span of length `L` maps the running channel as
//!
//! ```text
//! tau_i = G exp(-alpha L) tau_{i-1}
//! nu_i  = G exp(-alpha L) nu_{i-1} + G - 1
//! ```
//!
//! starting from `(tau_0, nu_0) = (1, 0)`. The tail only attenuates.
//! Attenuation `alpha` is kept in natural-log units (1/km) throughout;
//! decibels appear only in [`attenuation_db`].

use serde::{Deserialize, Serialize};

use crate::capacity::{Criterion, InputPower, NoisyChannel};
use crate::error::{check_at_least, Error, Result};

/// Default tolerance for the per-node power constraint, photon units.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// `10 / ln 10`: dB per neper of power attenuation.
const DB_PER_NEPER: f64 = 4.342_944_819_032_518;

/// One regeneration node: the span of fiber before it and its gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStage", deny_unknown_fields)]
pub struct AmplifierStage {
    pub(crate) span_km: f64,
    pub(crate) gain: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStage {
    span_km: f64,
    gain: f64,
}

impl TryFrom<RawStage> for AmplifierStage {
    type Error = Error;

    fn try_from(raw: RawStage) -> Result<Self> {
        Self::new(raw.span_km, raw.gain)
    }
}

impl AmplifierStage {
    pub fn new(span_km: f64, gain: f64) -> Result<Self> {
        let span_km = check_at_least("span_km", span_km, 0.0, "finite and >= 0")?;
        let gain = check_at_least("gain", gain, 1.0, "finite and >= 1")?;
        Ok(Self { span_km, gain })
    }

    pub fn span_km(&self) -> f64 {
        self.span_km
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }
}

/// A complete point-to-point link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLinkConfig")]
pub struct LinkConfig {
    alpha_per_km: f64,
    n_bar: InputPower,
    stages: Vec<AmplifierStage>,
    tail_span_km: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinkConfig {
    alpha_per_km: f64,
    n_bar: InputPower,
    #[serde(default)]
    stages: Vec<AmplifierStage>,
    tail_span_km: f64,
}

impl TryFrom<RawLinkConfig> for LinkConfig {
    type Error = Error;

    fn try_from(raw: RawLinkConfig) -> Result<Self> {
        Self::new(raw.alpha_per_km, raw.n_bar, raw.stages, raw.tail_span_km)
    }
}

impl LinkConfig {
    pub fn new(
        alpha_per_km: f64,
        n_bar: InputPower,
        stages: Vec<AmplifierStage>,
        tail_span_km: f64,
    ) -> Result<Self> {
        let alpha_per_km = check_alpha(alpha_per_km)?;
        let tail_span_km = check_at_least("tail_span_km", tail_span_km, 0.0, "finite and >= 0")?;
        Ok(Self {
            alpha_per_km,
            n_bar,
            stages,
            tail_span_km,
        })
    }

    /// Loss-only link of the given length (no amplifiers).
    pub fn loss_only(alpha_per_km: f64, n_bar: InputPower, length_km: f64) -> Result<Self> {
        Self::new(alpha_per_km, n_bar, Vec::new(), length_km)
    }

    pub fn alpha_per_km(&self) -> f64 {
        self.alpha_per_km
    }

    pub fn n_bar(&self) -> InputPower {
        self.n_bar
    }

    pub fn stages(&self) -> &[AmplifierStage] {
        &self.stages
    }

    pub fn tail_span_km(&self) -> f64 {
        self.tail_span_km
    }

    pub fn node_count(&self) -> usize {
        self.stages.len()
    }

    /// Sum of all spans including the tail.
    pub fn total_length_km(&self) -> f64 {
        self.stages.iter().map(|s| s.span_km).sum::<f64>() + self.tail_span_km
    }

    /// All span lengths `L_1..L_{N+1}`, tail last.
    pub fn spans_km(&self) -> Vec<f64> {
        self.stages
            .iter()
            .map(|s| s.span_km)
            .chain(std::iter::once(self.tail_span_km))
            .collect()
    }

    /// Cumulative position of each amplifier measured from the input.
    pub fn node_positions_km(&self) -> Vec<f64> {
        self.stages
            .iter()
            .scan(0.0, |pos, s| {
                *pos += s.span_km;
                Some(*pos)
            })
            .collect()
    }

    /// Channel right after each amplifier, `(tau_i, nu_i)` for `i = 1..N`.
    pub fn node_states(&self) -> Vec<NoisyChannel> {
        self.stages
            .iter()
            .scan(NoisyChannel::identity(), |ch, stage| {
                *ch = propagate_stage(*ch, stage, self.alpha_per_km);
                Some(*ch)
            })
            .collect()
    }

    pub fn spectral_efficiency(&self, criterion: Criterion) -> f64 {
        criterion.evaluate(end_to_end(self), self.n_bar)
    }
}

pub(crate) fn check_alpha(alpha_per_km: f64) -> Result<f64> {
    if alpha_per_km.is_finite() && alpha_per_km > 0.0 {
        Ok(alpha_per_km)
    } else {
        Err(Error::Domain {
            name: "alpha_per_km",
            value: alpha_per_km,
            requirement: "finite and > 0",
        })
    }
}

/// Pure-loss transmittance `exp(-alpha L)` of a span.
pub fn span_transmittance(length_km: f64, alpha_per_km: f64) -> f64 {
    (-alpha_per_km * length_km).exp()
}

/// Applies one span followed by its amplifier.
pub fn propagate_stage(ch: NoisyChannel, stage: &AmplifierStage, alpha_per_km: f64) -> NoisyChannel {
    let factor = stage.gain * span_transmittance(stage.span_km, alpha_per_km);
    NoisyChannel::from_parts(factor * ch.tau(), factor * ch.nu() + stage.gain - 1.0)
}

/// End-to-end channel of the link, tail attenuation included.
pub fn end_to_end(cfg: &LinkConfig) -> NoisyChannel {
    let last = cfg
        .stages
        .iter()
        .fold(NoisyChannel::identity(), |ch, stage| {
            propagate_stage(ch, stage, cfg.alpha_per_km)
        });
    last.attenuate(span_transmittance(cfg.tail_span_km, cfg.alpha_per_km))
}

/// Largest gain that brings the total PSD back up to exactly `n_bar`.
///
/// Solves `G (tau' n_bar + nu') + G - 1 = n_bar` for the channel just before
/// the amplifier.
pub fn saturating_gain(pre_amp: NoisyChannel, p: InputPower) -> Result<f64> {
    let power = pre_amp.total_power(p);
    if power > p.get() {
        return Err(Error::ConstraintViolation {
            power,
            cap: p.get(),
        });
    }
    Ok(saturating_gain_clamped(power, p))
}

/// Saturating gain from a pre-amplifier total power, floored at 1 so that
/// rounding just above the cap yields a pass-through amplifier.
pub(crate) fn saturating_gain_clamped(pre_power: f64, p: InputPower) -> f64 {
    ((1.0 + p.get()) / (1.0 + pre_power)).max(1.0)
}

/// Power margin `n_bar - (tau_i n_bar + nu_i)` after each amplifier.
///
/// Between nodes the total power only decays, so node outputs are the only
/// places where the cap can be exceeded.
pub fn check_power_constraint(cfg: &LinkConfig) -> Vec<f64> {
    let cap = cfg.n_bar.get();
    cfg.node_states()
        .iter()
        .map(|ch| cap - ch.total_power(cfg.n_bar))
        .collect()
}

/// True when every margin is at least `-tol`.
pub fn is_feasible(margins: &[f64], tol: f64) -> bool {
    margins.iter().all(|&m| m >= -tol)
}

/// Span attenuation in dB, `10 log10(exp(alpha L))`.
pub fn attenuation_db(length_km: f64, alpha_per_km: f64) -> f64 {
    DB_PER_NEPER * alpha_per_km * length_km
}

/// Inverse of [`attenuation_db`].
pub fn length_for_attenuation_km(db: f64, alpha_per_km: f64) -> f64 {
    db / (DB_PER_NEPER * alpha_per_km)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::E;

    use super::*;

    fn nb(n: f64) -> InputPower {
        InputPower::new(n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn stage_examples() {
        let id = NoisyChannel::identity();
        let out = propagate_stage(id, &AmplifierStage::new(0.0, 1.0).unwrap(), 0.05);
        assert_eq!((out.tau(), out.nu()), (1.0, 0.0));

        // alpha L = ln 2 with G = 2
        let span = std::f64::consts::LN_2 / 0.05;
        let out = propagate_stage(id, &AmplifierStage::new(span, 2.0).unwrap(), 0.05);
        assert!(close(out.tau(), 1.0, 1e-15) && close(out.nu(), 1.0, 1e-15));

        let out = propagate_stage(id, &AmplifierStage::new(20.0, 1.0).unwrap(), 0.05);
        assert!(close(out.tau(), 0.367_879_4, 1e-7));
        assert_eq!(out.nu(), 0.0);
    }

    #[test]
    fn end_to_end_examples() {
        let empty = LinkConfig::loss_only(0.05, nb(100.0), 0.0).unwrap();
        assert_eq!(end_to_end(&empty), NoisyChannel::identity());

        let lossy = LinkConfig::loss_only(0.05, nb(100.0), 20.0).unwrap();
        let ch = end_to_end(&lossy);
        assert!(close(ch.tau(), 0.367_879_4, 1e-7));
        assert_eq!(ch.nu(), 0.0);

        let one = LinkConfig::new(0.05, nb(100.0), vec![AmplifierStage::new(20.0, E).unwrap()], 0.0).unwrap();
        let ch = end_to_end(&one);
        assert!(close(ch.tau(), 1.0, 1e-15));
        assert!(close(ch.nu(), 1.718_281_8, 1e-7));
    }

    #[test]
    fn saturating_gain_examples() {
        let p = nb(100.0);
        assert_eq!(saturating_gain(NoisyChannel::identity(), p).unwrap(), 1.0);

        let pre = NoisyChannel::new(0.5, 0.0).unwrap();
        let g = saturating_gain(pre, p).unwrap();
        assert!(close(g, 101.0 / 51.0, 1e-15));
        assert!(close(g * pre.total_power(p) + g - 1.0, 100.0, 1e-12));

        let pre = NoisyChannel::new((-1.0f64).exp(), 0.0).unwrap();
        let g = saturating_gain(pre, p).unwrap();
        assert!(close(g, 101.0 / (100.0 * (-1.0f64).exp() + 1.0), 1e-14));
        assert!(close(g, 2.672_810_1, 1e-7));
        assert!(close(g * pre.total_power(p) + g - 1.0, 100.0, 1e-12));
    }

    #[test]
    fn saturating_gain_rejects_power_above_cap() {
        let pre = NoisyChannel::new(1.0, 0.5).unwrap();
        assert!(matches!(
            saturating_gain(pre, nb(100.0)),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn margins() {
        let p = nb(100.0);
        let lossy = LinkConfig::loss_only(0.05, p, 50.0).unwrap();
        assert!(check_power_constraint(&lossy).is_empty());

        let pre = NoisyChannel::identity().attenuate(span_transmittance(30.0, 0.05));
        let g = saturating_gain(pre, p).unwrap();
        let sat = LinkConfig::new(0.05, p, vec![AmplifierStage::new(30.0, g).unwrap()], 10.0).unwrap();
        let m = check_power_constraint(&sat);
        assert!(m[0].abs() < 1e-12);
        assert!(is_feasible(&m, FEASIBILITY_TOL));

        let over = LinkConfig::new(0.05, p, vec![AmplifierStage::new(30.0, 1.01 * g).unwrap()], 10.0).unwrap();
        let m = check_power_constraint(&over);
        assert!(m[0] < 0.0);
        assert!(!is_feasible(&m, FEASIBILITY_TOL));
    }

    #[test]
    fn attenuation_conversion() {
        assert_eq!(attenuation_db(0.0, 0.05), 0.0);
        assert!(close(attenuation_db(31.0, 0.05), 6.7316, 1e-4));
        assert!(close(attenuation_db(100.0, 0.05), 21.715, 1e-3));
        assert!(close(length_for_attenuation_km(attenuation_db(13.8, 0.05), 0.05), 13.8, 1e-12));
    }

    #[test]
    fn stage_and_config_validation() {
        assert!(AmplifierStage::new(-1.0, 2.0).is_err());
        assert!(AmplifierStage::new(1.0, 0.99).is_err());
        assert!(LinkConfig::loss_only(0.0, nb(1.0), 1.0).is_err());
        assert!(LinkConfig::loss_only(0.05, nb(1.0), -1.0).is_err());
    }

    #[test]
    fn positions_and_lengths() {
        let cfg = LinkConfig::new(
            0.05,
            nb(10.0),
            vec![AmplifierStage::new(10.0, 1.5).unwrap(), AmplifierStage::new(5.0, 1.2).unwrap()],
            2.5,
        )
        .unwrap();
        assert_eq!(cfg.node_positions_km(), vec![10.0, 15.0]);
        assert_eq!(cfg.spans_km(), vec![10.0, 5.0, 2.5]);
        assert_eq!(cfg.total_length_km(), 17.5);
    }
}
