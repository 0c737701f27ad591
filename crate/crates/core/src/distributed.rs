//! Continuum limit of the amplifier chain.
//!
//! With gain density `gamma(l)` the running channel obeys
//!
//! ```text
//! d tau / dl = (gamma - alpha) tau
//! d nu  / dl = (gamma - alpha) nu + gamma
//! ```
//!
//! When the gain exactly compensates the power drop,
//! `gamma = alpha n_bar / (1 + n_bar)`, the solution is
//! `tau(l) = exp(-alpha l / (1 + n_bar))`, `nu(l) = n_bar (1 - tau(l))`.
//! Under the Holevo criterion it pays to switch the gain off for a final
//! section of length `L'`; [`optimal_termination`] finds it.

use crate::capacity::{Criterion, InputPower, NoisyChannel};
use crate::error::{check_at_least, Error, Result};
use crate::link::{check_alpha, span_transmittance};
use crate::search::bracketed_max;

/// Default integration step, km.
pub const DEFAULT_STEP_KM: f64 = 0.01;

/// Absolute position tolerance of the termination search, km.
pub const TERMINATION_TOL_KM: f64 = 1e-4;

/// Coarse scan resolution used to bracket the termination optimum.
const TERMINATION_SCAN_INTERVALS: usize = 128;

/// Gain density along the fiber, 1/km.
pub trait GainProfile {
    fn gain_density(&self, position_km: f64) -> f64;
}

impl<F: Fn(f64) -> f64> GainProfile for F {
    fn gain_density(&self, position_km: f64) -> f64 {
        self(position_km)
    }
}

/// Position-independent gain density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantGain(pub f64);

impl GainProfile for ConstantGain {
    fn gain_density(&self, _position_km: f64) -> f64 {
        self.0
    }
}

/// Channel parameters at a position along a distributed link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributedState {
    pub tau: f64,
    pub nu: f64,
    pub position_km: f64,
}

impl DistributedState {
    pub fn channel(&self) -> NoisyChannel {
        NoisyChannel::from_parts(self.tau, self.nu)
    }
}

/// Integrates from `(tau, nu) = (1, 0)` at `l = 0` to `l = length_km` with
/// fixed-step classical RK4. The last step is shortened to land exactly on
/// `length_km`.
pub fn ode_propagate(
    profile: &impl GainProfile,
    alpha_per_km: f64,
    length_km: f64,
    step_km: f64,
) -> Result<DistributedState> {
    check_alpha(alpha_per_km)?;
    check_at_least("length_km", length_km, 0.0, "finite and >= 0")?;
    if !(step_km.is_finite() && step_km > 0.0) {
        return Err(Error::Domain {
            name: "step_km",
            value: step_km,
            requirement: "finite and > 0",
        });
    }

    let gamma = |l: f64| -> Result<f64> {
        let g = profile.gain_density(l);
        if g.is_finite() && g >= 0.0 {
            Ok(g)
        } else {
            Err(Error::Integration {
                position_km: l,
                reason: format!("gain density {g} is not a finite non-negative number"),
            })
        }
    };
    let rhs = |l: f64, tau: f64, nu: f64| -> Result<(f64, f64)> {
        let g = gamma(l)?;
        Ok(((g - alpha_per_km) * tau, (g - alpha_per_km) * nu + g))
    };

    let steps = (length_km / step_km).ceil() as usize;
    let (mut tau, mut nu) = (1.0, 0.0);
    for k in 0..steps {
        let l = k as f64 * step_km;
        let h = if k + 1 == steps { length_km - l } else { step_km };
        let (k1t, k1n) = rhs(l, tau, nu)?;
        let (k2t, k2n) = rhs(l + 0.5 * h, tau + 0.5 * h * k1t, nu + 0.5 * h * k1n)?;
        let (k3t, k3n) = rhs(l + 0.5 * h, tau + 0.5 * h * k2t, nu + 0.5 * h * k2n)?;
        let (k4t, k4n) = rhs(l + h, tau + h * k3t, nu + h * k3n)?;
        tau += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        nu += h / 6.0 * (k1n + 2.0 * k2n + 2.0 * k3n + k4n);
        if !(tau.is_finite() && nu.is_finite()) {
            return Err(Error::Integration {
                position_km: l + h,
                reason: "state diverged".into(),
            });
        }
    }

    Ok(DistributedState {
        tau,
        nu,
        position_km: length_km,
    })
}

/// Gain density that holds the total PSD at `n_bar`.
pub fn constant_power_gain(alpha_per_km: f64, p: InputPower) -> ConstantGain {
    ConstantGain(alpha_per_km * p.get() / (1.0 + p.get()))
}

/// Closed-form state of the constant-power distributed link.
pub fn constant_power_solution(alpha_per_km: f64, p: InputPower, length_km: f64) -> DistributedState {
    let tau = (-alpha_per_km * length_km / (1.0 + p.get())).exp();
    DistributedState {
        tau,
        nu: p.get() * (1.0 - tau),
        position_km: length_km,
    }
}

/// Channel with distributed gain over `total - l_prime` followed by an
/// unamplified section of length `l_prime`.
pub fn terminated_channel(alpha_per_km: f64, p: InputPower, total_km: f64, l_prime_km: f64) -> NoisyChannel {
    let amplified = constant_power_solution(alpha_per_km, p, (total_km - l_prime_km).max(0.0));
    amplified
        .channel()
        .attenuate(span_transmittance(l_prime_km, alpha_per_km))
}

/// Best unamplified terminal section of a distributed link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination {
    /// Length of the unamplified final section, km.
    pub l_prime_km: f64,
    /// Spectral efficiency achieved, bits/(s·Hz).
    pub se: f64,
    pub evaluations: usize,
}

impl Termination {
    /// Position where distributed amplification stops, `L - L'`.
    pub fn termination_point_km(&self, total_km: f64) -> f64 {
        total_km - self.l_prime_km
    }
}

/// Maximizes the criterion over `L' in [0, L]`.
pub fn optimal_termination(
    alpha_per_km: f64,
    p: InputPower,
    total_length_km: f64,
    criterion: Criterion,
) -> Result<Termination> {
    check_alpha(alpha_per_km)?;
    check_at_least("total_length_km", total_length_km, 0.0, "finite and >= 0")?;
    let se = |l_prime: f64| criterion.evaluate(terminated_channel(alpha_per_km, p, total_length_km, l_prime), p);
    let best = bracketed_max(
        se,
        0.0,
        total_length_km,
        TERMINATION_SCAN_INTERVALS,
        TERMINATION_TOL_KM,
    );
    Ok(Termination {
        l_prime_km: best.x,
        se: best.value,
        evaluations: best.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::attenuation_db;

    fn nb(n: f64) -> InputPower {
        InputPower::new(n).unwrap()
    }

    #[test]
    fn pure_loss() {
        let s = ode_propagate(&ConstantGain(0.0), 0.05, 20.0, 0.01).unwrap();
        assert!((s.tau - (-1.0f64).exp()).abs() < 1e-9);
        assert_eq!(s.nu, 0.0);
        assert_eq!(s.position_km, 20.0);
    }

    #[test]
    fn transparent_link_grows_noise_linearly() {
        let s = ode_propagate(&ConstantGain(0.05), 0.05, 20.0, 0.01).unwrap();
        assert_eq!(s.tau, 1.0);
        assert!((s.nu - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_power_example() {
        let p = nb(100.0);
        let closed = constant_power_solution(0.05, p, 101.0);
        assert!((closed.tau - 0.951_229_4).abs() < 1e-7);
        assert!((closed.nu - 4.877_058).abs() < 1e-6);
        let ode = ode_propagate(&constant_power_gain(0.05, p), 0.05, 101.0, DEFAULT_STEP_KM).unwrap();
        assert!((ode.tau - closed.tau).abs() < 1e-8);
        assert!((ode.nu - closed.nu).abs() < 1e-6);

        let zero = constant_power_solution(0.05, p, 0.0);
        assert_eq!((zero.tau, zero.nu), (1.0, 0.0));
    }

    #[test]
    fn partial_last_step_lands_on_length() {
        let s = ode_propagate(&ConstantGain(0.0), 0.05, 1.05, 0.1).unwrap();
        assert_eq!(s.position_km, 1.05);
        assert!((s.tau - (-0.0525f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_profiles_and_steps() {
        let nan = |_l: f64| f64::NAN;
        assert!(matches!(
            ode_propagate(&nan, 0.05, 1.0, 0.1),
            Err(Error::Integration { .. })
        ));
        let negative = |l: f64| if l > 0.5 { -1.0 } else { 0.0 };
        assert!(ode_propagate(&negative, 0.05, 1.0, 0.1).is_err());
        assert!(ode_propagate(&ConstantGain(0.0), 0.05, 1.0, 0.0).is_err());
        assert!(ode_propagate(&ConstantGain(0.0), 0.05, -1.0, 0.1).is_err());
    }

    #[test]
    fn short_holevo_link_stays_unamplified() {
        let t = optimal_termination(0.05, nb(100.0), 25.0, Criterion::Holevo).unwrap();
        assert_eq!(t.l_prime_km, 25.0);
    }

    #[test]
    fn long_holevo_link_has_three_db_tail() {
        let t = optimal_termination(0.05, nb(100.0), 1000.0, Criterion::Holevo).unwrap();
        let db = attenuation_db(t.l_prime_km, 0.05);
        assert!((db - 3.0).abs() <= 0.5, "tail = {db} dB");
    }
}
