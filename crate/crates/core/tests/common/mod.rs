//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const PREC: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

fn to_f64(x: &BigFloat, cc: &mut Consts) -> f64 {
    let text = x.format(Radix::Dec, RM, cc).expect("decimal formatting");
    text.parse().unwrap_or_else(|_| panic!("unparseable oracle output {text}"))
}

/// `g(x) = log2(1+x) + x log2(1 + 1/x)` evaluated with 320-bit arithmetic.
pub fn g_extended(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut cc = Consts::new().expect("constants cache");
    let one = BigFloat::from_f64(1.0, PREC);
    let bx = BigFloat::from_f64(x, PREC);
    let first = bx.add(&one, PREC, RM).log2(PREC, RM, &mut cc);
    let inv = one.div(&bx, PREC, RM);
    let second = bx.mul(&inv.add(&one, PREC, RM).log2(PREC, RM, &mut cc), PREC, RM);
    to_f64(&first.add(&second, PREC, RM), &mut cc)
}

/// `log2(v)` with 320-bit arithmetic.
pub fn log2_extended(v: f64) -> f64 {
    let mut cc = Consts::new().expect("constants cache");
    to_f64(&BigFloat::from_f64(v, PREC).log2(PREC, RM, &mut cc), &mut cc)
}

/// Unrolled product form of the amplifier-chain recursion:
/// `tau = T_tail prod_i G_i T_i`,
/// `nu  = T_tail sum_i (G_i - 1) prod_{j > i} G_j T_j`.
pub fn chain_product_form(alpha: f64, stages: &[(f64, f64)], tail: f64) -> (f64, f64) {
    let t = |l: f64| (-alpha * l).exp();
    let tau: f64 = stages.iter().map(|&(l, g)| g * t(l)).product::<f64>() * t(tail);
    let nu: f64 = (0..stages.len())
        .map(|i| {
            let downstream: f64 = stages[i + 1..].iter().map(|&(l, g)| g * t(l)).product();
            (stages[i].1 - 1.0) * downstream
        })
        .sum::<f64>()
        * t(tail);
    (tau, nu)
}

fn g_plain(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (1.0 + x).log2() + x * (1.0 + 1.0 / x).log2()
    }
}

/// Spectral efficiency of `n` equal spans of `(total - tail) / n` followed by
/// a tail, all gains saturating, written out in closed form: every saturating
/// stage of span `s` multiplies the signal fraction by
/// `(1 + n_bar) e^{-alpha s} / (1 + n_bar e^{-alpha s})` and keeps the total
/// power at `n_bar`.
pub fn equal_spacing_se(alpha: f64, n_bar: f64, n: usize, total: f64, tail: f64, holevo: bool) -> f64 {
    let s = (total - tail) / n as f64;
    let e = (-alpha * s).exp();
    let frac = ((1.0 + n_bar) * e / (1.0 + n_bar * e)).powi(n as i32);
    let et = (-alpha * tail).exp();
    let tau = et * frac;
    let nu = et * n_bar * (1.0 - frac);
    if holevo {
        g_plain(tau * n_bar + nu) - g_plain(nu)
    } else {
        (1.0 + tau * n_bar / (1.0 + nu)).log2()
    }
}

/// Dense scan of the tail length for the equal-spacing reduction; returns
/// `(tail, se)` at the grid maximum.
pub fn equal_spacing_scan(alpha: f64, n_bar: f64, n: usize, total: f64, points: usize, holevo: bool) -> (f64, f64) {
    (0..=points)
        .map(|k| {
            let tail = total * k as f64 / points as f64;
            (tail, equal_spacing_se(alpha, n_bar, n, total, tail, holevo))
        })
        .fold((0.0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}

/// Distributed-model SE with terminal section `l_prime`, written directly
/// from the closed-form constant-power solution.
pub fn distributed_se(alpha: f64, n_bar: f64, total: f64, l_prime: f64, holevo: bool) -> f64 {
    let tau_amp = (-alpha * (total - l_prime) / (1.0 + n_bar)).exp();
    let nu_amp = n_bar * (1.0 - tau_amp);
    let t = (-alpha * l_prime).exp();
    let (tau, nu) = (t * tau_amp, t * nu_amp);
    if holevo {
        g_plain(tau * n_bar + nu) - g_plain(nu)
    } else {
        (1.0 + tau * n_bar / (1.0 + nu)).log2()
    }
}
