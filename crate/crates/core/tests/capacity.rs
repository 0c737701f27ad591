mod common;

use linkcap::capacity::{asymptotic_gap, g_function, holevo_se, shannon_se, InputPower, NoisyChannel};
use proptest::prelude::*;

fn log_grid(lo_exp: i32, hi_exp: i32, per_decade: usize) -> Vec<f64> {
    let steps = (hi_exp - lo_exp) as usize * per_decade;
    (0..=steps)
        .map(|k| 10f64.powf(lo_exp as f64 + k as f64 / per_decade as f64))
        .collect()
}

#[test]
fn oracle_reproduces_frozen_values() {
    // values frozen from the extended-precision oracle
    assert!((common::g_extended(100.0) - 8.093_740_8).abs() < 1e-6);
    assert!((common::g_extended(1.0) - 2.0).abs() < 1e-15);
    assert!((common::log2_extended(101.0) - 6.658_211_5).abs() < 1e-6);
    assert!((common::log2_extended(26.0) - 4.700_439_7).abs() < 1e-6);
}

#[test]
fn g_matches_extended_precision() {
    let mut worst = 0.0f64;
    for x in log_grid(-12, 12, 20) {
        let exact = common::g_extended(x);
        let got = g_function(x).unwrap();
        let rel = ((got - exact) / exact).abs();
        worst = worst.max(rel);
        assert!(rel < 1e-12, "x = {x:e}: got {got}, oracle {exact}, rel {rel:e}");
    }
    println!("worst relative error of g on [1e-12, 1e12]: {worst:e}");
    assert!((g_function(100.0).unwrap() - common::g_extended(100.0)).abs() < 1e-13);
}

#[test]
fn g_is_increasing_and_concave() {
    let xs = log_grid(-6, 6, 40);
    let gs: Vec<f64> = xs.iter().map(|&x| g_function(x).unwrap()).collect();
    for w in gs.windows(2) {
        assert!(w[1] > w[0]);
    }
    // concavity via chord slopes on the non-uniform grid
    for i in 1..xs.len() - 1 {
        let left = (gs[i] - gs[i - 1]) / (xs[i] - xs[i - 1]);
        let right = (gs[i + 1] - gs[i]) / (xs[i + 1] - xs[i]);
        assert!(right < left, "not concave near x = {}", xs[i]);
    }
}

#[test]
fn gap_examples() {
    let ch = NoisyChannel::identity();
    let p = InputPower::new(100.0).unwrap();
    let gap = holevo_se(ch, p) - shannon_se(ch, p);
    let oracle = common::g_extended(100.0) - common::log2_extended(101.0);
    assert!((gap - oracle).abs() < 1e-12);
    assert!((gap - 1.4355).abs() < 1e-3);

    let big = InputPower::new(1e6).unwrap();
    let gap = holevo_se(ch, big) - shannon_se(ch, big);
    assert!((gap - asymptotic_gap()).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn holevo_dominates_shannon(tau in 0.0f64..=1.0, nu in 0.0f64..1e4, n_bar in 1e-3f64..1e6) {
        let ch = NoisyChannel::new(tau, nu).unwrap();
        let p = InputPower::new(n_bar).unwrap();
        let h = holevo_se(ch, p);
        let s = shannon_se(ch, p);
        prop_assert!(h >= s - 1e-12 * s.max(1.0), "holevo {} < shannon {}", h, s);
        prop_assert!(s >= 0.0);
    }
}

proptest! {
    #[test]
    fn monotone_in_transmittance(a in 0.0f64..=1.0, b in 0.0f64..=1.0, nu in 0.0f64..100.0, n_bar in 0.1f64..1e3) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let p = InputPower::new(n_bar).unwrap();
        let c_lo = NoisyChannel::new(lo, nu).unwrap();
        let c_hi = NoisyChannel::new(hi, nu).unwrap();
        prop_assert!(shannon_se(c_hi, p) >= shannon_se(c_lo, p));
        prop_assert!(holevo_se(c_hi, p) >= holevo_se(c_lo, p) - 1e-13);
    }
}

#[test]
fn zero_transmittance_carries_nothing() {
    let p = InputPower::new(50.0).unwrap();
    for nu in [0.0, 0.5, 10.0] {
        let ch = NoisyChannel::new(0.0, nu).unwrap();
        assert_eq!(shannon_se(ch, p), 0.0);
        assert_eq!(holevo_se(ch, p), 0.0);
    }
}
