//! One-dimensional maximization helpers.

/// `1 / phi`, the golden-section shrink factor.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum1d {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`.
pub fn golden_section_max(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Maximum1d {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;

    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        evaluations += 1;
    }

    let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Maximum1d {
        x,
        value,
        evaluations,
    }
}

/// Coarse scan over `intervals + 1` evenly spaced points, then golden-section
/// refinement inside the bracket around the best sample. The endpoints are
/// always candidates, so maxima sitting on the boundary are returned exactly.
///
/// On near-ties (within `1e-12`) the larger abscissa wins.
pub fn bracketed_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, intervals: usize, tol: f64) -> Maximum1d {
    if hi <= lo {
        return Maximum1d {
            x: lo,
            value: f(lo),
            evaluations: 1,
        };
    }
    let intervals = intervals.max(2);
    let width = (hi - lo) / intervals as f64;
    let at = |k: usize| if k == intervals { hi } else { lo + k as f64 * width };

    let samples: Vec<(f64, f64)> = (0..=intervals).map(|k| (at(k), f(at(k)))).collect();
    let mut evaluations = samples.len();
    let mut best_k = 0;
    for (k, s) in samples.iter().enumerate() {
        if s.1 >= samples[best_k].1 - 1e-12 {
            best_k = k;
        }
    }
    let (mut best_x, mut best_value) = samples[best_k];

    let bracket_lo = at(best_k.saturating_sub(1));
    let bracket_hi = at((best_k + 1).min(intervals));
    let refined = golden_section_max(&mut f, bracket_lo, bracket_hi, tol);
    evaluations += refined.evaluations;
    if refined.value > best_value + 1e-12 {
        best_x = refined.x;
        best_value = refined.value;
    }

    Maximum1d {
        x: best_x,
        value: best_value,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let m = golden_section_max(|x| -(x - 1.3) * (x - 1.3), 0.0, 4.0, 1e-8);
        assert!((m.x - 1.3).abs() < 1e-7);
    }

    #[test]
    fn boundary_maximum_is_exact() {
        let m = bracketed_max(|x| -x, 0.0, 10.0, 16, 1e-6);
        assert_eq!(m.x, 0.0);
        let m = bracketed_max(|x| x, 0.0, 10.0, 16, 1e-6);
        assert_eq!(m.x, 10.0);
    }

    #[test]
    fn bimodal_picks_global_peak() {
        // narrow global peak near 8, broad local one near 2
        let f = |x: f64| (-(x - 2.0).powi(2)).exp() + 1.5 * (-(x - 8.0).powi(2) * 4.0).exp();
        let m = bracketed_max(f, 0.0, 10.0, 64, 1e-9);
        assert!((m.x - 8.0).abs() < 1e-4, "{m:?}");
    }
}
