//! Nelder-Mead downhill simplex with dimension-adaptive coefficients and
//! restarts around the incumbent.

#[derive(Debug, Clone)]
pub(crate) struct NmOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NmOptions {
    pub max_evals: usize,
    /// Spread of function values across the simplex below which a run ends.
    pub ftol: f64,
    /// A restart must improve the incumbent by more than this to continue.
    pub restart_gain: f64,
    pub max_restarts: usize,
}

/// Minimizes `f` starting from `x0`.
pub(crate) fn minimize(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: NmOptions) -> NmOutcome {
    let mut evaluations = 0;
    let mut best_x = x0.to_vec();
    let mut best_value = f(&best_x);
    evaluations += 1;

    let mut restarts = 0;
    loop {
        let remaining = opts.max_evals.saturating_sub(evaluations);
        if remaining == 0 {
            return NmOutcome {
                x: best_x,
                value: best_value,
                evaluations,
                converged: false,
            };
        }
        let run = single_run(&mut f, &best_x, best_value, remaining, opts.ftol);
        evaluations += run.evaluations;
        let improvement = best_value - run.value;
        if run.value < best_value {
            best_x = run.x;
            best_value = run.value;
        }
        if !run.converged {
            return NmOutcome {
                x: best_x,
                value: best_value,
                evaluations,
                converged: false,
            };
        }
        restarts += 1;
        if improvement <= opts.restart_gain || restarts > opts.max_restarts {
            return NmOutcome {
                x: best_x,
                value: best_value,
                evaluations,
                converged: true,
            };
        }
    }
}

fn initial_simplex(x0: &[f64]) -> Vec<Vec<f64>> {
    let n = x0.len();
    let rms = (x0.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let scale = if rms > 0.0 { rms } else { 1.0 };
    let mut simplex = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if x0[i].abs() > 1e-3 * scale {
            0.1 * x0[i]
        } else {
            0.1 * scale
        };
        simplex.push(v);
    }
    simplex
}

fn single_run(
    f: &mut impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    f0: f64,
    max_evals: usize,
    ftol: f64,
) -> NmOutcome {
    let n = x0.len();
    let nf = n as f64;
    // Gao & Han adaptive coefficients.
    let reflect = 1.0;
    let expand = 1.0 + 2.0 / nf;
    let contract = 0.75 - 1.0 / (2.0 * nf);
    let shrink = 1.0 - 1.0 / nf;

    let mut evaluations = 0;
    let mut simplex = initial_simplex(x0);
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    values.push(f0);
    for v in simplex.iter().skip(1) {
        values.push(f(v));
        evaluations += 1;
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    let converged = loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        if values[worst] - values[best] <= ftol {
            break true;
        }
        if evaluations >= max_evals {
            break false;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / nf;
            }
        }

        let along = |coef: f64, out: &mut Vec<f64>, worst_x: &[f64]| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(worst_x) {
                *o = c + coef * (c - w);
            }
        };

        along(reflect, &mut trial, &simplex[worst]);
        let f_reflect = f(&trial);
        evaluations += 1;

        if f_reflect < values[best] {
            along(expand, &mut trial2, &simplex[worst]);
            let f_expand = f(&trial2);
            evaluations += 1;
            if f_expand < f_reflect {
                simplex[worst].copy_from_slice(&trial2);
                values[worst] = f_expand;
            } else {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < values[second_worst] {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_reflect;
            continue;
        }

        let outside = f_reflect < values[worst];
        let coef = if outside { contract } else { -contract };
        along(coef, &mut trial2, &simplex[worst]);
        let f_contract = f(&trial2);
        evaluations += 1;
        let accept = if outside {
            f_contract <= f_reflect
        } else {
            f_contract < values[worst]
        };
        if accept {
            simplex[worst].copy_from_slice(&trial2);
            values[worst] = f_contract;
            continue;
        }

        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            for (v, a) in simplex[i].iter_mut().zip(&anchor) {
                *v = a + shrink * (*v - a);
            }
            values[i] = f(&simplex[i]);
            evaluations += 1;
        }
    };

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .unwrap_or(0);
    NmOutcome {
        x: simplex[best].clone(),
        value: values[best],
        evaluations,
        converged,
    }
}
