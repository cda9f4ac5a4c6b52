// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Bounded Nelder-Mead simplex minimization.

use super::space::Interval;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmOptions {
    pub max_iter: usize,
    /// Stop once every vertex lies within this fraction of each interval
    /// width from the best vertex.
    pub xtol: f64,
    /// Initial simplex edge as a fraction of each interval width.
    pub initial_step: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            xtol: 1e-3,
            initial_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `objective` from `x0`. Every point is clamped into `bounds`
/// before it is evaluated.
pub fn nelder_mead<F>(mut objective: F, x0: &[f64], bounds: &[Interval], opts: &NmOptions) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n >= 1 && bounds.len() == n, "dimension mismatch");
    let clamp = |x: Vec<f64>| -> Vec<f64> { x.iter().zip(bounds).map(|(v, b)| b.clamp(*v)).collect() };
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let start = clamp(x0.to_vec());
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(&start);
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut x = start.clone();
        let step = opts.initial_step * bounds[i].width();
        // step toward the interior when the start sits on the upper bound
        x[i] = if x[i] + step <= bounds[i].hi { x[i] + step } else { x[i] - step };
        if step == 0.0 {
            x[i] = start[i];
        }
        let f = eval(&x);
        simplex.push((x, f));
    }

    let mut iterations = 0;
    while iterations < opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if diameter(&simplex, bounds) < opts.xtol {
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            clamp(centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect())
        };

        let xr = along(REFLECT);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(REFLECT * EXPAND);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        // contraction, outside when the reflection beat the worst vertex
        let (xc, fc) = if fr < worst.1 {
            let xc = along(REFLECT * CONTRACT);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let x = clamp(best.iter().zip(&v.0).map(|(b, x)| b + SHRINK * (x - b)).collect());
            let f = eval(&x);
            *v = (x, f);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NmResult {
        x,
        value,
        iterations,
        evaluations,
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)], bounds: &[Interval]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(x, _)| {
            x.iter().zip(best).zip(bounds).map(|((a, b), iv)| {
                let w = iv.width();
                if w > 0.0 {
                    (a - b).abs() / w
                } else {
                    0.0
                }
            })
        })
        .fold(0.0, f64::max)
}
