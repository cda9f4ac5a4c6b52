// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Tree-structured Parzen estimator for maximizing a noisy score.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::space::{Interval, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpeConfig {
    pub n_startup: usize,
    pub gamma: f64,
    pub candidates: usize,
}

impl Default for TpeConfig {
    fn default() -> Self {
        Self {
            n_startup: 10,
            gamma: 0.25,
            candidates: 24,
        }
    }
}

/// Observed point and its score (higher is better).
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<'a> {
    pub x: &'a [f64],
    pub score: f64,
}

// One-dimensional mixture of truncated Gaussians plus a uniform prior.
struct Parzen {
    bounds: Interval,
    centres: Vec<f64>,
    sigma: f64,
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / SQRT_2))
}

impl Parzen {
    fn new(bounds: Interval, centres: Vec<f64>) -> Self {
        let w = bounds.width().max(1e-12);
        let sigma = w / ((centres.len().max(1)) as f64).sqrt();
        Self { bounds, centres, sigma }
    }

    fn components(&self) -> usize {
        self.centres.len() + 1
    }

    fn density(&self, x: f64) -> f64 {
        let w = self.bounds.width().max(1e-12);
        let mut total = 1.0 / w;
        for &c in &self.centres {
            let mass = normal_cdf((self.bounds.hi - c) / self.sigma) - normal_cdf((self.bounds.lo - c) / self.sigma);
            let z = (x - c) / self.sigma;
            total += (-0.5 * z * z).exp() / (self.sigma * (2.0 * PI).sqrt()) / mass.max(1e-300);
        }
        total / self.components() as f64
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        let k = rng.gen_range(0..self.components());
        if k == self.centres.len() || self.bounds.width() == 0.0 {
            return self.bounds.lo + self.bounds.width() * rng.gen::<f64>();
        }
        let c = self.centres[k];
        // inverse-CDF sampling restricted to the interval
        let a = normal_cdf((self.bounds.lo - c) / self.sigma);
        let b = normal_cdf((self.bounds.hi - c) / self.sigma);
        let u = a + (b - a) * rng.gen::<f64>();
        let x = c + self.sigma * inverse_normal_cdf(u);
        self.bounds.clamp(x)
    }
}

// Acklam's rational approximation refined by one Newton step.
fn inverse_normal_cdf(p: f64) -> f64 {
    let p = p.clamp(1e-300, 1.0 - 1e-16);
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383_577_518_672_69e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let lower = 0.02425;
    let x = if p < lower {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - lower {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let err = normal_cdf(x) - p;
    let pdf = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    if pdf > 0.0 {
        x - err / pdf
    } else {
        x
    }
}

const MAX_REJECTIONS: usize = 1000;

/// Next point to evaluate given the scored history.
pub fn tpe_suggest(history: &[Observation<'_>], space: &SearchSpace, cfg: &TpeConfig, rng: &mut impl Rng) -> Vec<f64> {
    if history.len() < cfg.n_startup {
        return space.sample_uniform(rng);
    }
    let mut order: Vec<usize> = (0..history.len()).collect();
    // best first; earlier trials win ties
    order.sort_by(|&a, &b| history[b].score.total_cmp(&history[a].score).then(a.cmp(&b)));
    let n_good = ((cfg.gamma * history.len() as f64).ceil() as usize).clamp(1, history.len());
    let (good, bad) = order.split_at(n_good);

    let models = |set: &[usize]| -> Vec<Parzen> {
        space
            .bounds
            .iter()
            .enumerate()
            .map(|(d, b)| Parzen::new(*b, set.iter().map(|&i| history[i].x[d]).collect()))
            .collect()
    };
    let l = models(good);
    let g = models(bad);
    let log_ratio = |x: &[f64]| -> f64 {
        x.iter()
            .enumerate()
            .map(|(d, v)| l[d].density(*v).ln() - g[d].density(*v).ln())
            .sum()
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..cfg.candidates.max(1) {
        let mut candidate = None;
        for _ in 0..MAX_REJECTIONS {
            let x: Vec<f64> = l.iter().map(|m| m.sample(rng)).collect();
            if space.is_feasible(&x) {
                candidate = Some(x);
                break;
            }
        }
        let x = candidate.unwrap_or_else(|| space.sample_uniform(rng));
        let r = log_ratio(&x);
        if best.as_ref().is_none_or(|(_, b)| r > *b) {
            best = Some((x, r));
        }
    }
    best.expect("at least one candidate").0
}
