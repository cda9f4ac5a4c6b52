// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Histogram quality measures.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{brute_force_mwis, is_independent, mis_size, VertexSubset, WeightedGraph};
use crate::simulator::Histogram;

/// Concentration below which a histogram scores zero.
pub const GINI_THRESHOLD: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    /// `None` disables nullification. With the default threshold a run that
    /// returns one outcome every shot scores zero, even when that outcome is
    /// the optimum.
    pub gini_threshold: Option<f64>,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            gini_threshold: Some(GINI_THRESHOLD),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    /// Shot-averaged `popcount/N` over independent outcomes.
    pub mean_f: f64,
    /// `1 − Σ p²` over distinct outcomes.
    pub gini: f64,
    pub score: f64,
    pub nullified: bool,
}

fn check_lengths(h: &Histogram, g: &WeightedGraph) -> Result<()> {
    for bits in h.counts().keys() {
        if bits.len() != g.len() {
            return Err(Error::LengthMismatch {
                expected: g.len(),
                got: bits.len(),
            });
        }
    }
    Ok(())
}

pub fn score(h: &Histogram, g: &WeightedGraph) -> Result<ScoreBreakdown> {
    score_with(h, g, &ScoreConfig::default())
}

pub fn score_with(h: &Histogram, g: &WeightedGraph, cfg: &ScoreConfig) -> Result<ScoreBreakdown> {
    check_lengths(h, g)?;
    let shots = h.shots();
    if shots == 0 {
        return Ok(ScoreBreakdown {
            mean_f: 0.0,
            gini: 0.0,
            score: 0.0,
            nullified: cfg.gini_threshold.is_some(),
        });
    }
    let n = g.len() as f64;
    let total = shots as f64;
    let mut mean_f = 0.0;
    let mut concentration = 0.0;
    for (bits, &count) in h.counts() {
        let set = VertexSubset::from_bitstring(bits)?;
        if is_independent(&set, g)? {
            mean_f += count as f64 * set.count() as f64 / n;
        }
        let p = count as f64 / total;
        concentration += p * p;
    }
    mean_f /= total;
    let gini = 1.0 - concentration;
    let nullified = cfg.gini_threshold.is_some_and(|t| gini < t);
    Ok(ScoreBreakdown {
        mean_f,
        gini,
        score: if nullified { 0.0 } else { mean_f * gini },
        nullified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessReport {
    /// Fraction of shots that are a maximum-weight independent set.
    pub probability: f64,
    /// Score divided by `|MIS| / N`.
    pub normalized_score: f64,
}

pub fn success_probability(h: &Histogram, g: &WeightedGraph) -> Result<SuccessReport> {
    success_with(h, g, &ScoreConfig::default())
}

pub fn success_with(h: &Histogram, g: &WeightedGraph, cfg: &ScoreConfig) -> Result<SuccessReport> {
    check_lengths(h, g)?;
    let optimal: BTreeSet<String> = brute_force_mwis(g)?.iter().map(VertexSubset::to_bitstring).collect();
    let hits: u64 = h
        .counts()
        .iter()
        .filter(|(bits, _)| optimal.contains(*bits))
        .map(|(_, c)| c)
        .sum();
    let probability = if h.shots() == 0 {
        0.0
    } else {
        hits as f64 / h.shots() as f64
    };
    let s = score_with(h, g, cfg)?;
    Ok(SuccessReport {
        probability,
        normalized_score: normalize(s.score, g)?,
    })
}

/// Score divided by `|MIS| / N`, the largest `mean_f` a histogram can reach.
pub fn normalize(score: f64, g: &WeightedGraph) -> Result<f64> {
    let m = mis_size(g)?;
    Ok(if m == 0 { 0.0 } else { score * g.len() as f64 / m as f64 })
}

/// True when one of the `k` most frequent outcomes is a maximum-weight
/// independent set of `g`.
pub fn optimum_in_top(h: &Histogram, g: &WeightedGraph, k: usize) -> Result<bool> {
    check_lengths(h, g)?;
    let optimal: BTreeSet<String> = brute_force_mwis(g)?.iter().map(VertexSubset::to_bitstring).collect();
    Ok(h.top(k).iter().any(|(bits, _)| optimal.contains(*bits)))
}
