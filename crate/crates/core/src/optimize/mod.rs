// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Scoring and pulse-parameter optimization.

pub mod nelder_mead;
pub mod score;
pub mod space;
pub mod sweep;
pub mod tpe;
pub mod vqaa;

pub use nelder_mead::{nelder_mead, NmOptions, NmResult};
pub use score::{
    normalize, optimum_in_top, score, score_with, success_probability, success_with, ScoreBreakdown, ScoreConfig,
    SuccessReport, GINI_THRESHOLD,
};
pub use space::{Family, Interval, SearchSpace};
pub use sweep::{qaa_sweep, write_sweep_csv, SweepCell};
pub use tpe::{tpe_suggest, Observation, TpeConfig};
pub use vqaa::{prefix_outcome, search_space, vqaa, vqaa_in, Evaluator, OptimizerKind, RunSettings, Trial, VqaaConfig, VqaaOutcome};
