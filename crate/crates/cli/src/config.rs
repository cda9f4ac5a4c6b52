// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: one JSON file plus command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qdock::mlqaa::TrainConfig;
use qdock::optimize::{Family, Interval, OptimizerKind, ScoreConfig, SearchSpace, GINI_THRESHOLD};
use qdock::register::DeviceParams;
use qdock::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSettings {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub val_fraction: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            lr: d.lr,
            epochs: d.epochs,
            batch_size: d.batch_size,
            val_fraction: d.val_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub device: DeviceParams,
    pub seed: u64,
    pub shots: u64,
    /// ns
    pub dt: f64,
    pub rounds: usize,
    pub optimizer: OptimizerKind,
    pub family: Family,
    /// Nearest-neighbour distance used by the layout, µm.
    pub spacing: f64,
    /// Docking flexibility tolerance, Å.
    pub tau: f64,
    pub restarts: usize,
    pub confirm_factor: u64,
    /// `null` disables score nullification.
    pub gini_threshold: Option<f64>,
    /// Per-parameter `[lo, hi]` replacing the default search intervals.
    pub search: BTreeMap<String, [f64; 2]>,
    /// VQAA rounds per register when labelling the corpus.
    pub dataset_rounds: usize,
    pub benchmark_rounds: Vec<usize>,
    /// Rounds of the VQAA baseline in `mlqaa-eval`.
    pub baseline_rounds: usize,
    pub train: TrainSettings,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            device: DeviceParams::default(),
            seed: 0,
            shots: 1000,
            dt: qdock::simulator::DEFAULT_DT,
            rounds: 50,
            optimizer: OptimizerKind::Tpe,
            family: Family::Simple,
            spacing: 7.0,
            tau: qdock::docking::DEFAULT_TAU,
            restarts: 4,
            confirm_factor: 5,
            gini_threshold: Some(GINI_THRESHOLD),
            search: BTreeMap::new(),
            dataset_rounds: 50,
            benchmark_rounds: vec![10, 50, 200],
            baseline_rounds: 10,
            train: TrainSettings::default(),
            out: PathBuf::from("out"),
        }
    }
}

/// Values given on the command line; each replaces the config entry.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub dt: Option<f64>,
    pub rounds: Option<usize>,
    pub optimizer: Option<OptimizerKind>,
    pub family: Option<Family>,
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl RunConfig {
    pub fn load(path: Option<&Path>, o: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                serde_json::from_str(&text).map_err(|e| Error::Parse {
                    context: p.display().to_string(),
                    message: e.to_string(),
                })?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = o.seed {
            cfg.seed = v;
        }
        if let Some(v) = o.shots {
            cfg.shots = v;
        }
        if let Some(v) = o.dt {
            cfg.dt = v;
        }
        if let Some(v) = o.rounds {
            cfg.rounds = v;
        }
        if let Some(v) = o.optimizer {
            cfg.optimizer = v;
        }
        if let Some(v) = o.family {
            cfg.family = v;
        }
        if let Some(v) = &o.out {
            cfg.out = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        if self.shots == 0 {
            return Err(invalid("shots must be >= 1"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("dt = {} must be > 0", self.dt)));
        }
        if self.rounds == 0 || self.dataset_rounds == 0 || self.baseline_rounds == 0 {
            return Err(invalid("round counts must be >= 1"));
        }
        if self.benchmark_rounds.is_empty() || self.benchmark_rounds.contains(&0) {
            return Err(invalid("benchmark_rounds must be non-empty and positive"));
        }
        if !(self.spacing.is_finite() && self.spacing >= self.device.min_spacing) {
            return Err(invalid(format!(
                "spacing {} below the device minimum {}",
                self.spacing, self.device.min_spacing
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(invalid(format!("tau = {} must be > 0", self.tau)));
        }
        if let Some(g) = self.gini_threshold {
            if !(0.0..=1.0).contains(&g) {
                return Err(invalid(format!("gini_threshold = {g} outside [0, 1]")));
            }
        }
        for (name, [lo, hi]) in &self.search {
            let known = ["omega", "delta", "time", "delta0", "deltaf", "t_rise", "t_fall"];
            if !known.contains(&name.as_str()) {
                return Err(invalid(format!("unknown search parameter `{name}`")));
            }
            Interval::new(*lo, *hi)?;
        }
        self.train_config().validate()
    }

    pub fn score(&self) -> ScoreConfig {
        ScoreConfig {
            gini_threshold: self.gini_threshold,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.train.lr,
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            val_fraction: self.train.val_fraction,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }

    /// Replaces intervals named in `search`; every replacement must stay
    /// inside the default interval.
    pub fn apply_search(&self, mut space: SearchSpace) -> Result<SearchSpace> {
        let names = space.names();
        for (name, [lo, hi]) in &self.search {
            let Some(i) = names.iter().position(|n| n == name) else {
                continue;
            };
            let base = space.bounds[i];
            if *lo < base.lo || *hi > base.hi {
                return Err(invalid(format!(
                    "search interval for `{name}` [{lo}, {hi}] leaves [{}, {}]",
                    base.lo, base.hi
                )));
            }
            space.bounds[i] = Interval::new(*lo, *hi)?;
        }
        Ok(space)
    }

    /// Hex SHA-256 of the effective configuration, output directory excluded.
    pub fn digest(&self) -> String {
        let keyed = RunConfig {
            out: PathBuf::new(),
            ..self.clone()
        };
        let text = serde_json::to_string(&keyed).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn meta(&self) -> serde_json::Value {
        serde_json::json!({ "config_digest": self.digest(), "seed": self.seed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_digest_is_stable() {
        let a = RunConfig::default();
        a.validate().unwrap();
        assert_eq!(a.digest(), RunConfig::default().digest());
        let b = RunConfig { seed: 1, ..a.clone() };
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
        let c = RunConfig { out: "elsewhere".into(), ..a.clone() };
        assert_eq!(a.digest(), c.digest());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"seeed": 3}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"device": {"c7": 1}}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"seed": 3, "gini_threshold": null}"#).unwrap();
        assert_eq!((c.seed, c.gini_threshold), (3, None));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = [
            RunConfig { shots: 0, ..RunConfig::default() },
            RunConfig { dt: -1.0, ..RunConfig::default() },
            RunConfig { spacing: 2.0, ..RunConfig::default() },
            RunConfig {
                search: [("gamma".to_string(), [0.0, 1.0])].into(),
                ..RunConfig::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
