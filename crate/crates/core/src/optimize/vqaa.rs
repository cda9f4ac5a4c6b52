// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Variational search over pulse parameters.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NmOptions};
use super::score::{normalize, score_with, ScoreBreakdown, ScoreConfig};
use super::space::{Family, SearchSpace};
use super::tpe::{tpe_suggest, Observation, TpeConfig};
use crate::error::{Error, Result};
use crate::register::{omega_bounds, strip_ancillas, DeviceParams, Embedding};
use crate::rng;
use crate::simulator::{measure, Hamiltonian, Histogram, StateVector, DEFAULT_DT};

pub const DEFAULT_SHOTS: u64 = 1000;
const TOP_OUTCOMES: usize = 10;

/// Measurement and integration settings shared by every evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub shots: u64,
    /// ns
    pub dt: f64,
    pub seed: u64,
    pub score: ScoreConfig,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            shots: DEFAULT_SHOTS,
            dt: DEFAULT_DT,
            seed: 0,
            score: ScoreConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub round: usize,
    pub params: Vec<f64>,
    pub score: f64,
    pub gini: f64,
    pub mean_f: f64,
    /// Most frequent stripped outcomes.
    pub top: Vec<(String, u64)>,
    /// Seed of the shot stream that produced the histogram.
    pub seed: u64,
}

/// Evaluates parameter vectors on one embedding.
pub struct Evaluator<'a> {
    emb: &'a Embedding,
    dev: DeviceParams,
    space: SearchSpace,
    ham: Hamiltonian,
    settings: RunSettings,
    cache: Vec<Trial>,
}

impl<'a> Evaluator<'a> {
    pub fn new(emb: &'a Embedding, dev: &DeviceParams, space: SearchSpace, settings: RunSettings) -> Result<Self> {
        if settings.shots == 0 {
            return Err(Error::InvalidParameter("shots must be >= 1".into()));
        }
        Ok(Self {
            emb,
            dev: *dev,
            ham: Hamiltonian::new(&emb.register, dev)?,
            space,
            settings,
            cache: Vec::new(),
        })
    }

    /// Trials from an earlier run, reused when the same round asks for the
    /// same parameters.
    pub fn with_cache(mut self, trials: Vec<Trial>) -> Self {
        self.cache = trials;
        self
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    /// Stripped histogram for `x` with a named shot stream.
    pub fn histogram(&self, x: &[f64], shots: u64, stream: &str, index: u64) -> Result<Histogram> {
        let seq = self.space.sequence(x, &self.dev)?;
        let mut psi = StateVector::ground(self.ham.atoms());
        self.ham.evolve_from(&seq, &mut psi, self.settings.dt)?;
        let mut r = rng::stream(self.settings.seed, stream, index);
        strip_ancillas(&measure(&psi, shots, &mut r), self.emb)
    }

    pub fn breakdown(&self, h: &Histogram) -> Result<ScoreBreakdown> {
        score_with(h, &self.emb.origin, &self.settings.score)
    }

    pub fn trial(&self, round: usize, x: &[f64]) -> Result<Trial> {
        if let Some(t) = self.cache.get(round) {
            if t.round == round && t.params == x {
                return Ok(t.clone());
            }
        }
        let h = self.histogram(x, self.settings.shots, "shots", round as u64)?;
        let s = self.breakdown(&h)?;
        Ok(Trial {
            round,
            params: x.to_vec(),
            score: s.score,
            gini: s.gini,
            mean_f: s.mean_f,
            top: h.top(TOP_OUTCOMES).into_iter().map(|(b, c)| (b.to_string(), c)).collect(),
            seed: rng::derive_seed(self.settings.seed, "shots", round as u64),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Bounded simplex search with restarts over the relaxed space.
    NelderMead,
    Tpe,
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nm" | "nelder-mead" => Ok(Self::NelderMead),
            "tpe" => Ok(Self::Tpe),
            _ => Err(Error::InvalidParameter(format!("unknown optimizer `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VqaaConfig {
    pub family: Family,
    pub optimizer: OptimizerKind,
    /// TPE: evaluations. Nelder-Mead: iterations per restart.
    pub rounds: usize,
    pub restarts: usize,
    pub tpe: TpeConfig,
    /// Run a second, equally long pass when every trial scored zero.
    pub second_pass: bool,
    /// Shot multiplier for the final re-evaluation of the best trial.
    pub confirm_factor: u64,
}

impl Default for VqaaConfig {
    fn default() -> Self {
        Self {
            family: Family::Simple,
            optimizer: OptimizerKind::Tpe,
            rounds: 50,
            restarts: 4,
            tpe: TpeConfig::default(),
            second_pass: true,
            confirm_factor: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqaaOutcome {
    /// Highest-scoring trial of the log.
    pub best: Trial,
    pub log: Vec<Trial>,
    /// Best parameters re-measured with more shots.
    pub confirmed: ScoreBreakdown,
    pub confirmed_histogram: Histogram,
    /// Confirmed score over `|MIS| / N`.
    pub normalized_score: f64,
    pub second_pass: bool,
    /// Every trial scored zero, even after the second pass.
    pub low_confidence: bool,
}

pub fn search_space(emb: &Embedding, dev: &DeviceParams, cfg: &VqaaConfig) -> Result<SearchSpace> {
    let band = omega_bounds(emb, dev)?;
    let space = SearchSpace::for_family(cfg.family, &band, dev)?;
    Ok(match cfg.optimizer {
        OptimizerKind::NelderMead => space.relaxed(),
        OptimizerKind::Tpe => space,
    })
}

/// Searches pulse parameters maximizing the score of `emb`. Trials in
/// `resume` are reused for the rounds they cover.
pub fn vqaa(
    emb: &Embedding,
    dev: &DeviceParams,
    cfg: &VqaaConfig,
    settings: &RunSettings,
    resume: &[Trial],
) -> Result<VqaaOutcome> {
    vqaa_in(emb, dev, cfg, settings, resume, search_space(emb, dev, cfg)?)
}

/// [`vqaa`] over an explicit search space.
pub fn vqaa_in(
    emb: &Embedding,
    dev: &DeviceParams,
    cfg: &VqaaConfig,
    settings: &RunSettings,
    resume: &[Trial],
    space: SearchSpace,
) -> Result<VqaaOutcome> {
    if cfg.rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be >= 1".into()));
    }
    if space.family != cfg.family {
        return Err(Error::InvalidParameter("search space family differs from the run family".into()));
    }
    let eval = Evaluator::new(emb, dev, space, *settings)?.with_cache(resume.to_vec());
    let mut log = Vec::new();
    run_pass(&eval, cfg, settings.seed, 0, &mut log)?;
    let mut second_pass = false;
    if cfg.second_pass && log.iter().all(|t| t.score <= 0.0) {
        log::info!("all {} trials scored zero; running a second pass", log.len());
        second_pass = true;
        run_pass(&eval, cfg, settings.seed, 1, &mut log)?;
    }
    finish(&eval, cfg, log, second_pass)
}

fn run_pass(eval: &Evaluator<'_>, cfg: &VqaaConfig, seed: u64, pass: u64, log: &mut Vec<Trial>) -> Result<()> {
    match cfg.optimizer {
        OptimizerKind::Tpe => {
            let end = log.len() + cfg.rounds;
            while log.len() < end {
                let round = log.len();
                let x = {
                    let hist: Vec<Observation> = log
                        .iter()
                        .map(|t| Observation {
                            x: &t.params,
                            score: t.score,
                        })
                        .collect();
                    let mut r = rng::stream(seed, "tpe", round as u64);
                    tpe_suggest(&hist, eval.space(), &cfg.tpe, &mut r)
                };
                log.push(eval.trial(round, &x)?);
            }
        }
        OptimizerKind::NelderMead => {
            let space = eval.space().clone();
            let opts = NmOptions {
                max_iter: cfg.rounds,
                ..NmOptions::default()
            };
            for r in 0..cfg.restarts.max(1) {
                let index = pass * cfg.restarts.max(1) as u64 + r as u64;
                let x0 = space.sample_uniform(&mut rng::stream(seed, "restart", index));
                let mut failure = None;
                nelder_mead(
                    |x| {
                        if failure.is_some() {
                            return f64::INFINITY;
                        }
                        let y = space.project(x);
                        match eval.trial(log.len(), &y) {
                            Ok(t) => {
                                let v = -t.score;
                                log.push(t);
                                v
                            }
                            Err(e) => {
                                failure = Some(e);
                                f64::INFINITY
                            }
                        }
                    },
                    &x0,
                    &space.bounds,
                    &opts,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
            }
        }
    }
    Ok(())
}

/// Index of the best trial; the earliest wins ties.
pub fn best_index(log: &[Trial]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, t) in log.iter().enumerate() {
        if best.is_none_or(|b| t.score > log[b].score) {
            best = Some(i);
        }
    }
    best
}

fn finish(eval: &Evaluator<'_>, cfg: &VqaaConfig, log: Vec<Trial>, second_pass: bool) -> Result<VqaaOutcome> {
    let best = log[best_index(&log).expect("non-empty log")].clone();
    let (confirmed, confirmed_histogram) = confirm(eval, &best, cfg.confirm_factor)?;
    let low_confidence = log.iter().all(|t| t.score <= 0.0);
    if low_confidence {
        log::warn!("no trial produced a nonzero score; returning a best-effort result");
    }
    Ok(VqaaOutcome {
        normalized_score: normalize(confirmed.score, &eval.emb.origin)?,
        best,
        log,
        confirmed,
        confirmed_histogram,
        second_pass,
        low_confidence,
    })
}

/// Re-measures `trial` with `factor` times the shots on an independent stream.
pub fn confirm(eval: &Evaluator<'_>, trial: &Trial, factor: u64) -> Result<(ScoreBreakdown, Histogram)> {
    let shots = eval.settings.shots * factor.max(1);
    let h = eval.histogram(&trial.params, shots, "confirm", trial.round as u64)?;
    Ok((eval.breakdown(&h)?, h))
}

/// Best trial among the first `rounds` of a log, re-measured. A TPE run of
/// `rounds` rounds is exactly this prefix of a longer run with the same seed.
pub fn prefix_outcome(eval: &Evaluator<'_>, log: &[Trial], rounds: usize, factor: u64) -> Result<(Trial, ScoreBreakdown)> {
    let prefix = &log[..rounds.min(log.len())];
    let best = prefix[best_index(prefix).ok_or_else(|| Error::InvalidParameter("empty log".into()))?].clone();
    let (s, _) = confirm(eval, &best, factor)?;
    Ok((best, s))
}

pub fn write_log(path: &Path, log: &[Trial], meta: &serde_json::Value) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for t in log {
        let mut v = serde_json::to_value(t)?;
        if let (Some(obj), Some(m)) = (v.as_object_mut(), meta.as_object()) {
            for (k, x) in m {
                obj.insert(k.clone(), x.clone());
            }
        }
        writeln!(f, "{}", serde_json::to_string(&v)?)?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_log(path: &Path) -> Result<Vec<Trial>> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Trial = serde_json::from_str(&line)
            .map_err(|e| Error::parse(format!("{}:{}", path.display(), i + 1), e.to_string()))?;
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use crate::register::layout;

    fn single_atom() -> Embedding {
        let g = WeightedGraph::from_edge_list(1, &[]).unwrap();
        layout(&g, &DeviceParams::default(), 6.0, 0).unwrap()
    }

    fn pair() -> Embedding {
        let mut g = WeightedGraph::from_edge_list(2, &[(0, 1)]).unwrap();
        g.set_positions(vec![[0.0, 0.0], [6.0, 0.0]]).unwrap();
        layout(&g, &DeviceParams::default(), 6.0, 0).unwrap()
    }

    #[test]
    fn single_atom_prefers_excitation() {
        let emb = single_atom();
        let cfg = VqaaConfig {
            rounds: 20,
            ..VqaaConfig::default()
        };
        let out = vqaa(&emb, &DeviceParams::default(), &cfg, &RunSettings::default(), &[]).unwrap();
        assert_eq!(out.log.len(), 20);
        assert_eq!(out.confirmed_histogram.most_common(), Some("1"));
        // p(1 - p)·2p peaks at 8/27 for one atom
        assert!(out.confirmed.score > 0.25, "{:?}", out.confirmed);
        assert!(out.normalized_score <= 8.0 / 27.0 + 0.02);
    }

    #[test]
    fn best_matches_log_and_resume_is_idempotent() {
        let emb = pair();
        let dev = DeviceParams::default();
        let cfg = VqaaConfig {
            rounds: 12,
            ..VqaaConfig::default()
        };
        let settings = RunSettings {
            shots: 200,
            seed: 5,
            ..RunSettings::default()
        };
        let a = vqaa(&emb, &dev, &cfg, &settings, &[]).unwrap();
        let max = a.log.iter().map(|t| t.score).fold(0.0, f64::max);
        assert_eq!(a.best.score, max);
        let b = vqaa(&emb, &dev, &cfg, &settings, &a.log[..5]).unwrap();
        assert_eq!(a.log, b.log);
        let one = vqaa(&emb, &dev, &VqaaConfig { rounds: 1, second_pass: false, ..cfg }, &settings, &[]).unwrap();
        assert_eq!(one.log.len(), 1);
        assert_eq!(one.log[0], a.log[0]);
    }

    #[test]
    fn nelder_mead_mode_logs_every_evaluation() {
        let emb = pair();
        let dev = DeviceParams::default();
        let cfg = VqaaConfig {
            optimizer: OptimizerKind::NelderMead,
            rounds: 5,
            restarts: 2,
            ..VqaaConfig::default()
        };
        let settings = RunSettings {
            shots: 100,
            ..RunSettings::default()
        };
        let out = vqaa(&emb, &dev, &cfg, &settings, &[]).unwrap();
        let space = search_space(&emb, &dev, &cfg).unwrap();
        assert!(out.log.iter().all(|t| space.is_feasible(&t.params)));
        assert!(out.log.len() >= 2 * 4);
        assert!(out.log.windows(2).all(|w| w[1].round == w[0].round + 1));
    }

    #[test]
    fn log_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("log.jsonl");
        let t = Trial {
            round: 0,
            params: vec![1.0, 2.0, 300.0],
            score: 0.2,
            gini: 0.5,
            mean_f: 0.4,
            top: vec![("10".into(), 7)],
            seed: 9,
        };
        write_log(&p, std::slice::from_ref(&t), &serde_json::json!({"config_digest": "abc"})).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"config_digest\":\"abc\""));
        assert_eq!(read_log(&p).unwrap(), vec![t]);
    }
}
