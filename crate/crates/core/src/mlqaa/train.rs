// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Per-parameter regressors: training, persistence and inference.

use std::path::Path;

use ndarray::{Dimension, Zip};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::{split_fraction, DatasetRecord};
use super::gcn::{featurize, GcnModel, Gradients, PreparedGraph, DEPTH, WIDTH};
use crate::error::{Error, Result};
use crate::optimize::{normalize, Evaluator, Interval, RunSettings, ScoreBreakdown, SearchSpace};
use crate::pulse::ComplexParams;
use crate::register::{omega_bounds, DeviceParams, Embedding};
use crate::rng;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "omega")]
    Omega,
    #[serde(rename = "delta0")]
    Delta0,
    #[serde(rename = "deltaf")]
    DeltaF,
    #[serde(rename = "t_rise")]
    TRise,
    #[serde(rename = "t_fall")]
    TFall,
}

impl Target {
    /// In `ComplexParams::to_vec` order.
    pub const ALL: [Target; 5] = [Target::Omega, Target::Delta0, Target::DeltaF, Target::TRise, Target::TFall];

    pub fn name(self) -> &'static str {
        ComplexParams::NAMES[self.index()]
    }

    pub fn index(self) -> usize {
        match self {
            Target::Omega => 0,
            Target::Delta0 => 1,
            Target::DeltaF => 2,
            Target::TRise => 3,
            Target::TFall => 4,
        }
    }

    pub fn of(self, p: &ComplexParams) -> f64 {
        p.to_vec()[self.index()]
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown target `{s}`")))
    }
}

/// Map between a physical parameter and the regression target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scaling {
    /// `(v − lo) / (hi − lo)` with bounds taken over the training targets.
    MinMax { lo: f64, hi: f64 },
    /// Min-max scaling of `ln(v + offset)`.
    LogMinMax { lo: f64, hi: f64, offset: f64 },
    /// Position of Ω inside the register's own Ω search interval.
    BandFraction,
}

impl Scaling {
    pub fn encode(&self, v: f64, omega: &Interval) -> f64 {
        match *self {
            Scaling::MinMax { lo, hi } => (v - lo) / (hi - lo),
            Scaling::LogMinMax { lo, hi, offset } => ((v.max(0.0) + offset).ln() - lo) / (hi - lo),
            Scaling::BandFraction => (v - omega.lo) / omega.width().max(f64::MIN_POSITIVE),
        }
    }

    pub fn decode(&self, y: f64, omega: &Interval) -> f64 {
        match *self {
            Scaling::MinMax { lo, hi } => lo + y * (hi - lo),
            Scaling::LogMinMax { lo, hi, offset } => (lo + y * (hi - lo)).exp() - offset,
            Scaling::BandFraction => omega.lo + y * omega.width(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Share of the training portion held out for epoch selection.
    pub val_fraction: f64,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            epochs: 300,
            batch_size: 64,
            val_fraction: 0.2,
            dropout: super::gcn::DROPOUT,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1e-4..=1e-2).contains(&self.lr) {
            return Err(Error::InvalidParameter(format!("lr = {} outside [1e-4, 1e-2]", self.lr)));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter("epochs and batch size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.val_fraction) || !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidParameter("fractions must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Lowest selection loss so far.
    pub best_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub model: GcnModel,
    pub best_epoch: usize,
    pub history: Vec<EpochStats>,
}

struct Adam {
    lr: f64,
    t: i32,
    m: Gradients,
    v: Gradients,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

fn adam_update(p: &mut f64, g: f64, m: &mut f64, v: &mut f64, lr: f64, c1: f64, c2: f64) {
    *m = BETA1 * *m + (1.0 - BETA1) * g;
    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + EPSILON);
}

fn adam_array<D: Dimension>(
    p: &mut ndarray::Array<f64, D>,
    g: &ndarray::Array<f64, D>,
    m: &mut ndarray::Array<f64, D>,
    v: &mut ndarray::Array<f64, D>,
    lr: f64,
    c1: f64,
    c2: f64,
) {
    Zip::from(p)
        .and(g)
        .and(m)
        .and(v)
        .for_each(|p, &g, m, v| adam_update(p, g, m, v, lr, c1, c2));
}

impl Adam {
    fn new(model: &GcnModel, lr: f64) -> Self {
        Self {
            lr,
            t: 0,
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
        }
    }

    fn step(&mut self, model: &mut GcnModel, g: &Gradients) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        let lr = self.lr;
        for (((p, g), m), v) in model
            .layers
            .iter_mut()
            .zip(&g.layers)
            .zip(&mut self.m.layers)
            .zip(&mut self.v.layers)
        {
            adam_array(&mut p.weight, &g.weight, &mut m.weight, &mut v.weight, lr, c1, c2);
            adam_array(&mut p.bias, &g.bias, &mut m.bias, &mut v.bias, lr, c1, c2);
        }
        adam_array(
            &mut model.head_weight,
            &g.head_weight,
            &mut self.m.head_weight,
            &mut self.v.head_weight,
            lr,
            c1,
            c2,
        );
        adam_update(
            &mut model.head_bias,
            g.head_bias,
            &mut self.m.head_bias,
            &mut self.v.head_bias,
            lr,
            c1,
            c2,
        );
    }
}

fn mean_loss(model: &GcnModel, graphs: &[PreparedGraph], y: &[f64], idx: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for &i in idx {
        total += (model.forward_prepared(&graphs[i])? - y[i]).powi(2);
    }
    Ok(total / idx.len().max(1) as f64)
}

/// Fits one regressor to `(graph, value)` pairs by mini-batch Adam on the
/// mean squared error, returning the epoch-best model. Sets of fewer than
/// five samples are not split and select on training loss.
pub fn train(samples: &[(PreparedGraph, f64)], cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    let graphs: Vec<PreparedGraph> = samples.iter().map(|(g, _)| g.clone()).collect();
    let y: Vec<f64> = samples.iter().map(|(_, v)| *v).collect();
    let (mut fit_idx, val_idx) = if samples.len() >= 5 && cfg.val_fraction > 0.0 {
        split_fraction(samples.len(), cfg.val_fraction, &mut rng::stream(cfg.seed, "validation", 0))
    } else {
        ((0..samples.len()).collect(), Vec::new())
    };
    let mut model = GcnModel::new(1, WIDTH, DEPTH, cfg.dropout, &mut rng::stream(cfg.seed, "init", 0));
    let mut adam = Adam::new(&model, cfg.lr);
    let mut best = (model.clone(), 0, f64::INFINITY);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut last_loss = f64::NAN;
    for epoch in 0..cfg.epochs {
        fit_idx.shuffle(&mut rng::stream(cfg.seed, "shuffle", epoch as u64));
        let mut drop = rng::stream(cfg.seed, "dropout", epoch as u64);
        for batch in fit_idx.chunks(cfg.batch_size) {
            let mut grads = Gradients::zeros_like(&model);
            let mut loss = 0.0;
            let w = 1.0 / batch.len() as f64;
            for &i in batch {
                let (l, g) = model.loss_and_gradients(&graphs[i], y[i], Some(&mut drop));
                loss += w * l;
                grads.add_scaled(&g, w);
            }
            if !loss.is_finite() || !grads.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, last_loss });
            }
            last_loss = loss;
            adam.step(&mut model, &grads);
        }
        let train_loss = mean_loss(&model, &graphs, &y, &fit_idx)?;
        let val_loss = if val_idx.is_empty() {
            train_loss
        } else {
            mean_loss(&model, &graphs, &y, &val_idx)?
        };
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, last_loss });
        }
        if val_loss < best.2 {
            best = (model.clone(), epoch, val_loss);
        }
        history.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
            best_loss: best.2,
        });
    }
    Ok(TrainReport {
        model: best.0,
        best_epoch: best.1,
        history,
    })
}

/// Serialized regressor for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetModel {
    pub version: u32,
    pub target: Target,
    pub seed: u64,
    pub scaling: Scaling,
    pub best_epoch: usize,
    pub best_loss: f64,
    pub model: GcnModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl TargetModel {
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let m: TargetModel =
            serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        if m.version != MODEL_VERSION {
            return Err(Error::parse(
                path.display().to_string(),
                format!("unsupported model version {}", m.version),
            ));
        }
        m.model.check_shapes()?;
        Ok(m)
    }

    pub fn file_name(target: Target) -> String {
        format!("model_{}.json", target.name())
    }
}

/// The five regressors that replace the variational loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    pub models: Vec<TargetModel>,
}

impl ModelSet {
    pub fn get(&self, t: Target) -> Result<&TargetModel> {
        self.models
            .iter()
            .find(|m| m.target == t)
            .ok_or_else(|| Error::InvalidParameter(format!("no model for `{}`", t.name())))
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for m in &self.models {
            m.write(&dir.join(TargetModel::file_name(m.target)))?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let models = Target::ALL
            .iter()
            .map(|t| TargetModel::read(&dir.join(TargetModel::file_name(*t))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { models })
    }
}

/// Featurized record with the Ω interval of its search space.
pub struct PreparedRecord {
    pub graph: PreparedGraph,
    pub omega: Interval,
    pub targets: ComplexParams,
}

pub fn prepare(records: &[DatasetRecord], dev: &DeviceParams) -> Result<Vec<PreparedRecord>> {
    records
        .iter()
        .map(|r| {
            let emb = r.embedding()?;
            Ok(PreparedRecord {
                graph: PreparedGraph::new(&featurize(&emb.register)?)?,
                omega: complex_space(&emb, dev)?.bounds[0],
                targets: r.targets,
            })
        })
        .collect()
}

fn complex_space(emb: &Embedding, dev: &DeviceParams) -> Result<SearchSpace> {
    SearchSpace::complex(&omega_bounds(emb, dev)?, dev)
}

/// Added before taking logarithms so that zero detunings stay finite.
const LOG_OFFSET: f64 = 0.01;

fn bounds(vals: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let lo = vals.clone().fold(f64::INFINITY, f64::min);
    let hi = vals.fold(f64::NEG_INFINITY, f64::max);
    (lo, if hi > lo { hi } else { lo + 1.0 })
}

/// Trains one regressor per parameter. Ω is learned as a fraction of each
/// register's Ω interval, δf min-max scaled over `records`, and δ0 and the
/// ramp times as min-max scaled logarithms.
pub fn train_models(records: &[PreparedRecord], cfg: &TrainConfig) -> Result<(ModelSet, Vec<TrainReport>)> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    let mut models = Vec::with_capacity(5);
    let mut reports = Vec::with_capacity(5);
    for t in Target::ALL {
        let scaling = match t {
            Target::Omega => Scaling::BandFraction,
            Target::DeltaF => {
                let (lo, hi) = bounds(records.iter().map(|r| t.of(&r.targets)));
                Scaling::MinMax { lo, hi }
            }
            _ => {
                let (lo, hi) = bounds(records.iter().map(|r| (t.of(&r.targets).max(0.0) + LOG_OFFSET).ln()));
                Scaling::LogMinMax {
                    lo,
                    hi,
                    offset: LOG_OFFSET,
                }
            }
        };
        let samples: Vec<(PreparedGraph, f64)> = records
            .iter()
            .map(|r| (r.graph.clone(), scaling.encode(t.of(&r.targets), &r.omega)))
            .collect();
        let per = TrainConfig {
            seed: rng::derive_seed(cfg.seed, t.name(), 0),
            ..*cfg
        };
        log::info!("training `{}` on {} samples", t.name(), samples.len());
        let report = train(&samples, &per)?;
        models.push(TargetModel {
            version: MODEL_VERSION,
            target: t,
            seed: per.seed,
            scaling,
            best_epoch: report.best_epoch,
            best_loss: report.history[report.best_epoch].best_loss,
            model: report.model.clone(),
            meta: None,
        });
        reports.push(report);
    }
    Ok((ModelSet { models }, reports))
}

fn predict_in(models: &ModelSet, graph: &PreparedGraph, space: &SearchSpace) -> Result<ComplexParams> {
    let omega = space.bounds[0];
    let mut x = Vec::with_capacity(5);
    for t in Target::ALL {
        let m = models.get(t)?;
        x.push(m.scaling.decode(m.model.forward_prepared(graph)?, &omega));
    }
    ComplexParams::from_slice(&space.project(&x))
}

/// One inference per parameter, clamped into the register's complex-family
/// search space.
pub fn predict_params(models: &ModelSet, emb: &Embedding, dev: &DeviceParams) -> Result<ComplexParams> {
    let graph = PreparedGraph::new(&featurize(&emb.register)?)?;
    predict_in(models, &graph, &complex_space(emb, dev)?)
}

pub fn predict_prepared(models: &ModelSet, r: &PreparedRecord, dev: &DeviceParams) -> Result<ComplexParams> {
    let mut space = SearchSpace::complex(&crate::register::OmegaBand { min: 0.0, max: dev.omega_max }, dev)?;
    space.bounds[0] = r.omega;
    predict_in(models, &r.graph, &space)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapeReport {
    pub percent: f64,
    pub used: usize,
    /// Pairs skipped because the target was zero.
    pub excluded: usize,
}

/// `100 · mean(|p − t| / |t|)` over nonzero targets.
pub fn mape(predictions: &[f64], targets: &[f64]) -> Result<MapeReport> {
    if predictions.len() != targets.len() {
        return Err(Error::LengthMismatch {
            expected: targets.len(),
            got: predictions.len(),
        });
    }
    let mut total = 0.0;
    let mut used = 0;
    for (p, t) in predictions.iter().zip(targets) {
        if *t == 0.0 {
            continue;
        }
        total += ((p - t) / t).abs();
        used += 1;
    }
    let excluded = targets.len() - used;
    if excluded > 0 {
        log::warn!("{excluded} zero targets excluded from MAPE");
    }
    Ok(MapeReport {
        percent: if used == 0 { f64::NAN } else { 100.0 * total / used as f64 },
        used,
        excluded,
    })
}

/// Per-parameter MAPE of the model set over `records`.
pub fn evaluate_mape(models: &ModelSet, records: &[PreparedRecord], dev: &DeviceParams) -> Result<Vec<(Target, MapeReport)>> {
    let preds = records
        .iter()
        .map(|r| predict_prepared(models, r, dev))
        .collect::<Result<Vec<_>>>()?;
    Target::ALL
        .iter()
        .map(|&t| {
            let p: Vec<f64> = preds.iter().map(|x| t.of(x)).collect();
            let y: Vec<f64> = records.iter().map(|r| t.of(&r.targets)).collect();
            Ok((t, mape(&p, &y)?))
        })
        .collect()
}

/// Predicted parameters run once through evolve, measure and score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlqaaRun {
    pub params: ComplexParams,
    pub score: ScoreBreakdown,
    pub normalized_score: f64,
}

pub fn mlqaa_run(models: &ModelSet, emb: &Embedding, dev: &DeviceParams, settings: &RunSettings) -> Result<MlqaaRun> {
    let params = predict_params(models, emb, dev)?;
    let eval = Evaluator::new(emb, dev, complex_space(emb, dev)?, *settings)?;
    let h = eval.histogram(&params.to_vec(), settings.shots, "mlqaa", 0)?;
    let score = eval.breakdown(&h)?;
    Ok(MlqaaRun {
        params,
        normalized_score: normalize(score.score, &emb.origin)?,
        score,
    })
}

/// One held-out register: learned parameters against a short VQAA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub id: String,
    pub nodes: usize,
    pub mlqaa: MlqaaRun,
    pub vqaa_params: ComplexParams,
    pub vqaa_normalized_score: f64,
}

/// Runs the learned parameters and a `vqaa_rounds`-round complex TPE search
/// on every record; record `i` uses seed stream `("compare", i)`.
pub fn compare_with_vqaa(
    models: &ModelSet,
    records: &[DatasetRecord],
    dev: &DeviceParams,
    settings: &RunSettings,
    vqaa_rounds: usize,
) -> Result<Vec<Comparison>> {
    use crate::optimize::{vqaa, Family, OptimizerKind, VqaaConfig};
    let cfg = VqaaConfig {
        family: Family::Complex,
        optimizer: OptimizerKind::Tpe,
        rounds: vqaa_rounds,
        ..VqaaConfig::default()
    };
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let emb = r.embedding()?;
            let s = RunSettings {
                seed: rng::derive_seed(settings.seed, "compare", i as u64),
                ..*settings
            };
            let learned = mlqaa_run(models, &emb, dev, &s)?;
            let v = vqaa(&emb, dev, &cfg, &s, &[])?;
            Ok(Comparison {
                id: r.id.clone(),
                nodes: emb.origin.len(),
                mlqaa: learned,
                vqaa_params: ComplexParams::from_slice(&v.best.params)?,
                vqaa_normalized_score: v.normalized_score,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::Register;

    fn graph(points: &[[f64; 2]]) -> PreparedGraph {
        PreparedGraph::new(&featurize(&Register::from_positions(points)).unwrap()).unwrap()
    }

    #[test]
    fn mape_examples() {
        let t = [1.0, 2.0, 50.0];
        assert_eq!(mape(&t, &t).unwrap().percent, 0.0);
        let p: Vec<f64> = t.iter().map(|v| 1.1 * v).collect();
        assert!((mape(&p, &t).unwrap().percent - 10.0).abs() < 1e-9);
        let r = mape(&[1.0, 5.0], &[0.0, 4.0]).unwrap();
        assert_eq!((r.used, r.excluded), (1, 1));
        assert!((r.percent - 25.0).abs() < 1e-12);
        assert!(mape(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn single_sample_overfits() {
        let samples = vec![(graph(&[[0.0, 0.0], [7.0, 0.0], [3.0, 6.0]]), 0.63)];
        let report = train(
            &samples,
            &TrainConfig {
                epochs: 500,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        let loss = report.history[report.best_epoch].train_loss;
        assert!(loss < 1e-3, "{loss}");
    }

    fn toy_set() -> Vec<(PreparedGraph, f64)> {
        (0..12)
            .map(|i| {
                let s = 6.0 + 0.4 * i as f64;
                let n = 2 + i % 4;
                let pts: Vec<[f64; 2]> = (0..n).map(|k| [k as f64 * s, 0.0]).collect();
                (graph(&pts), n as f64 / 5.0)
            })
            .collect()
    }

    #[test]
    fn training_is_deterministic_and_monotone_in_best() {
        let cfg = TrainConfig {
            epochs: 15,
            seed: 3,
            ..TrainConfig::default()
        };
        let a = train(&toy_set(), &cfg).unwrap();
        let b = train(&toy_set(), &cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert!(a.history.windows(2).all(|w| w[1].best_loss <= w[0].best_loss));
        let c = train(&toy_set(), &TrainConfig { seed: 4, ..cfg }).unwrap();
        assert_ne!(a.model, c.model);
    }

    #[test]
    fn rejects_bad_config() {
        let s = toy_set();
        assert!(train(&s, &TrainConfig { lr: 0.1, ..TrainConfig::default() }).is_err());
        assert!(train(&[], &TrainConfig::default()).is_err());
    }

    #[test]
    fn exploding_training_reports_non_finite_loss() {
        let mut s = toy_set();
        s[0].1 = f64::INFINITY;
        match train(&s, &TrainConfig { epochs: 2, ..TrainConfig::default() }) {
            Err(Error::NonFiniteLoss { epoch: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scaling_round_trip() {
        let omega = Interval::new(2.0, 12.0).unwrap();
        for s in [
            Scaling::MinMax { lo: 16.0, hi: 2500.0 },
            Scaling::LogMinMax { lo: 16f64.ln(), hi: 2500f64.ln(), offset: 0.01 },
            Scaling::BandFraction,
        ] {
            for v in [2.0, 7.5, 12.0] {
                assert!((s.decode(s.encode(v, &omega), &omega) - v).abs() < 1e-12);
            }
        }
        assert_eq!(Scaling::BandFraction.encode(12.0, &omega), 1.0);
    }

    #[test]
    fn target_names_follow_params() {
        let p = ComplexParams {
            omega: 1.0,
            delta0: 2.0,
            deltaf: 3.0,
            t_rise: 4.0,
            t_fall: 5.0,
        };
        for (i, t) in Target::ALL.iter().enumerate() {
            assert_eq!(t.of(&p), (i + 1) as f64);
            assert_eq!(t.name().parse::<Target>().unwrap(), *t);
        }
    }
}
