// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Graph-convolutional regressor with hand-written backpropagation.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::register::Register;

/// Complete directed graph over a register: every ordered atom pair carries
/// weight `1/R²`, every atom carries feature 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFeatures {
    pub nodes: usize,
    /// `(source, target)` pairs, both directions present.
    pub edge_index: Vec<[usize; 2]>,
    pub edge_weight: Vec<f64>,
    pub node_feature: Vec<f64>,
}

pub fn featurize(reg: &Register) -> Result<GraphFeatures> {
    let n = reg.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least two atoms, got {n}")));
    }
    let mut edge_index = Vec::with_capacity(n * (n - 1));
    let mut edge_weight = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d2 = reg.distance(i, j).powi(2);
            if d2 <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "atoms `{}` and `{}` coincide",
                    reg.atoms[i].id, reg.atoms[j].id
                )));
            }
            edge_index.push([i, j]);
            edge_weight.push(1.0 / d2);
        }
    }
    Ok(GraphFeatures {
        nodes: n,
        edge_index,
        edge_weight,
        node_feature: vec![1.0; n],
    })
}

impl GraphFeatures {
    /// `D^{-1/2} (A + I) D^{-1/2}` with `D` the weighted degrees of `A + I`.
    pub fn normalized_adjacency(&self) -> Result<Array2<f64>> {
        let n = self.nodes;
        if self.edge_index.len() != self.edge_weight.len() || self.node_feature.len() != n {
            return Err(Error::Shape("feature arrays disagree in length".into()));
        }
        let mut a = Array2::<f64>::eye(n);
        for (&[s, t], &w) in self.edge_index.iter().zip(&self.edge_weight) {
            if s >= n || t >= n {
                return Err(Error::Shape(format!("edge ({s}, {t}) outside {n} nodes")));
            }
            a[[t, s]] += w;
        }
        let d: Vec<f64> = a.rows().into_iter().map(|r| r.sum().sqrt().recip()).collect();
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] *= d[i] * d[j];
            }
        }
        Ok(a)
    }

    pub fn node_matrix(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.nodes, 1), self.node_feature.clone()).expect("n × 1")
    }
}

/// Graph features prepared for repeated passes.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub adjacency: Array2<f64>,
    pub nodes: Array2<f64>,
}

impl PreparedGraph {
    pub fn new(f: &GraphFeatures) -> Result<Self> {
        Ok(Self {
            adjacency: f.normalized_adjacency()?,
            nodes: f.node_matrix(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnModel {
    pub layers: Vec<Layer>,
    pub head_weight: Array1<f64>,
    pub head_bias: f64,
    pub dropout: f64,
}

pub const DEPTH: usize = 5;
pub const WIDTH: usize = 128;
pub const DROPOUT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
    pub head_weight: Array1<f64>,
    pub head_bias: f64,
}

struct Tape {
    /// `Â·H_{l-1}` per layer.
    inputs: Vec<Array2<f64>>,
    /// Pre-activation per layer.
    pre: Vec<Array2<f64>>,
    /// Dropout scale per layer (0 or 1/(1-p)), empty when inactive.
    masks: Vec<Option<Array2<f64>>>,
    pooled: Array1<f64>,
}

impl GcnModel {
    /// Glorot-uniform weights, zero biases.
    pub fn new(input: usize, width: usize, depth: usize, dropout: f64, rng: &mut impl Rng) -> Self {
        let mut layers = Vec::with_capacity(depth);
        let mut fan_in = input;
        for _ in 0..depth {
            let limit = (6.0 / (fan_in + width) as f64).sqrt();
            layers.push(Layer {
                weight: Array2::from_shape_fn((fan_in, width), |_| rng.gen_range(-limit..limit)),
                bias: Array1::zeros(width),
            });
            fan_in = width;
        }
        let limit = (6.0 / (width + 1) as f64).sqrt();
        Self {
            layers,
            head_weight: Array1::from_shape_fn(width, |_| rng.gen_range(-limit..limit)),
            head_bias: 0.0,
            dropout,
        }
    }

    pub fn standard(rng: &mut impl Rng) -> Self {
        Self::new(1, WIDTH, DEPTH, DROPOUT, rng)
    }

    pub fn check_shapes(&self) -> Result<()> {
        let mut fan_in = None;
        for (i, l) in self.layers.iter().enumerate() {
            let (r, c) = l.weight.dim();
            if fan_in.is_some_and(|f| f != r) || l.bias.len() != c {
                return Err(Error::Shape(format!("layer {i} has inconsistent shape {r}×{c}")));
            }
            fan_in = Some(c);
        }
        if fan_in.is_some_and(|f| f != self.head_weight.len()) {
            return Err(Error::Shape("head width differs from last layer".into()));
        }
        Ok(())
    }

    fn input_width(&self) -> usize {
        self.layers.first().map_or(self.head_weight.len(), |l| l.weight.nrows())
    }

    /// Deterministic prediction (dropout off).
    pub fn forward(&self, f: &GraphFeatures) -> Result<f64> {
        self.forward_prepared(&PreparedGraph::new(f)?)
    }

    pub fn forward_prepared(&self, g: &PreparedGraph) -> Result<f64> {
        if g.nodes.ncols() != self.input_width() {
            return Err(Error::Shape(format!(
                "node features have width {}, model expects {}",
                g.nodes.ncols(),
                self.input_width()
            )));
        }
        let (out, _) = self.run(g, None::<&mut rand_chacha::ChaCha8Rng>);
        Ok(out)
    }

    fn run<R: Rng>(&self, g: &PreparedGraph, mut dropout_rng: Option<&mut R>) -> (f64, Tape) {
        let mut h = g.nodes.clone();
        let mut tape = Tape {
            inputs: Vec::with_capacity(self.layers.len()),
            pre: Vec::with_capacity(self.layers.len()),
            masks: Vec::with_capacity(self.layers.len()),
            pooled: Array1::zeros(0),
        };
        for layer in &self.layers {
            let input = g.adjacency.dot(&h);
            let z = input.dot(&layer.weight) + &layer.bias;
            let mut act = z.mapv(|v| v.max(0.0));
            let mask = match dropout_rng.as_deref_mut() {
                Some(rng) if self.dropout > 0.0 => {
                    let keep = 1.0 / (1.0 - self.dropout);
                    let m = Array2::from_shape_fn(act.dim(), |_| {
                        if rng.gen::<f64>() < self.dropout {
                            0.0
                        } else {
                            keep
                        }
                    });
                    act *= &m;
                    Some(m)
                }
                _ => None,
            };
            tape.inputs.push(input);
            tape.pre.push(z);
            tape.masks.push(mask);
            h = act;
        }
        let pooled = h.sum_axis(Axis(0));
        let out = pooled.dot(&self.head_weight) + self.head_bias;
        tape.pooled = pooled;
        (out, tape)
    }

    /// Squared error `(ŷ − y)²` and its gradients, with dropout drawn from
    /// `dropout_rng` when given.
    pub fn loss_and_gradients<R: Rng>(&self, g: &PreparedGraph, target: f64, dropout_rng: Option<&mut R>) -> (f64, Gradients) {
        self.gradients_with_fault(g, target, dropout_rng, None)
    }

    pub(crate) fn gradients_with_fault<R: Rng>(
        &self,
        g: &PreparedGraph,
        target: f64,
        dropout_rng: Option<&mut R>,
        fault: Option<usize>,
    ) -> (f64, Gradients) {
        let (out, tape) = self.run(g, dropout_rng);
        let err = out - target;
        let dout = 2.0 * err;
        let head_weight = &tape.pooled * dout;
        let head_bias = dout;
        let n = g.nodes.nrows();
        // d(add-pool)/dH is a broadcast of the pooled gradient to every node
        let mut dh = Array2::from_shape_fn((n, self.head_weight.len()), |(_, j)| dout * self.head_weight[j]);
        let mut layers: Vec<Layer> = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            if let Some(m) = &tape.masks[l] {
                dh *= m;
            }
            let mut dz = dh * tape.pre[l].mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            if fault == Some(l) {
                dz *= 1.5;
            }
            let dw = tape.inputs[l].t().dot(&dz);
            let db = dz.sum_axis(Axis(0));
            // Â is symmetric
            dh = g.adjacency.t().dot(&dz.dot(&self.layers[l].weight.t()));
            layers.push(Layer { weight: dw, bias: db });
        }
        layers.reverse();
        (
            err * err,
            Gradients {
                layers,
                head_weight,
                head_bias,
            },
        )
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum::<usize>() + self.head_weight.len() + 1
    }

    /// Mutable view of parameter `k` in a fixed flattening order.
    fn param_mut(&mut self, mut k: usize) -> &mut f64 {
        for l in &mut self.layers {
            if k < l.weight.len() {
                let c = l.weight.ncols();
                return &mut l.weight[[k / c, k % c]];
            }
            k -= l.weight.len();
            if k < l.bias.len() {
                return &mut l.bias[k];
            }
            k -= l.bias.len();
        }
        if k < self.head_weight.len() {
            return &mut self.head_weight[k];
        }
        &mut self.head_bias
    }
}

impl Gradients {
    fn get(&self, mut k: usize) -> f64 {
        for l in &self.layers {
            if k < l.weight.len() {
                let c = l.weight.ncols();
                return l.weight[[k / c, k % c]];
            }
            k -= l.weight.len();
            if k < l.bias.len() {
                return l.bias[k];
            }
            k -= l.bias.len();
        }
        if k < self.head_weight.len() {
            return self.head_weight[k];
        }
        self.head_bias
    }

    pub fn zeros_like(m: &GcnModel) -> Self {
        Self {
            layers: m
                .layers
                .iter()
                .map(|l| Layer {
                    weight: Array2::zeros(l.weight.dim()),
                    bias: Array1::zeros(l.bias.len()),
                })
                .collect(),
            head_weight: Array1::zeros(m.head_weight.len()),
            head_bias: 0.0,
        }
    }

    pub fn add_scaled(&mut self, other: &Gradients, s: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weight.scaled_add(s, &b.weight);
            a.bias.scaled_add(s, &b.bias);
        }
        self.head_weight.scaled_add(s, &other.head_weight);
        self.head_bias += s * other.head_bias;
    }

    pub fn is_finite(&self) -> bool {
        self.head_bias.is_finite()
            && self.head_weight.iter().all(|v| v.is_finite())
            && self
                .layers
                .iter()
                .all(|l| l.weight.iter().all(|v| v.is_finite()) && l.bias.iter().all(|v| v.is_finite()))
    }
}

/// Largest relative difference between analytic and central-difference
/// gradients of the squared error, over `samples` randomly chosen parameters.
pub fn gradient_check(m: &GcnModel, f: &GraphFeatures, target: f64, samples: usize, rng: &mut impl Rng) -> Result<f64> {
    gradient_check_inner(m, f, target, samples, rng, None)
}

pub(crate) fn gradient_check_inner(
    m: &GcnModel,
    f: &GraphFeatures,
    target: f64,
    samples: usize,
    rng: &mut impl Rng,
    fault: Option<usize>,
) -> Result<f64> {
    const STEP: f64 = 1e-5;
    let g = PreparedGraph::new(f)?;
    let (_, grads) = m.gradients_with_fault(&g, target, None::<&mut rand_chacha::ChaCha8Rng>, fault);
    let total = m.parameter_count();
    let mut probe = m.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let k = rng.gen_range(0..total);
        let orig = *probe.param_mut(k);
        *probe.param_mut(k) = orig + STEP;
        let up = (probe.forward_prepared(&g)? - target).powi(2);
        *probe.param_mut(k) = orig - STEP;
        let down = (probe.forward_prepared(&g)? - target).powi(2);
        *probe.param_mut(k) = orig;
        let numeric = (up - down) / (2.0 * STEP);
        let analytic = grads.get(k);
        let scale = analytic.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic - numeric).abs() / scale);
    }
    Ok(worst)
}
