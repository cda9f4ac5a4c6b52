// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Weighted graphs, complementation, the independent-set cost function and
//! the exhaustive oracles every other module is checked against.
//!
//! Vertex order is fixed at construction. It defines the bit order of every
//! bitstring in the crate: the leftmost character is the first vertex.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest graph the exhaustive oracles accept by default.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 24;

/// Relative tolerance when comparing subset weights for equality.
const WEIGHT_TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    weights: Vec<f64>,
    edges: BTreeSet<(usize, usize)>,
    edge_weights: Option<BTreeMap<(usize, usize), f64>>,
    positions: Option<Vec<[f64; 2]>>,
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl WeightedGraph {
    /// Unit-weight graph from ids and edges given by id.
    pub fn unweighted<S: AsRef<str>>(ids: &[S], edges: &[(S, S)]) -> Result<Self> {
        let ids: Vec<String> = ids.iter().map(|s| s.as_ref().to_string()).collect();
        let weights = vec![1.0; ids.len()];
        let mut g = Self::new(ids, weights)?;
        for (a, b) in edges {
            g.add_edge_by_id(a.as_ref(), b.as_ref())?;
        }
        Ok(g)
    }

    /// Edgeless graph with the given vertex ids and weights.
    pub fn new(ids: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if ids.len() != weights.len() {
            return Err(Error::InvalidGraph(format!(
                "{} ids but {} weights",
                ids.len(),
                weights.len()
            )));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id `{id}`")));
            }
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidGraph(format!(
                "vertex `{}` has non-positive weight {w}",
                ids[i]
            )));
        }
        Ok(Self {
            ids,
            index,
            weights,
            edges: BTreeSet::new(),
            edge_weights: None,
            positions: None,
        })
    }

    /// Graph on vertices `0..n` named by their index, unit weights.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let ids = (0..n).map(|i| i.to_string()).collect();
        let mut g = Self::new(ids, vec![1.0; n])?;
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<bool> {
        let n = self.len();
        if a >= n || b >= n {
            return Err(Error::InvalidGraph(format!(
                "edge ({a}, {b}) outside {n} vertices"
            )));
        }
        if a == b {
            return Err(Error::InvalidGraph(format!(
                "self-loop on `{}`",
                self.ids[a]
            )));
        }
        Ok(self.edges.insert(ordered(a, b)))
    }

    pub fn add_edge_by_id(&mut self, a: &str, b: &str) -> Result<bool> {
        let (a, b) = (self.require(a)?, self.require(b)?);
        self.add_edge(a, b)
    }

    /// Sets the penalty `u_ij` of an existing edge.
    pub fn set_edge_weight(&mut self, a: usize, b: usize, u: f64) -> Result<()> {
        let e = ordered(a, b);
        if !self.edges.contains(&e) {
            return Err(Error::InvalidGraph(format!("no edge ({a}, {b})")));
        }
        if !(u.is_finite() && u > 0.0) {
            return Err(Error::InvalidGraph(format!("edge weight {u} not positive")));
        }
        self.edge_weights.get_or_insert_with(BTreeMap::new).insert(e, u);
        Ok(())
    }

    pub fn set_positions(&mut self, positions: Vec<[f64; 2]>) -> Result<()> {
        if positions.len() != self.len() {
            return Err(Error::InvalidGraph(format!(
                "{} positions for {} vertices",
                positions.len(),
                self.len()
            )));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGraph("non-finite vertex position".into()));
        }
        self.positions = Some(positions);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Edges as index pairs `(i, j)` with `i < j`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains(&ordered(a, b))
    }

    pub fn edge_weight(&self, a: usize, b: usize) -> Option<f64> {
        self.edge_weights
            .as_ref()
            .and_then(|m| m.get(&ordered(a, b)).copied())
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    /// Neighbour bitmasks; only valid for graphs of at most 64 vertices.
    pub(crate) fn neighbour_masks(&self) -> Vec<u64> {
        let mut masks = vec![0u64; self.len()];
        for (a, b) in self.edges() {
            masks[a] |= 1 << b;
            masks[b] |= 1 << a;
        }
        masks
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|(a, b)| *a == v || *b == v).count()
    }

    /// Subgraph induced on `keep` (in the given order), weights preserved.
    pub fn induced(&self, keep: &[usize]) -> Result<WeightedGraph> {
        let ids = keep.iter().map(|&i| self.ids[i].clone()).collect();
        let weights = keep.iter().map(|&i| self.weights[i]).collect();
        let mut g = WeightedGraph::new(ids, weights)?;
        for (x, &a) in keep.iter().enumerate() {
            for (y, &b) in keep.iter().enumerate().skip(x + 1) {
                if self.has_edge(a, b) {
                    g.add_edge(x, y)?;
                }
            }
        }
        if let Some(p) = &self.positions {
            g.positions = Some(keep.iter().map(|&i| p[i]).collect());
        }
        Ok(g)
    }
}

/// A subset of a graph's vertices, stored as one flag per vertex in graph order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSubset {
    bits: Vec<bool>,
}

impl VertexSubset {
    pub fn empty(n: usize) -> Self {
        Self {
            bits: vec![false; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self {
            bits: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::parse(
                    "bitstring",
                    format!("unexpected character `{other}` in `{s}`"),
                )),
            })
            .collect::<Result<_>>()?;
        Ok(Self { bits })
    }

    pub fn from_ids<S: AsRef<str>>(g: &WeightedGraph, ids: &[S]) -> Result<Self> {
        let mut bits = vec![false; g.len()];
        for id in ids {
            bits[g.require(id.as_ref())?] = true;
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits.get(i).copied().unwrap_or(false)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
    }

    pub fn member_ids<'g>(&self, g: &'g WeightedGraph) -> Vec<&'g str> {
        self.indices().map(|i| g.id(i)).collect()
    }

    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
    }

    pub fn weight(&self, g: &WeightedGraph) -> f64 {
        self.indices().map(|i| g.weights()[i]).sum()
    }

    fn check_len(&self, g: &WeightedGraph) -> Result<()> {
        if self.len() != g.len() {
            return Err(Error::LengthMismatch {
                expected: g.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for VertexSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

/// Same vertices and weights; an edge exactly where `g` has none.
pub fn complement(g: &WeightedGraph) -> WeightedGraph {
    let mut c = WeightedGraph {
        ids: g.ids.clone(),
        index: g.index.clone(),
        weights: g.weights.clone(),
        edges: BTreeSet::new(),
        edge_weights: None,
        positions: g.positions.clone(),
    };
    for a in 0..g.len() {
        for b in a + 1..g.len() {
            if !g.has_edge(a, b) {
                c.edges.insert((a, b));
            }
        }
    }
    c
}

pub fn is_independent(s: &VertexSubset, g: &WeightedGraph) -> Result<bool> {
    s.check_len(g)?;
    Ok(g.edges().all(|(a, b)| !(s.contains(a) && s.contains(b))))
}

/// Penalty applied to an edge without an explicit `u_ij`: one more than the
/// total vertex weight, so any violated edge costs more than every reward.
pub fn default_penalty(g: &WeightedGraph) -> f64 {
    1.0 + g.total_weight()
}

/// `-Σ w_i z_i + Σ_(i,j)∈E u_ij z_i z_j`.
pub fn mwis_cost(s: &VertexSubset, g: &WeightedGraph) -> Result<f64> {
    s.check_len(g)?;
    let fallback = default_penalty(g);
    let reward: f64 = s.indices().map(|i| g.weights()[i]).sum();
    let penalty: f64 = g
        .edges()
        .filter(|&(a, b)| s.contains(a) && s.contains(b))
        .map(|(a, b)| g.edge_weight(a, b).unwrap_or(fallback))
        .sum();
    Ok(penalty - reward)
}

pub fn brute_force_mwis(g: &WeightedGraph) -> Result<Vec<VertexSubset>> {
    brute_force_mwis_capped(g, DEFAULT_BRUTE_FORCE_CAP)
}

/// All maximum-weight independent sets, sorted by bitstring.
pub fn brute_force_mwis_capped(g: &WeightedGraph, cap: usize) -> Result<Vec<VertexSubset>> {
    let n = g.len();
    if n > cap || n > 63 {
        return Err(Error::SizeCap { n, cap: cap.min(63) });
    }
    let masks = g.neighbour_masks();
    let mut search = MwisSearch {
        weights: g.weights(),
        masks: &masks,
        suffix: suffix_sums(g.weights()),
        eps: WEIGHT_TIE_EPS * g.total_weight().max(1.0),
        best: f64::NEG_INFINITY,
        found: Vec::new(),
    };
    search.branch(0, 0, 0, 0.0);
    let mut out: Vec<VertexSubset> = search
        .found
        .into_iter()
        .map(|m| VertexSubset::from_mask(m, n))
        .collect();
    out.sort_by_key(|s| s.to_bitstring());
    Ok(out)
}

fn suffix_sums(w: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; w.len() + 1];
    for i in (0..w.len()).rev() {
        s[i] = s[i + 1] + w[i];
    }
    s
}

struct MwisSearch<'a> {
    weights: &'a [f64],
    masks: &'a [u64],
    suffix: Vec<f64>,
    eps: f64,
    best: f64,
    found: Vec<u64>,
}

impl MwisSearch<'_> {
    // Include/exclude branching in vertex order; `blocked` holds neighbours of
    // chosen vertices. Bounded by the weight of every remaining vertex.
    fn branch(&mut self, v: usize, chosen: u64, blocked: u64, weight: f64) {
        if weight + self.suffix[v] < self.best - self.eps {
            return;
        }
        if v == self.weights.len() {
            if weight > self.best + self.eps {
                self.best = weight;
                self.found.clear();
            }
            self.found.push(chosen);
            return;
        }
        if blocked >> v & 1 == 0 {
            self.branch(
                v + 1,
                chosen | 1 << v,
                blocked | self.masks[v],
                weight + self.weights[v],
            );
        }
        self.branch(v + 1, chosen, blocked, weight);
    }
}

/// All maximum-weight cliques: the independent-set oracle on the complement.
pub fn max_weight_clique(g: &WeightedGraph) -> Result<Vec<VertexSubset>> {
    brute_force_mwis(&complement(g))
}

pub fn max_weight_clique_capped(g: &WeightedGraph, cap: usize) -> Result<Vec<VertexSubset>> {
    brute_force_mwis_capped(&complement(g), cap)
}

/// Cardinality of a maximum (unweighted) independent set.
pub fn mis_size(g: &WeightedGraph) -> Result<usize> {
    let unit = WeightedGraph::new(g.ids.clone(), vec![1.0; g.len()]).map(|mut u| {
        u.edges = g.edges.clone();
        u
    })?;
    Ok(brute_force_mwis(&unit)?.first().map_or(0, |s| s.count()))
}

// ---------------------------------------------------------------------------
// JSON file format

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<NodeRecord>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
    /// Optional penalties, parallel to `edges`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    #[serde(default = "unit_weight")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

fn unit_weight() -> f64 {
    1.0
}

impl GraphFile {
    pub fn into_graph(self) -> Result<WeightedGraph> {
        let ids = self.nodes.iter().map(|n| n.id.clone()).collect();
        let weights = self.nodes.iter().map(|n| n.weight).collect();
        let mut g = WeightedGraph::new(ids, weights)
            .map_err(|e| Error::parse("nodes", e.to_string()))?;
        for [a, b] in &self.edges {
            let fresh = g
                .add_edge_by_id(a, b)
                .map_err(|e| Error::parse("edges", e.to_string()))?;
            if !fresh {
                return Err(Error::parse("edges", format!("duplicate edge ({a}, {b})")));
            }
        }
        if let Some(u) = &self.edge_weights {
            if u.len() != self.edges.len() {
                return Err(Error::parse(
                    "edge_weights",
                    format!("{} weights for {} edges", u.len(), self.edges.len()),
                ));
            }
            for ([a, b], &w) in self.edges.iter().zip(u) {
                let (a, b) = (g.require(a)?, g.require(b)?);
                g.set_edge_weight(a, b, w)
                    .map_err(|e| Error::parse("edge_weights", e.to_string()))?;
            }
        }
        let coords: Vec<_> = self.nodes.iter().map(|n| n.x.zip(n.y)).collect();
        if coords.iter().all(Option::is_some) && !coords.is_empty() {
            g.set_positions(coords.into_iter().flatten().map(|(x, y)| [x, y]).collect())?;
        } else if coords.iter().any(Option::is_some) {
            return Err(Error::parse("nodes", "positions given for only some nodes"));
        }
        Ok(g)
    }

    pub fn from_graph(g: &WeightedGraph) -> Self {
        let pos = g.positions();
        let nodes = (0..g.len())
            .map(|i| NodeRecord {
                id: g.id(i).to_string(),
                weight: g.weights()[i],
                x: pos.map(|p| p[i][0]),
                y: pos.map(|p| p[i][1]),
            })
            .collect();
        let edges: Vec<(usize, usize)> = g.edges().collect();
        let edge_weights = g.edge_weights.as_ref().map(|_| {
            edges
                .iter()
                .map(|&(a, b)| g.edge_weight(a, b).unwrap_or_else(|| default_penalty(g)))
                .collect()
        });
        GraphFile {
            nodes,
            edges: edges
                .iter()
                .map(|&(a, b)| [g.id(a).to_string(), g.id(b).to_string()])
                .collect(),
            edge_weights,
            meta: None,
        }
    }
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    let text = std::fs::read_to_string(path)?;
    let file: GraphFile = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    file.into_graph()
}
