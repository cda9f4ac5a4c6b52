// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Embedding graphs into 2D atom registers.
//!
//! Two atoms closer than the blockade radius `(c6 / Ω)^(1/6)` cannot both be
//! excited, so a register encodes the unit-disk graph at that radius. An edge
//! the geometry cannot realize is carried by a quantum link: an even chain of
//! ancilla atoms between its endpoints.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rng;
use crate::simulator::Histogram;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceParams {
    /// Van der Waals coefficient, rad·µs⁻¹·µm⁶.
    pub c6: f64,
    /// Largest Rabi frequency, rad/µs.
    pub omega_max: f64,
    /// Largest detuning magnitude, rad/µs.
    pub delta_abs_max: f64,
    /// Longest allowed sequence, ns.
    pub coherence_time: f64,
    /// Closest allowed atom pair, µm.
    pub min_spacing: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            c6: 5.42e6,
            omega_max: 15.7,
            delta_abs_max: 8.0,
            coherence_time: 5000.0,
            min_spacing: 4.0,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c6", self.c6),
            ("omega_max", self.omega_max),
            ("delta_abs_max", self.delta_abs_max),
            ("coherence_time", self.coherence_time),
            ("min_spacing", self.min_spacing),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("device {name} = {v} must be > 0")));
            }
        }
        Ok(())
    }

    /// `c6 / r⁶`, rad/µs.
    pub fn interaction(&self, r: f64) -> f64 {
        self.c6 / r.powi(6)
    }

    /// Blockade radius at the largest Rabi frequency: non-edges must be
    /// farther apart than this on every valid embedding.
    pub fn min_blockade_radius(&self) -> f64 {
        (self.c6 / self.omega_max).powf(1.0 / 6.0)
    }
}

/// Blockade radius `(c6/Ω)^(1/6)` in µm.
pub fn blockade_radius(omega: f64, dev: &DeviceParams) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidParameter(format!("omega = {omega} must be > 0")));
    }
    Ok((dev.c6 / omega).powf(1.0 / 6.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub id: String,
    /// µm
    pub x: f64,
    /// µm
    pub y: f64,
    #[serde(rename = "w", default = "unit")]
    pub weight: f64,
    #[serde(rename = "ancilla", default)]
    pub is_ancilla: bool,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Register {
    pub atoms: Vec<Atom>,
}

impl Register {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Self { atoms }
    }

    /// Non-ancilla atoms at the given positions with unit weights, ids `q0..`.
    pub fn from_positions(positions: &[[f64; 2]]) -> Self {
        Self {
            atoms: positions
                .iter()
                .enumerate()
                .map(|(i, p)| Atom {
                    id: format!("q{i}"),
                    x: p[0],
                    y: p[1],
                    weight: 1.0,
                    is_ancilla: false,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.atoms[i], &self.atoms[j]);
        (a.x - b.x).hypot(a.y - b.y)
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.atoms.iter().map(|a| [a.x, a.y]).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn ancilla_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.is_ancilla).count()
    }

    /// Closest pair `(i, j, distance)`, if any.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d = self.distance(i, j);
                if best.is_none_or(|b| d < b.2) {
                    best = Some((i, j, d));
                }
            }
        }
        best
    }

    pub fn check_spacing(&self, min_spacing: f64) -> Result<()> {
        if let Some((i, j, d)) = self.closest_pair() {
            if d < min_spacing {
                return Err(Error::Infeasible(format!(
                    "atoms `{}` and `{}` are {d:.3} µm apart (minimum {min_spacing} µm)",
                    self.atoms[i].id, self.atoms[j].id
                )));
            }
        }
        Ok(())
    }

    /// Graph with an edge between every pair closer than `radius`.
    pub fn disk_graph(&self, radius: f64) -> Result<WeightedGraph> {
        let mut g = WeightedGraph::new(
            self.atoms.iter().map(|a| a.id.clone()).collect(),
            self.weights(),
        )?;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.distance(i, j) < radius {
                    g.add_edge(i, j)?;
                }
            }
        }
        g.set_positions(self.positions())?;
        Ok(g)
    }
}

/// Range of Rabi frequencies whose blockade radius reproduces the intended
/// graph. `min == 0` means no lower constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaBand {
    pub min: f64,
    pub max: f64,
}

impl OmegaBand {
    /// Geometric centre of the band (half the ceiling when unconstrained below).
    pub fn mid(&self) -> f64 {
        if self.min > 0.0 {
            (self.min * self.max).sqrt()
        } else {
            0.5 * self.max
        }
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega > self.min && omega < self.max
    }
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub register: Register,
    pub blockade_radius: f64,
    /// Graph over every atom (ancillas included) that the blockade must realize.
    pub intended: WeightedGraph,
    /// The source graph; its vertices are the first `origin.len()` atoms, in order.
    pub origin: WeightedGraph,
    /// Linked origin edge (by id, in origin order) to its ancilla chain.
    pub link_map: BTreeMap<(String, String), Vec<String>>,
}

impl Embedding {
    /// Edges of the disk graph at the embedding's blockade radius.
    pub fn induced_edges(&self) -> BTreeSet<(usize, usize)> {
        self.induced_edges_at(self.blockade_radius)
    }

    pub fn induced_edges_at(&self, radius: f64) -> BTreeSet<(usize, usize)> {
        let reg = &self.register;
        let mut out = BTreeSet::new();
        for i in 0..reg.len() {
            for j in i + 1..reg.len() {
                if reg.distance(i, j) < radius {
                    out.insert((i, j));
                }
            }
        }
        out
    }

    pub fn ancilla_mask(&self) -> Vec<bool> {
        self.register.atoms.iter().map(|a| a.is_ancilla).collect()
    }

    /// Origin edges recovered from the geometry: direct blockade edges between
    /// origin atoms plus one edge per ancilla chain.
    pub fn projected_edges(&self) -> BTreeSet<(usize, usize)> {
        let n = self.origin.len();
        let mut out: BTreeSet<_> = self
            .induced_edges()
            .into_iter()
            .filter(|&(a, b)| a < n && b < n)
            .collect();
        for (u, v) in self.link_map.keys() {
            let a = self.origin.index_of(u).expect("linked vertex in origin");
            let b = self.origin.index_of(v).expect("linked vertex in origin");
            out.insert((a.min(b), a.max(b)));
        }
        out
    }

    fn atom_index(&self, id: &str) -> Option<usize> {
        self.intended.index_of(id)
    }

    /// Rebuilds an embedding from a bare register: the intended graph is the
    /// disk graph at `blockade_radius`, and every ancilla path between two
    /// origin atoms becomes a linked origin edge.
    pub fn from_register(register: Register, blockade_radius: f64) -> Result<Self> {
        let n_origin = register.atoms.iter().take_while(|a| !a.is_ancilla).count();
        if register.atoms[n_origin..].iter().any(|a| !a.is_ancilla) {
            return Err(Error::parse(
                "atoms",
                "ancilla atoms must follow every non-ancilla atom",
            ));
        }
        let intended = register.disk_graph(blockade_radius)?;
        let keep: Vec<usize> = (0..n_origin).collect();
        let mut origin = intended.induced(&keep)?;
        let mut link_map = BTreeMap::new();
        let mut visited = BTreeSet::new();
        for start in n_origin..register.len() {
            if visited.contains(&start) {
                continue;
            }
            // collect the ancilla component and the origin atoms it touches
            let mut stack = vec![start];
            let mut chain = Vec::new();
            let mut ends = BTreeSet::new();
            while let Some(a) = stack.pop() {
                if !visited.insert(a) {
                    continue;
                }
                chain.push(a);
                for b in 0..register.len() {
                    if intended.has_edge(a, b) {
                        if b < n_origin {
                            ends.insert(b);
                        } else if !visited.contains(&b) {
                            stack.push(b);
                        }
                    }
                }
            }
            let ends: Vec<usize> = ends.into_iter().collect();
            if ends.len() != 2 || chain.len() % 2 != 0 {
                return Err(Error::parse(
                    "atoms",
                    format!(
                        "ancilla group at `{}` is not an even chain between two atoms",
                        register.atoms[start].id
                    ),
                ));
            }
            // order the chain from the first endpoint
            let mut ordered = Vec::with_capacity(chain.len());
            let mut prev = ends[0];
            let mut remaining: BTreeSet<usize> = chain.into_iter().collect();
            while !remaining.is_empty() {
                let next = *remaining
                    .iter()
                    .find(|&&c| intended.has_edge(prev, c))
                    .ok_or_else(|| Error::parse("atoms", "ancilla chain is not a path"))?;
                remaining.remove(&next);
                ordered.push(register.atoms[next].id.clone());
                prev = next;
            }
            origin.add_edge(ends[0], ends[1])?;
            link_map.insert(
                (origin.id(ends[0]).to_string(), origin.id(ends[1]).to_string()),
                ordered,
            );
        }
        Ok(Self {
            register,
            blockade_radius,
            intended,
            origin,
            link_map,
        })
    }
}

/// `(c6 / L_edge⁶, c6 / L_nonedge⁶)` clamped to the device ceiling.
pub fn omega_bounds(emb: &Embedding, dev: &DeviceParams) -> Result<OmegaBand> {
    let reg = &emb.register;
    let g = &emb.intended;
    let mut longest_edge: Option<f64> = None;
    let mut shortest_gap: Option<f64> = None;
    for i in 0..reg.len() {
        for j in i + 1..reg.len() {
            let d = reg.distance(i, j);
            if g.has_edge(i, j) {
                longest_edge = Some(longest_edge.map_or(d, |m| m.max(d)));
            } else {
                shortest_gap = Some(shortest_gap.map_or(d, |m| m.min(d)));
            }
        }
    }
    let max = longest_edge.map_or(dev.omega_max, |d| dev.interaction(d).min(dev.omega_max));
    let min = shortest_gap.map_or(0.0, |d| dev.interaction(d));
    if min >= max {
        let (le, sg) = (longest_edge.unwrap_or(0.0), shortest_gap.unwrap_or(f64::INFINITY));
        let floor = le.max(dev.min_blockade_radius());
        let mut offending = Vec::new();
        for i in 0..reg.len() {
            for j in i + 1..reg.len() {
                let d = reg.distance(i, j);
                let bad = if g.has_edge(i, j) { d >= sg } else { d <= floor };
                if bad {
                    offending.push(format!(
                        "{}({}, {}) at {d:.2} µm",
                        if g.has_edge(i, j) { "edge " } else { "non-edge " },
                        g.id(i),
                        g.id(j)
                    ));
                }
            }
        }
        return Err(Error::Infeasible(format!(
            "no Rabi frequency separates edges from non-edges: {}",
            offending.join("; ")
        )));
    }
    Ok(OmegaBand { min, max })
}

// ---------------------------------------------------------------------------
// Layout

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutConfig {
    pub iterations: usize,
    pub attempts: usize,
    /// Non-edges are pushed at least this multiple of the spacing apart.
    pub gap_ratio: f64,
    /// Edges longer than this multiple of the spacing are routed as links.
    pub stretch_tolerance: f64,
    /// Adjacent atoms are kept at least this multiple of the spacing apart.
    pub closest_ratio: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            attempts: 5,
            gap_ratio: 1.5,
            stretch_tolerance: 1.1,
            closest_ratio: 0.6,
        }
    }
}

pub fn layout(g: &WeightedGraph, dev: &DeviceParams, spacing: f64, seed: u64) -> Result<Embedding> {
    layout_with(g, dev, spacing, seed, &LayoutConfig::default())
}

/// Places `g` on a register. Graphs that carry positions keep them; others get
/// a seeded force-directed placement. Edges the geometry cannot realize are
/// routed through quantum links.
pub fn layout_with(
    g: &WeightedGraph,
    dev: &DeviceParams,
    spacing: f64,
    seed: u64,
    cfg: &LayoutConfig,
) -> Result<Embedding> {
    dev.validate()?;
    if g.is_empty() {
        return Err(Error::InvalidParameter("cannot embed an empty graph".into()));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::InvalidParameter(format!("spacing {spacing} must be > 0")));
    }
    if let Some(pos) = g.positions() {
        return embed_positions(g, pos.to_vec(), &long_edges(g, pos), dev);
    }
    if g.len() == 1 {
        return embed_positions(g, vec![[0.0, 0.0]], &[], dev);
    }

    // every attempt runs; the smallest register wins, the earliest on ties
    let mut best: Option<Embedding> = None;
    let mut last_err = None;
    for attempt in 0..cfg.attempts {
        let mut rng = rng::stream(seed, "layout", attempt as u64);
        let mut links: BTreeSet<(usize, usize)> = BTreeSet::new();
        let pos = loop {
            let pos = force_layout(g, &links, spacing, dev.min_spacing, cfg, &mut rng);
            let worst = g
                .edges()
                .filter(|e| !links.contains(e))
                .map(|(a, b)| ((a, b), dist(pos[a], pos[b])))
                .filter(|(_, d)| *d > spacing * cfg.stretch_tolerance)
                .max_by(|x, y| x.1.total_cmp(&y.1));
            match worst {
                Some((e, _)) => {
                    links.insert(e);
                }
                None => break pos,
            }
        };
        let links: Vec<_> = links.into_iter().collect();
        match embed_positions(g, pos, &links, dev) {
            Ok(emb) => {
                if best.as_ref().is_none_or(|b| emb.register.len() < b.register.len()) {
                    best = Some(emb);
                }
            }
            Err(e) => {
                log::debug!("layout attempt {attempt} failed: {e}");
                last_err = Some(e);
            }
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Infeasible("layout failed".into())))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

// Edges at least as long as the closest non-edge pair can never be direct.
fn long_edges(g: &WeightedGraph, pos: &[[f64; 2]]) -> Vec<(usize, usize)> {
    let mut gap = f64::INFINITY;
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            if !g.has_edge(i, j) {
                gap = gap.min(dist(pos[i], pos[j]));
            }
        }
    }
    g.edges()
        .filter(|&(a, b)| dist(pos[a], pos[b]) >= gap)
        .collect()
}

fn force_layout(
    g: &WeightedGraph,
    links: &BTreeSet<(usize, usize)>,
    spacing: f64,
    min_spacing: f64,
    cfg: &LayoutConfig,
    rng: &mut impl Rng,
) -> Vec<[f64; 2]> {
    let n = g.len();
    let side = spacing * (n as f64).sqrt() * 1.5;
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.gen_range(0.0..side), rng.gen_range(0.0..side)])
        .collect();
    let gap = cfg.gap_ratio * spacing;
    let closest = (cfg.closest_ratio * spacing).max(min_spacing * 1.05);
    let iters = cfg.iterations.max(1);
    let mut force = vec![[0.0f64; 2]; n];
    for it in 0..iters {
        let temperature = spacing * (0.2 * (1.0 - it as f64 / iters as f64) + 0.002);
        force.iter_mut().for_each(|f| *f = [0.0, 0.0]);
        for i in 0..n {
            for j in i + 1..n {
                let dx = pos[j][0] - pos[i][0];
                let dy = pos[j][1] - pos[i][1];
                let d = dx.hypot(dy).max(1e-9);
                let spring = g.has_edge(i, j) && !links.contains(&(i, j));
                // positive pulls together; edges only need to be short enough
                let pull = if spring {
                    if d > spacing {
                        d - spacing
                    } else if d < closest {
                        -(closest - d) * 2.0
                    } else {
                        0.0
                    }
                } else if d < gap {
                    -(gap - d) * 2.0
                } else {
                    0.0
                };
                let (ux, uy) = (dx / d, dy / d);
                force[i][0] += pull * ux;
                force[i][1] += pull * uy;
                force[j][0] -= pull * ux;
                force[j][1] -= pull * uy;
            }
        }
        for (p, f) in pos.iter_mut().zip(&force) {
            let m = (0.5 * f[0]).hypot(0.5 * f[1]);
            let scale = if m > temperature { temperature / m } else { 1.0 };
            p[0] += 0.5 * f[0] * scale;
            p[1] += 0.5 * f[1] * scale;
        }
    }
    pos
}

/// Builds the embedding from fixed origin positions, routing `links` through
/// ancilla chains.
fn embed_positions(
    g: &WeightedGraph,
    pos: Vec<[f64; 2]>,
    links: &[(usize, usize)],
    dev: &DeviceParams,
) -> Result<Embedding> {
    let register = Register {
        atoms: (0..g.len())
            .map(|i| Atom {
                id: g.id(i).to_string(),
                x: pos[i][0],
                y: pos[i][1],
                weight: g.weights()[i],
                is_ancilla: false,
            })
            .collect(),
    };
    let mut intended = WeightedGraph::new(g.ids().to_vec(), g.weights().to_vec())?;
    for (a, b) in g.edges() {
        if !links.contains(&(a, b)) {
            intended.add_edge(a, b)?;
        }
    }
    let mut origin = g.clone();
    origin.set_positions(pos)?;
    let mut emb = Embedding {
        register,
        blockade_radius: 0.0,
        intended,
        origin,
        link_map: BTreeMap::new(),
    };
    for &(a, b) in links {
        let (u, v) = (g.id(a).to_string(), g.id(b).to_string());
        emb = insert_quantum_link(&emb, &u, &v, dev)?;
    }
    finalize(emb, dev)
}

fn finalize(mut emb: Embedding, dev: &DeviceParams) -> Result<Embedding> {
    emb.register.check_spacing(dev.min_spacing)?;
    let band = omega_bounds(&emb, dev)?;
    emb.blockade_radius = blockade_radius(band.mid(), dev)?;
    Ok(emb)
}

/// Detuning weight of the ancillas on a link between vertices of weights
/// `wu` and `wv`. Any value above `min(wu, wv)` makes violating the linked
/// edge strictly worse than dropping one endpoint.
pub fn link_ancilla_weight(wu: f64, wv: f64) -> f64 {
    1.5 * wu.max(wv)
}

/// Realizes origin edge `(u, v)` with the smallest even chain of ancillas
/// (at most six) whose hops fit the blockade band and whose atoms keep clear
/// of every other atom.
pub fn insert_quantum_link(emb: &Embedding, u: &str, v: &str, dev: &DeviceParams) -> Result<Embedding> {
    insert_link_with(emb, u, v, dev, LinkParity::Even)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkParity {
    Even,
    /// Single-ancilla chain; never produced by layout, kept to demonstrate
    /// why parity matters.
    Odd,
}

pub fn insert_link_with(
    emb: &Embedding,
    u: &str,
    v: &str,
    dev: &DeviceParams,
    parity: LinkParity,
) -> Result<Embedding> {
    let routing = || Error::Routing {
        u: u.to_string(),
        v: v.to_string(),
    };
    let (ou, ov) = (
        emb.origin.index_of(u).ok_or_else(|| Error::UnknownVertex(u.into()))?,
        emb.origin.index_of(v).ok_or_else(|| Error::UnknownVertex(v.into()))?,
    );
    if !emb.origin.has_edge(ou, ov) {
        return Err(Error::InvalidParameter(format!("({u}, {v}) is not an edge")));
    }
    let (iu, iv) = (emb.atom_index(u).expect("origin atom"), emb.atom_index(v).expect("origin atom"));
    let reg = &emb.register;

    let mut longest_edge: f64 = 0.0;
    let mut shortest_gap = f64::INFINITY;
    for i in 0..reg.len() {
        for j in i + 1..reg.len() {
            if (i, j) == (iu.min(iv), iu.max(iv)) {
                continue;
            }
            let d = reg.distance(i, j);
            if emb.intended.has_edge(i, j) {
                longest_edge = longest_edge.max(d);
            } else {
                shortest_gap = shortest_gap.min(d);
            }
        }
    }
    let r_dev = dev.min_blockade_radius();
    let hop_cap = if longest_edge > 0.0 { longest_edge } else { 0.75 * r_dev };
    let floor = shortest_gap.min(1.2 * hop_cap).max(r_dev * 1.001);
    if floor <= hop_cap {
        return Err(routing());
    }
    let pu = [reg.atoms[iu].x, reg.atoms[iu].y];
    let pv = [reg.atoms[iv].x, reg.atoms[iv].y];
    let chord = dist(pu, pv);
    if chord < floor {
        return Err(routing());
    }

    let counts: &[usize] = match parity {
        LinkParity::Even => &[2, 4, 6],
        LinkParity::Odd => &[1, 3, 5],
    };
    for &k in counts {
        let hops = k + 1;
        for frac in [1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7] {
            let h = frac * hop_cap;
            if h < dev.min_spacing || chord > hops as f64 * h {
                continue;
            }
            for side in [1.0, -1.0] {
                let Some(chain) = arc_points(pu, pv, hops, h, side) else {
                    continue;
                };
                if chain_clear(reg, &chain, iu, iv, h, floor) {
                    return Ok(commit_link(emb, u, v, iu, iv, &chain));
                }
            }
        }
    }
    Err(routing())
}

/// Interior points of `hops` equal chords of length `h` along a circular arc
/// from `a` to `b` (a straight line when the chords exactly span the gap).
fn arc_points(a: [f64; 2], b: [f64; 2], hops: usize, h: f64, side: f64) -> Option<Vec<[f64; 2]>> {
    let chord = dist(a, b);
    let n = hops as f64;
    let ratio = chord / h;
    if ratio > n + 1e-12 {
        return None;
    }
    let (ux, uy) = ((b[0] - a[0]) / chord, (b[1] - a[1]) / chord);
    if (n - ratio).abs() < 1e-9 {
        return Some(
            (1..hops)
                .map(|i| {
                    let t = i as f64 * h;
                    [a[0] + ux * t, a[1] + uy * t]
                })
                .collect(),
        );
    }
    // sin(nα)/sin(α) = chord/h, decreasing from n to 0 on (0, π/n)
    let f = |alpha: f64| (n * alpha).sin() / alpha.sin() - ratio;
    let (mut lo, mut hi) = (1e-12, PI / n - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let radius = h / (2.0 * alpha.sin());
    // centre lies on the perpendicular bisector
    let half = 0.5 * chord;
    let offset = (radius * radius - half * half).max(0.0).sqrt();
    let (px, py) = (-uy * side, ux * side);
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    // arc spans 2nα; below a half turn the centre sits on the far side
    let sign = if n * alpha < PI / 2.0 { -1.0 } else { 1.0 };
    let centre = [mid[0] + sign * offset * px, mid[1] + sign * offset * py];
    let start = (a[1] - centre[1]).atan2(a[0] - centre[0]);
    let end = (b[1] - centre[1]).atan2(b[0] - centre[0]);
    let mut sweep = end - start;
    let total = 2.0 * n * alpha;
    // pick the direction that sweeps exactly `total`
    while sweep <= -PI {
        sweep += 2.0 * PI;
    }
    while sweep > PI {
        sweep -= 2.0 * PI;
    }
    let dir = if (sweep.abs() - total).abs() < 1e-6 {
        sweep.signum()
    } else {
        -sweep.signum()
    };
    let pts: Vec<[f64; 2]> = (1..hops)
        .map(|i| {
            let th = start + dir * 2.0 * alpha * i as f64;
            [centre[0] + radius * th.cos(), centre[1] + radius * th.sin()]
        })
        .collect();
    // reject numerically inconsistent arcs
    let mut prev = a;
    for p in pts.iter().chain(std::iter::once(&b)) {
        if (dist(prev, *p) - h).abs() > 1e-6 * h.max(1.0) {
            return None;
        }
        prev = *p;
    }
    Some(pts)
}

fn chain_clear(reg: &Register, chain: &[[f64; 2]], iu: usize, iv: usize, hop: f64, floor: f64) -> bool {
    let pu = [reg.atoms[iu].x, reg.atoms[iu].y];
    let pv = [reg.atoms[iv].x, reg.atoms[iv].y];
    let mut full = vec![pu];
    full.extend_from_slice(chain);
    full.push(pv);
    // chain atoms against each other and the endpoints
    for i in 0..full.len() {
        for j in i + 1..full.len() {
            let d = dist(full[i], full[j]);
            if j == i + 1 {
                if d > hop * (1.0 + 1e-9) {
                    return false;
                }
            } else if d < floor {
                return false;
            }
        }
    }
    // chain atoms against the rest of the register
    for (k, atom) in reg.atoms.iter().enumerate() {
        if k == iu || k == iv {
            continue;
        }
        let p = [atom.x, atom.y];
        if chain.iter().any(|c| dist(*c, p) < floor) {
            return false;
        }
    }
    true
}

fn commit_link(emb: &Embedding, u: &str, v: &str, iu: usize, iv: usize, chain: &[[f64; 2]]) -> Embedding {
    let mut register = emb.register.clone();
    let w = link_ancilla_weight(register.atoms[iu].weight, register.atoms[iv].weight);
    let base = register.len();
    let ids: Vec<String> = (0..chain.len()).map(|i| format!("{u}~{v}#{i}")).collect();
    for (id, p) in ids.iter().zip(chain) {
        register.atoms.push(Atom {
            id: id.clone(),
            x: p[0],
            y: p[1],
            weight: w,
            is_ancilla: true,
        });
    }
    let mut intended =
        WeightedGraph::new(register.atoms.iter().map(|a| a.id.clone()).collect(), register.weights())
            .expect("unique atom ids");
    for (a, b) in emb.intended.edges() {
        if (a, b) != (iu.min(iv), iu.max(iv)) {
            intended.add_edge(a, b).expect("valid edge");
        }
    }
    let mut path = vec![iu];
    path.extend(base..base + chain.len());
    path.push(iv);
    for w in path.windows(2) {
        intended.add_edge(w[0], w[1]).expect("valid edge");
    }
    let (ou, ov) = (emb.origin.index_of(u).unwrap(), emb.origin.index_of(v).unwrap());
    let key = if ou < ov {
        (u.to_string(), v.to_string())
    } else {
        (v.to_string(), u.to_string())
    };
    let mut link_chain = ids;
    if ou > ov {
        link_chain.reverse();
    }
    let mut link_map = emb.link_map.clone();
    link_map.insert(key, link_chain);
    Embedding {
        register,
        blockade_radius: emb.blockade_radius,
        intended,
        origin: emb.origin.clone(),
        link_map,
    }
}

/// Embedding with a refreshed blockade radius after manual edits.
pub fn refresh(emb: Embedding, dev: &DeviceParams) -> Result<Embedding> {
    finalize(emb, dev)
}

/// Removes ancilla bits from every outcome and merges identical results.
pub fn strip_ancillas(h: &Histogram, emb: &Embedding) -> Result<Histogram> {
    let mask = emb.ancilla_mask();
    let mut out = Histogram::default();
    for (bits, &count) in h.counts() {
        if bits.len() != mask.len() {
            return Err(Error::LengthMismatch {
                expected: mask.len(),
                got: bits.len(),
            });
        }
        let kept: String = bits
            .chars()
            .zip(&mask)
            .filter_map(|(c, anc)| (!anc).then_some(c))
            .collect();
        out.add(kept, count);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegisterFile {
    pub atoms: Vec<Atom>,
    pub blockade_radius: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<LinkRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_band: Option<OmegaBand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkRecord {
    pub u: String,
    pub v: String,
    pub ancillas: Vec<String>,
}

impl RegisterFile {
    pub fn from_embedding(emb: &Embedding, dev: &DeviceParams) -> Self {
        Self {
            atoms: emb.register.atoms.clone(),
            blockade_radius: emb.blockade_radius,
            links: emb
                .link_map
                .iter()
                .map(|((u, v), c)| LinkRecord {
                    u: u.clone(),
                    v: v.clone(),
                    ancillas: c.clone(),
                })
                .collect(),
            omega_band: omega_bounds(emb, dev).ok(),
            meta: None,
        }
    }

    pub fn into_embedding(self) -> Result<Embedding> {
        if !(self.blockade_radius.is_finite() && self.blockade_radius > 0.0) {
            return Err(Error::parse("blockade_radius", "must be > 0"));
        }
        Embedding::from_register(Register::new(self.atoms), self.blockade_radius)
    }
}

pub fn read_register(path: &Path) -> Result<Embedding> {
    let text = std::fs::read_to_string(path)?;
    let file: RegisterFile = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    file.into_embedding()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{brute_force_mwis, VertexSubset};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dev() -> DeviceParams {
        DeviceParams::default()
    }

    fn positioned(ids: usize, pos: &[[f64; 2]], edges: &[(usize, usize)]) -> WeightedGraph {
        let mut g = WeightedGraph::from_edge_list(ids, edges).unwrap();
        g.set_positions(pos.to_vec()).unwrap();
        g
    }

    #[test]
    fn blockade_radius_examples() {
        let d = DeviceParams {
            c6: 64.0,
            ..dev()
        };
        assert!((blockade_radius(1.0, &d).unwrap() - 2.0).abs() < 1e-12);
        assert!(blockade_radius(0.0, &d).is_err());
        assert!(blockade_radius(-1.0, &d).is_err());

        let omegas: Vec<f64> = (1..=20).map(|i| i as f64 * 0.8).collect();
        let radii: Vec<f64> = omegas.iter().map(|&o| blockade_radius(o, &dev()).unwrap()).collect();
        assert!(radii.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn blockade_radius_inverts_interaction() {
        // bisection on U(r) = Ω, independent of the closed form
        let omega = 12.57;
        let d = dev();
        let (mut lo, mut hi) = (1.0, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if d.interaction(mid) > omega {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = blockade_radius(omega, &d).unwrap();
        assert!((r - 0.5 * (lo + hi)).abs() < 1e-9, "{r} vs {lo}");
    }

    #[test]
    fn two_atom_band() {
        let g = positioned(2, &[[0.0, 0.0], [8.0, 0.0]], &[(0, 1)]);
        let wide = DeviceParams { omega_max: 30.0, ..dev() };
        let emb = layout(&g, &wide, 8.0, 0).unwrap();
        let band = omega_bounds(&emb, &wide).unwrap();
        assert_eq!(band.min, 0.0);
        assert!((band.max - wide.c6 / 8f64.powi(6)).abs() < 1e-9);
        // the device ceiling clamps the same geometry
        assert_eq!(omega_bounds(&emb, &dev()).unwrap().max, dev().omega_max);
    }

    #[test]
    fn triangle_keeps_edges_below_ceiling() {
        let h = 6.0 * 3f64.sqrt() / 2.0;
        let g = positioned(3, &[[0.0, 0.0], [6.0, 0.0], [3.0, h]], &[(0, 1), (1, 2), (0, 2)]);
        let emb = layout(&g, &dev(), 6.0, 0).unwrap();
        let band = omega_bounds(&emb, &dev()).unwrap();
        assert!(band.max <= dev().c6 / 6f64.powi(6));
        for o in [0.5, 2.0, 8.0, band.max * 0.999] {
            let r = blockade_radius(o, &dev()).unwrap();
            assert_eq!(emb.induced_edges_at(r).len(), 3);
        }
    }

    #[test]
    fn square_band_reproduces_graph() {
        let pos = [[0.0, 0.0], [6.0, 0.0], [6.0, 6.0], [0.0, 6.0]];
        let g = positioned(4, &pos, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let emb = layout(&g, &dev(), 6.0, 0).unwrap();
        let band = omega_bounds(&emb, &dev()).unwrap();
        let diag = 72f64.sqrt();
        assert!((band.min - dev().c6 / diag.powi(6)).abs() < 1e-9);
        assert!(band.min < band.max);
        let expected: BTreeSet<_> = g.edges().collect();
        for i in 1..=10 {
            let o = band.min + (band.max - band.min) * i as f64 / 11.0;
            let r = blockade_radius(o, &dev()).unwrap();
            assert_eq!(emb.induced_edges_at(r), expected);
        }
    }

    #[test]
    fn infeasible_geometry_is_reported() {
        // two atoms 5 µm apart that must not interact
        let g = positioned(2, &[[0.0, 0.0], [5.0, 0.0]], &[]);
        let err = layout(&g, &dev(), 6.0, 0).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
    }

    #[test]
    fn single_vertex_and_path() {
        let g = WeightedGraph::from_edge_list(1, &[]).unwrap();
        let emb = layout(&g, &dev(), 6.0, 0).unwrap();
        assert_eq!(emb.register.positions(), vec![[0.0, 0.0]]);

        let pos: Vec<[f64; 2]> = (0..4).map(|i| [6.0 * i as f64, 0.0]).collect();
        let p4 = positioned(4, &pos, &[(0, 1), (1, 2), (2, 3)]);
        let emb = layout(&p4, &dev(), 6.0, 0).unwrap();
        assert_eq!(emb.register.ancilla_count(), 0);
        let band = omega_bounds(&emb, &dev()).unwrap();
        assert!(band.min < band.max);
        assert_eq!(emb.induced_edges(), p4.edges().collect());
    }

    #[test]
    fn force_directed_path_and_cycle() {
        for g in [
            WeightedGraph::from_edge_list(4, &[(0, 1), (1, 2), (2, 3)]).unwrap(),
            WeightedGraph::from_edge_list(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap(),
        ] {
            let emb = layout(&g, &dev(), 6.0, 3).unwrap();
            assert_eq!(emb.projected_edges(), g.edges().collect());
            omega_bounds(&emb, &dev()).unwrap();
        }
    }

    #[test]
    fn layout_is_reproducible() {
        let g = WeightedGraph::from_edge_list(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 3)])
            .unwrap();
        let a = layout(&g, &dev(), 6.0, 11).unwrap();
        let b = layout(&g, &dev(), 6.0, 11).unwrap();
        assert_eq!(a.register, b.register);
    }

    // Three atoms on a line with the far edge forced through a link.
    fn linked_line() -> (WeightedGraph, Embedding) {
        let pos = [[-6.0, 0.0], [0.0, 0.0], [18.0, 0.0]];
        let g = positioned(3, &pos, &[(0, 1), (1, 2)]);
        let emb = embed_positions(&g, pos.to_vec(), &[(1, 2)], &dev()).unwrap();
        (g, emb)
    }

    #[test]
    fn straight_link_is_equidistant() {
        let (g, emb) = linked_line();
        assert_eq!(emb.register.ancilla_count(), 2);
        let xs: Vec<f64> = emb.register.atoms.iter().map(|a| a.x).collect();
        assert!((xs[3] - 6.0).abs() < 1e-9 && (xs[4] - 12.0).abs() < 1e-9, "{xs:?}");
        assert!(emb.register.atoms[3].weight > 1.0);
        assert_eq!(emb.projected_edges(), g.edges().collect());
    }

    fn augmented_projection(emb: &Embedding) -> Vec<String> {
        let n = emb.origin.len();
        let mut out: Vec<String> = brute_force_mwis(&emb.intended)
            .unwrap()
            .iter()
            .map(|s| s.to_bitstring()[..n].to_string())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn mwis_strings(g: &WeightedGraph) -> Vec<String> {
        brute_force_mwis(g).unwrap().iter().map(VertexSubset::to_bitstring).collect()
    }

    #[test]
    fn linked_mis_matches_original() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut done = 0;
        for _ in 0..500 {
            if done == 20 {
                break;
            }
            let (g, far) = random_linked_instance(&mut rng, 8);
            let emb = match layout(&g, &dev(), 6.0, 0) {
                Ok(e) => e,
                Err(_) => continue,
            };
            assert!(
                emb.link_map.contains_key(&(g.id(far.0).into(), g.id(far.1).into())),
                "{:?} {:?} {:?}",
                far,
                emb.link_map,
                g.positions()
            );
            assert!(emb.link_map.values().all(|c| c.len() % 2 == 0));
            assert_eq!(augmented_projection(&emb), mwis_strings(&g));
            done += 1;
        }
        assert_eq!(done, 20);
    }

    // Random unit-disk point set with one extra edge between two far atoms.
    pub(crate) fn random_linked_instance(rng: &mut ChaCha8Rng, max_n: usize) -> (WeightedGraph, (usize, usize)) {
        loop {
            let n = rng.gen_range(4..=max_n);
            let pos: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.gen_range(0.0..24.0), rng.gen_range(0.0..24.0)])
                .collect();
            let mut ok = true;
            let mut edges = Vec::new();
            let mut far = None;
            for i in 0..n {
                for j in i + 1..n {
                    let d = dist(pos[i], pos[j]);
                    if d < 4.5 || (d > 7.0 && d < 9.5) {
                        ok = false;
                    } else if d <= 7.0 {
                        edges.push((i, j));
                    } else if d > 14.0 && far.is_none() {
                        far = Some((i, j));
                    }
                }
            }
            let Some(far) = far else { continue };
            // the far pair must be longer than some non-edge, or it is
            // realizable directly
            let far_len = dist(pos[far.0], pos[far.1]);
            let shorter_gap = (0..n).any(|i| {
                (i + 1..n).any(|j| (i, j) != far && !edges.contains(&(i, j)) && dist(pos[i], pos[j]) < far_len)
            });
            if !ok || !shorter_gap {
                continue;
            }
            let mut g = positioned(n, &pos, &edges);
            g.add_edge(far.0, far.1).unwrap();
            return (g, far);
        }
    }

    #[test]
    fn odd_chain_flips_the_answer() {
        let g = positioned(2, &[[0.0, 0.0], [12.0, 0.0]], &[(0, 1)]);
        let base = embed_positions(&g, g.positions().unwrap().to_vec(), &[], &dev());
        // without the edge realized, the pair is simply too far apart
        let mut emb = base.unwrap_or_else(|_| unreachable!());
        emb.intended = WeightedGraph::new(g.ids().to_vec(), g.weights().to_vec()).unwrap();
        let odd = insert_link_with(&emb, "0", "1", &dev(), LinkParity::Odd).unwrap();
        assert_eq!(odd.register.ancilla_count(), 1);
        assert_eq!(augmented_projection(&odd), vec!["11".to_string()]);
        assert_eq!(mwis_strings(&g), vec!["01".to_string(), "10".to_string()]);

        let even = insert_quantum_link(&emb, "0", "1", &dev()).unwrap();
        assert_eq!(augmented_projection(&even), mwis_strings(&g));
    }

    #[test]
    fn strip_examples() {
        let (_, emb) = linked_line();
        // atom order: origin atoms then ancillas
        let mut h = Histogram::default();
        h.add("10101".into(), 5);
        h.add("10100".into(), 2);
        h.add("10110".into(), 3);
        let s = strip_ancillas(&h, &emb).unwrap();
        assert_eq!(s.counts().get("101"), Some(&10));
        assert_eq!(s.shots(), 10);

        let mut bad = Histogram::default();
        bad.add("10".into(), 1);
        assert!(strip_ancillas(&bad, &emb).is_err());

        let plain = positioned(2, &[[0.0, 0.0], [6.0, 0.0]], &[(0, 1)]);
        let emb = layout(&plain, &dev(), 6.0, 0).unwrap();
        let mut h = Histogram::default();
        h.add("10".into(), 4);
        h.add("01".into(), 3);
        assert_eq!(strip_ancillas(&h, &emb).unwrap(), h);
    }

    fn bare_embedding(ancilla: &[bool]) -> Embedding {
        let atoms: Vec<Atom> = ancilla
            .iter()
            .enumerate()
            .map(|(i, &a)| Atom { id: format!("q{i}"), x: 10.0 * i as f64, y: 0.0, weight: 1.0, is_ancilla: a })
            .collect();
        let register = Register::new(atoms);
        let intended = register.disk_graph(1.0).unwrap();
        Embedding {
            origin: intended.clone(),
            intended,
            register,
            blockade_radius: 1.0,
            link_map: BTreeMap::new(),
        }
    }

    #[test]
    fn strip_middle_ancilla() {
        let emb = bare_embedding(&[false, true, false]);
        let mut h = Histogram::default();
        h.add("101".into(), 5);
        let s = strip_ancillas(&h, &emb).unwrap();
        assert_eq!(s.counts().len(), 1);
        assert_eq!(s.counts().get("11"), Some(&5));
    }

    proptest::proptest! {
        #[test]
        fn strip_conserves_shots(
            mask in proptest::collection::vec(proptest::bool::ANY, 1..8),
            outcomes in proptest::collection::vec((0u32..256, 1u64..50), 0..20),
        ) {
            let emb = bare_embedding(&mask);
            let n = mask.len();
            let mut h = Histogram::default();
            for (bits, count) in outcomes {
                h.add(crate::simulator::bitstring(bits as usize % (1 << n), n), count);
            }
            let s = strip_ancillas(&h, &emb).unwrap();
            proptest::prop_assert_eq!(s.shots(), h.shots());
            let kept = mask.iter().filter(|a| !**a).count();
            proptest::prop_assert!(s.counts().keys().all(|b| b.len() == kept));
        }
    }

    #[test]
    fn stray_ancillas_are_rejected() {
        let emb = Embedding::from_register(
            Register::new(vec![
                Atom { id: "a".into(), x: 0.0, y: 0.0, weight: 1.0, is_ancilla: false },
                Atom { id: "b".into(), x: 30.0, y: 0.0, weight: 1.0, is_ancilla: false },
                Atom { id: "c".into(), x: 60.0, y: 0.0, weight: 1.0, is_ancilla: true },
                Atom { id: "d".into(), x: 66.0, y: 0.0, weight: 1.0, is_ancilla: true },
            ]),
            7.0,
        );
        // an ancilla pair touching no origin atom is malformed
        assert!(emb.is_err());
    }

    #[test]
    fn register_json_round_trip() {
        let (g, emb) = linked_line();
        let file = RegisterFile::from_embedding(&emb, &dev());
        let text = serde_json::to_string(&file).unwrap();
        let back: RegisterFile = serde_json::from_str(&text).unwrap();
        let emb2 = back.into_embedding().unwrap();
        assert_eq!(emb2.register, emb.register);
        assert_eq!(emb2.link_map, emb.link_map);
        assert_eq!(emb2.origin.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }
}
