// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Pharmacophore point sets and the binding interaction graph.
//!
//! A contact pairs one ligand point with one receptor point whose feature
//! kinds attract. Two contacts are compatible when they use distinct points
//! on both sides and the ligand-side distance matches the receptor-side
//! distance within a flexibility tolerance. Cliques of compatible contacts
//! are candidate binding poses.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexSubset, WeightedGraph};

/// Default flexibility tolerance, Å.
pub const DEFAULT_TAU: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PharmacophoreKind {
    HDonor,
    HAcceptor,
    Hydrophobe,
    Aromatic,
    PosIon,
    NegIon,
}

impl PharmacophoreKind {
    pub const ALL: [PharmacophoreKind; 6] = [
        PharmacophoreKind::HDonor,
        PharmacophoreKind::HAcceptor,
        PharmacophoreKind::Hydrophobe,
        PharmacophoreKind::Aromatic,
        PharmacophoreKind::PosIon,
        PharmacophoreKind::NegIon,
    ];
}

impl fmt::Display for PharmacophoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PharmacophorePoint {
    pub id: String,
    pub kind: PharmacophoreKind,
    /// Position in Å.
    #[serde(rename = "xyz")]
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub name: String,
    pub points: Vec<PharmacophorePoint>,
    /// Symmetric pairwise point distances, Å.
    pub distances: Vec<Vec<f64>>,
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl Molecule {
    pub fn new(name: impl Into<String>, points: Vec<PharmacophorePoint>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &points {
            if !seen.insert(p.id.as_str()) {
                return Err(Error::parse("points.id", format!("duplicate point id `{}`", p.id)));
            }
            if p.position.iter().any(|c| !c.is_finite()) {
                return Err(Error::parse(
                    "points.xyz",
                    format!("non-finite coordinate on point `{}`", p.id),
                ));
            }
        }
        let distances = points
            .iter()
            .map(|a| points.iter().map(|b| dist3(a.position, b.position)).collect())
            .collect();
        Ok(Self {
            name: name.into(),
            points,
            distances,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn centroid(&self) -> [f64; 3] {
        let n = self.points.len().max(1) as f64;
        let mut c = [0.0; 3];
        for p in &self.points {
            for (ci, x) in c.iter_mut().zip(p.position) {
                *ci += x / n;
            }
        }
        c
    }

    /// Uniformly scaled copy (coordinates multiplied by `factor`).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| PharmacophorePoint {
                position: p.position.map(|c| c * factor),
                ..p.clone()
            })
            .collect();
        Molecule::new(self.name.clone(), points)
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct MoleculeFile {
    name: String,
    points: Vec<PharmacophorePoint>,
}

pub fn parse_molecule(text: &str, context: &str) -> Result<Molecule> {
    let file: MoleculeFile =
        serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
    Molecule::new(file.name, file.points).map_err(|e| match e {
        Error::Parse { context: field, message } => Error::Parse {
            context: format!("{context}: {field}"),
            message,
        },
        other => other,
    })
}

pub fn load_molecule(path: &Path) -> Result<Molecule> {
    let text = std::fs::read_to_string(path)?;
    parse_molecule(&text, &path.display().to_string())
}

pub fn molecule_to_json(m: &Molecule) -> serde_json::Value {
    serde_json::to_value(MoleculeFile {
        name: m.name.clone(),
        points: m.points.clone(),
    })
    .expect("molecule serializes")
}

/// Symmetric attraction strengths between feature kinds; absent pairs are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTable {
    strength: BTreeMap<(PharmacophoreKind, PharmacophoreKind), f64>,
}

fn key(a: PharmacophoreKind, b: PharmacophoreKind) -> (PharmacophoreKind, PharmacophoreKind) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl InteractionTable {
    pub fn empty() -> Self {
        Self {
            strength: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, a: PharmacophoreKind, b: PharmacophoreKind, s: f64) -> Result<()> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::parse("pairs.s", format!("strength {s} must be >= 0")));
        }
        self.strength.insert(key(a, b), s);
        Ok(())
    }

    pub fn strength(&self, a: PharmacophoreKind, b: PharmacophoreKind) -> f64 {
        self.strength.get(&key(a, b)).copied().unwrap_or(0.0)
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Pair {
            a: PharmacophoreKind,
            b: PharmacophoreKind,
            s: f64,
        }
        #[derive(Deserialize)]
        struct File {
            pairs: Vec<Pair>,
        }
        let file: File =
            serde_json::from_str(text).map_err(|e| Error::parse(context, e.to_string()))?;
        let mut t = Self::empty();
        for p in file.pairs {
            t.set(p.a, p.b, p.s)?;
        }
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?, &path.display().to_string())
    }
}

impl Default for InteractionTable {
    /// Donor/acceptor and opposite charges attract fully; like hydrophobes and
    /// aromatics attract at half strength.
    fn default() -> Self {
        use PharmacophoreKind::*;
        let mut t = Self::empty();
        for (a, b, s) in [
            (HDonor, HAcceptor, 1.0),
            (Hydrophobe, Hydrophobe, 0.5),
            (Aromatic, Aromatic, 0.5),
            (PosIon, NegIon, 1.0),
        ] {
            t.set(a, b, s).expect("valid default");
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub ligand_point: String,
    pub receptor_point: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BindingConfig {
    /// Flexibility tolerance, Å.
    pub tau: f64,
    /// Length scale λ of the optional `exp(-d/λ)` weight kernel; `None` leaves
    /// contact weights equal to the table strength.
    pub decay_length: Option<f64>,
}

impl Default for BindingConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            decay_length: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BindingGraph {
    pub graph: WeightedGraph,
    /// One contact per graph vertex, in vertex order.
    pub contacts: Vec<Contact>,
}

pub fn contact_id(ligand_point: &str, receptor_point: &str) -> String {
    format!("{ligand_point}-{receptor_point}")
}

pub fn build_binding_graph(
    ligand: &Molecule,
    receptor: &Molecule,
    table: &InteractionTable,
    config: &BindingConfig,
) -> Result<BindingGraph> {
    if !(config.tau.is_finite() && config.tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau = {} must be > 0", config.tau)));
    }
    if let Some(l) = config.decay_length {
        if !(l > 0.0) {
            return Err(Error::InvalidParameter(format!("decay length {l} must be > 0")));
        }
    }
    let (lc, rc) = (ligand.centroid(), receptor.centroid());
    // (ligand index, receptor index, weight)
    let mut pairs = Vec::new();
    for (i, lp) in ligand.points.iter().enumerate() {
        for (j, rp) in receptor.points.iter().enumerate() {
            let s = table.strength(lp.kind, rp.kind);
            if s <= 0.0 {
                continue;
            }
            let w = match config.decay_length {
                None => s,
                Some(l) => {
                    let d = (dist3(lp.position, lc) - dist3(rp.position, rc)).abs();
                    s * (-d / l).exp()
                }
            };
            pairs.push((i, j, w));
        }
    }

    let contacts: Vec<Contact> = pairs
        .iter()
        .map(|&(i, j, w)| Contact {
            ligand_point: ligand.points[i].id.clone(),
            receptor_point: receptor.points[j].id.clone(),
            weight: w,
        })
        .collect();
    let ids = contacts
        .iter()
        .map(|c| contact_id(&c.ligand_point, &c.receptor_point))
        .collect();
    let mut graph = WeightedGraph::new(ids, contacts.iter().map(|c| c.weight).collect())?;
    for (x, &(i, j, _)) in pairs.iter().enumerate() {
        for (y, &(k, l, _)) in pairs.iter().enumerate().skip(x + 1) {
            if i == k || j == l {
                continue;
            }
            let dl = ligand.distances[i][k];
            let dr = receptor.distances[j][l];
            if (dl - dr).abs() <= config.tau {
                graph.add_edge(x, y)?;
            }
        }
    }
    Ok(BindingGraph { graph, contacts })
}

/// The (ligand, receptor) point pairs of a clique of contacts.
pub fn pose_from_clique(clique: &VertexSubset, contacts: &[Contact]) -> Result<Vec<(String, String)>> {
    if clique.len() != contacts.len() {
        return Err(Error::LengthMismatch {
            expected: contacts.len(),
            got: clique.len(),
        });
    }
    let mut lig = HashSet::new();
    let mut rec = HashSet::new();
    let mut pose = Vec::new();
    for i in clique.indices() {
        let c = &contacts[i];
        if !lig.insert(c.ligand_point.as_str()) {
            return Err(Error::Pose(format!(
                "ligand point `{}` used twice",
                c.ligand_point
            )));
        }
        if !rec.insert(c.receptor_point.as_str()) {
            return Err(Error::Pose(format!(
                "receptor point `{}` used twice",
                c.receptor_point
            )));
        }
        pose.push((c.ligand_point.clone(), c.receptor_point.clone()));
    }
    Ok(pose)
}
