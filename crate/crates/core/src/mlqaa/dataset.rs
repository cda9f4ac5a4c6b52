// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Geometric training registers and their VQAA labels.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{vqaa, Family, OptimizerKind, RunSettings, VqaaConfig};
use crate::pulse::ComplexParams;
use crate::register::{refresh, DeviceParams, Embedding, Register, RegisterFile};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Line,
    Rectangle,
    Triangle,
    TriangularLattice,
    Hexagon,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Line,
        ShapeKind::Rectangle,
        ShapeKind::Triangle,
        ShapeKind::TriangularLattice,
        ShapeKind::Hexagon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Line => "line",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::Triangle => "triangle",
            ShapeKind::TriangularLattice => "triangular_lattice",
            ShapeKind::Hexagon => "hexagon",
        }
    }
}

/// Size variants per family; a repeated size is a duplicate slot.
const SIZES: [(ShapeKind, [&str; 5]); 5] = [
    (ShapeKind::Line, ["2", "3", "4", "5", "6"]),
    (ShapeKind::Rectangle, ["2x2", "2x3", "2x4", "3x3", "2x2"]),
    (ShapeKind::Triangle, ["3", "6", "9", "3", "6"]),
    (ShapeKind::TriangularLattice, ["2x2", "2x3", "2x4", "3x3", "2x2"]),
    (ShapeKind::Hexagon, ["6", "7", "10", "6", "7"]),
];

/// Spacings for first occurrences of a size, µm.
pub const SPACINGS: [f64; 5] = [6.0, 7.0, 8.0, 9.0, 10.0];
/// Spacings for duplicate size slots, µm.
pub const DUPLICATE_SPACINGS: [f64; 5] = [6.5, 7.5, 8.5, 9.5, 11.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub size: String,
    /// Nearest-neighbour distance, µm.
    pub spacing: f64,
}

impl ShapeSpec {
    pub fn id(&self) -> String {
        format!("{}-{}-s{:.1}", self.kind.name(), self.size, self.spacing)
    }

    pub fn positions(&self) -> Result<Vec<[f64; 2]>> {
        let s = self.spacing;
        let h = 3f64.sqrt() / 2.0;
        let grid = |size: &str| -> Result<(usize, usize)> {
            let (a, b) = size
                .split_once('x')
                .ok_or_else(|| Error::InvalidParameter(format!("size `{size}` is not AxB")))?;
            let parse = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidParameter(format!("size `{size}` is not AxB")))
            };
            Ok((parse(a)?, parse(b)?))
        };
        let count = |size: &str| -> Result<usize> {
            size.parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("size `{size}` is not a count")))
        };
        let pts: Vec<[f64; 2]> = match self.kind {
            ShapeKind::Line => (0..count(&self.size)?).map(|i| [i as f64 * s, 0.0]).collect(),
            ShapeKind::Rectangle => {
                let (rows, cols) = grid(&self.size)?;
                (0..rows)
                    .flat_map(|r| (0..cols).map(move |c| [c as f64 * s, r as f64 * s]))
                    .collect()
            }
            ShapeKind::TriangularLattice => {
                let (rows, cols) = grid(&self.size)?;
                (0..rows)
                    .flat_map(|r| (0..cols).map(move |c| [(c as f64 + 0.5 * r as f64) * s, r as f64 * h * s]))
                    .collect()
            }
            ShapeKind::Triangle => {
                // 3 and 6 are filled triangles; 9 is the outline of the 4-row one
                let (rows, hollow) = match count(&self.size)? {
                    3 => (2, false),
                    6 => (3, false),
                    9 => (4, true),
                    n => return Err(Error::InvalidParameter(format!("no triangle with {n} atoms"))),
                };
                let mut pts = Vec::new();
                for r in 0..rows {
                    for c in 0..=r {
                        let interior = r > 0 && r < rows - 1 && c > 0 && c < r;
                        if hollow && interior {
                            continue;
                        }
                        pts.push([(c as f64 - 0.5 * r as f64) * s, -(r as f64) * h * s]);
                    }
                }
                pts
            }
            ShapeKind::Hexagon => {
                let ring = |cx: f64| -> Vec<[f64; 2]> {
                    (0..6)
                        .map(|k| {
                            let a = std::f64::consts::PI / 6.0 + k as f64 * std::f64::consts::PI / 3.0;
                            [cx + s * a.cos(), s * a.sin()]
                        })
                        .collect()
                };
                match count(&self.size)? {
                    6 => ring(0.0),
                    7 => {
                        let mut p = ring(0.0);
                        p.push([0.0, 0.0]);
                        p
                    }
                    10 => {
                        // two rings sharing an edge
                        let mut p = ring(0.0);
                        for q in ring(2.0 * h * s) {
                            if p.iter().all(|o| (o[0] - q[0]).hypot(o[1] - q[1]) > 1e-6 * s) {
                                p.push(q);
                            }
                        }
                        p
                    }
                    n => return Err(Error::InvalidParameter(format!("no hexagon shape with {n} atoms"))),
                }
            }
        };
        Ok(pts)
    }
}

/// One corpus register with nearest-neighbour intended edges.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedRegister {
    pub shape: ShapeSpec,
    pub register: Register,
}

impl GeneratedRegister {
    pub fn new(shape: ShapeSpec) -> Result<Self> {
        let register = Register::from_positions(&shape.positions()?);
        Ok(Self { shape, register })
    }

    pub fn id(&self) -> String {
        self.shape.id()
    }

    /// Embedding whose intended graph joins nearest neighbours, with the
    /// blockade radius centred in the feasible Ω band.
    pub fn embedding(&self, dev: &DeviceParams) -> Result<Embedding> {
        let emb = Embedding::from_register(self.register.clone(), 1.2 * self.shape.spacing)?;
        refresh(emb, dev)
    }
}

/// The 125-register corpus: five families × five sizes × five spacings.
/// Every register is checked against the device's spacing floor and Ω band.
pub fn generate_dataset(dev: &DeviceParams) -> Result<Vec<GeneratedRegister>> {
    let mut out = Vec::with_capacity(125);
    for (kind, sizes) in SIZES {
        for (slot, size) in sizes.iter().enumerate() {
            let duplicate = sizes[..slot].contains(size);
            let spacings = if duplicate { DUPLICATE_SPACINGS } else { SPACINGS };
            for spacing in spacings {
                let g = GeneratedRegister::new(ShapeSpec {
                    kind,
                    size: size.to_string(),
                    spacing,
                })?;
                g.embedding(dev)?;
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// Seeded shuffle of `0..len` split into (first 80%, last 20%).
pub fn train_test_split(len: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    split_fraction(len, 0.2, &mut rng::stream(seed, "split", 0))
}

pub(crate) fn split_fraction(len: usize, held: f64, r: &mut impl rand::Rng) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(r);
    let n_held = (held * len as f64).round() as usize;
    let keep = idx.split_off(len - n_held.min(len));
    (idx, keep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub rounds: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub shape: ShapeSpec,
    pub register: RegisterFile,
    pub family: Family,
    /// Parameters of the best VQAA trial.
    pub targets: ComplexParams,
    /// Score of the best trial; always > 0.
    pub score: f64,
    /// Confirmed normalized score of the best trial.
    pub normalized_score: f64,
    pub provenance: Provenance,
}

impl DatasetRecord {
    pub fn embedding(&self) -> Result<Embedding> {
        self.register.clone().into_embedding()
    }
}

/// Labels one register with the best complex-family TPE trial. `None` when
/// every trial scored zero, even after the second pass.
pub fn label_register(
    reg: &GeneratedRegister,
    dev: &DeviceParams,
    rounds: usize,
    settings: &RunSettings,
) -> Result<Option<DatasetRecord>> {
    let emb = reg.embedding(dev)?;
    let cfg = VqaaConfig {
        family: Family::Complex,
        optimizer: OptimizerKind::Tpe,
        rounds,
        ..VqaaConfig::default()
    };
    let out = vqaa(&emb, dev, &cfg, settings, &[])?;
    if out.low_confidence || out.best.score <= 0.0 {
        log::warn!("{}: no trial scored above zero, excluded", reg.id());
        return Ok(None);
    }
    Ok(Some(DatasetRecord {
        id: reg.id(),
        shape: reg.shape.clone(),
        register: RegisterFile::from_embedding(&emb, dev),
        family: Family::Complex,
        targets: ComplexParams::from_slice(&out.best.params)?,
        score: out.best.score,
        normalized_score: out.normalized_score,
        provenance: Provenance {
            rounds,
            seed: settings.seed,
        },
    }))
}

/// Labels every register; register `i` runs on seed stream `("label", i)`.
pub fn label_dataset(
    regs: &[GeneratedRegister],
    dev: &DeviceParams,
    rounds: usize,
    settings: &RunSettings,
) -> Result<(Vec<DatasetRecord>, usize)> {
    let mut records = Vec::with_capacity(regs.len());
    let mut excluded = 0;
    for (i, reg) in regs.iter().enumerate() {
        let s = RunSettings {
            seed: rng::derive_seed(settings.seed, "label", i as u64),
            ..*settings
        };
        match label_register(reg, dev, rounds, &s)? {
            Some(r) => records.push(r),
            None => excluded += 1,
        }
    }
    Ok((records, excluded))
}

pub fn write_dataset(path: &Path, records: &[DatasetRecord], meta: &serde_json::Value) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        let mut v = serde_json::to_value(r)?;
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

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRecord>> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DatasetRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(format!("{}:{}", path.display(), i + 1), e.to_string()))?;
        if !(rec.score > 0.0) {
            return Err(Error::parse(
                format!("{}:{}", path.display(), i + 1),
                "record score must be > 0",
            ));
        }
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::omega_bounds;

    #[test]
    fn corpus_has_125_feasible_registers() {
        let dev = DeviceParams::default();
        let regs = generate_dataset(&dev).unwrap();
        assert_eq!(regs.len(), 125);
        let mut ids: Vec<String> = regs.iter().map(|r| r.id()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 125);
        for r in &regs {
            r.register.check_spacing(dev.min_spacing).unwrap();
            let emb = r.embedding(&dev).unwrap();
            let band = omega_bounds(&emb, &dev).unwrap();
            assert!(band.max > band.min, "{}", r.id());
            // every atom has a neighbour at exactly one spacing
            for i in 0..r.register.len() {
                let nearest = (0..r.register.len())
                    .filter(|&j| j != i)
                    .map(|j| r.register.distance(i, j))
                    .fold(f64::INFINITY, f64::min);
                assert!((nearest - r.shape.spacing).abs() < 1e-9, "{}", r.id());
            }
            assert!(r.register.len() <= 10);
        }
        assert!(regs.iter().any(|r| r.shape.spacing == 11.0));
    }

    #[test]
    fn line_spacing_six() {
        let g = GeneratedRegister::new(ShapeSpec {
            kind: ShapeKind::Line,
            size: "4".into(),
            spacing: 6.0,
        })
        .unwrap();
        for i in 0..3 {
            assert!((g.register.distance(i, i + 1) - 6.0).abs() < 1e-12);
        }
        let emb = g.embedding(&DeviceParams::default()).unwrap();
        assert_eq!(emb.origin.edge_count(), 3);
    }

    #[test]
    fn shape_sizes() {
        let n = |kind, size: &str| {
            ShapeSpec {
                kind,
                size: size.into(),
                spacing: 7.0,
            }
            .positions()
            .unwrap()
            .len()
        };
        assert_eq!(n(ShapeKind::Triangle, "9"), 9);
        assert_eq!(n(ShapeKind::Hexagon, "10"), 10);
        assert_eq!(n(ShapeKind::TriangularLattice, "3x3"), 9);
        assert!(ShapeSpec {
            kind: ShapeKind::Hexagon,
            size: "5".into(),
            spacing: 7.0
        }
        .positions()
        .is_err());
    }

    #[test]
    fn split_is_seeded_partition() {
        let (a, b) = train_test_split(125, 4);
        assert_eq!((a.len(), b.len()), (100, 25));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort();
        assert_eq!(all, (0..125).collect::<Vec<_>>());
        assert_eq!(train_test_split(125, 4), (a, b));
        assert_ne!(train_test_split(125, 5).1, train_test_split(125, 4).1);
    }

    #[test]
    fn label_and_round_trip() {
        let dev = DeviceParams::default();
        let reg = GeneratedRegister::new(ShapeSpec {
            kind: ShapeKind::Line,
            size: "3".into(),
            spacing: 7.0,
        })
        .unwrap();
        let settings = RunSettings {
            shots: 200,
            seed: 9,
            ..RunSettings::default()
        };
        let rec = label_register(&reg, &dev, 12, &settings).unwrap().unwrap();
        assert!(rec.score > 0.0);
        assert_eq!(rec.provenance, Provenance { rounds: 12, seed: 9 });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_dataset(&path, std::slice::from_ref(&rec), &serde_json::json!({"seed": 9})).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(back[0].targets, rec.targets);
        assert_eq!(back[0].embedding().unwrap().register, reg.embedding(&dev).unwrap().register);
    }
}
