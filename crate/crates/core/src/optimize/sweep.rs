// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Full-factorial QAA grids.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::score::success_with;
use super::space::{Family, SearchSpace};
use super::vqaa::RunSettings;
use crate::error::Result;
use crate::register::{omega_bounds, DeviceParams, Embedding};
use crate::simulator::Hamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub omega: f64,
    pub delta: f64,
    /// ns
    pub time: f64,
    /// `NaN` when the cell lies outside the feasible parameters.
    pub success_prob: f64,
}

/// Parameter vector of a grid cell. The complex family splits `time`
/// evenly between the ramps and uses `delta` for both detuning bounds.
fn cell_params(family: Family, omega: f64, delta: f64, time: f64) -> Vec<f64> {
    match family {
        Family::Simple => vec![omega, delta, time],
        Family::Complex => vec![omega, delta, delta, 0.5 * time, 0.5 * time],
    }
}

pub fn qaa_sweep(
    emb: &Embedding,
    dev: &DeviceParams,
    family: Family,
    omegas: &[f64],
    deltas: &[f64],
    times: &[f64],
    settings: &RunSettings,
) -> Result<Vec<SweepCell>> {
    let band = omega_bounds(emb, dev)?;
    let space = SearchSpace::for_family(family, &band, dev)?;
    let ham = Hamiltonian::new(&emb.register, dev)?;
    let mut out = Vec::with_capacity(omegas.len() * deltas.len() * times.len());
    let mut index = 0u64;
    for &omega in omegas {
        for &delta in deltas {
            for &time in times {
                let x = cell_params(family, omega, delta, time);
                let success_prob = if band.contains(omega) {
                    match run_cell(emb, &ham, &space, dev, &x, settings, index) {
                        Ok(p) => p,
                        Err(e) if e.kind() == crate::ErrorKind::Numerical => return Err(e),
                        Err(e) => {
                            log::debug!("sweep cell ({omega}, {delta}, {time}) skipped: {e}");
                            f64::NAN
                        }
                    }
                } else {
                    f64::NAN
                };
                out.push(SweepCell {
                    omega,
                    delta,
                    time,
                    success_prob,
                });
                index += 1;
            }
        }
    }
    Ok(out)
}

fn run_cell(
    emb: &Embedding,
    ham: &Hamiltonian,
    space: &SearchSpace,
    dev: &DeviceParams,
    x: &[f64],
    settings: &RunSettings,
    index: u64,
) -> Result<f64> {
    let seq = space.sequence(x, dev)?;
    let mut psi = crate::simulator::StateVector::ground(ham.atoms());
    ham.evolve_from(&seq, &mut psi, settings.dt)?;
    let mut r = crate::rng::stream(settings.seed, "sweep", index);
    let h = crate::register::strip_ancillas(&crate::simulator::measure(&psi, settings.shots, &mut r), emb)?;
    Ok(success_with(&h, &emb.origin, &settings.score)?.probability)
}

/// `omega,delta,time,success_prob` rows; infeasible cells print `NaN`.
pub fn write_sweep_csv(mut w: impl Write, cells: &[SweepCell]) -> std::io::Result<()> {
    writeln!(w, "omega,delta,time,success_prob")?;
    for c in cells {
        writeln!(w, "{},{},{},{}", c.omega, c.delta, c.time, c.success_prob)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use crate::optimize::vqaa::Evaluator;
    use crate::optimize::score::success_probability;
    use crate::register::layout;

    fn pair() -> Embedding {
        let mut g = WeightedGraph::from_edge_list(2, &[(0, 1)]).unwrap();
        g.set_positions(vec![[0.0, 0.0], [6.0, 0.0]]).unwrap();
        layout(&g, &DeviceParams::default(), 6.0, 0).unwrap()
    }

    #[test]
    fn grid_shape_and_determinism() {
        let emb = pair();
        let dev = DeviceParams::default();
        let s = RunSettings { shots: 200, ..RunSettings::default() };
        let a = qaa_sweep(&emb, &dev, Family::Simple, &[5.0, 100.0], &[2.0, 4.0], &[500.0, 1000.0, 9000.0], &s).unwrap();
        assert_eq!(a.len(), 12);
        // Ω outside the band and over-long sequences are sentinels
        assert!(a.iter().filter(|c| c.omega == 100.0).all(|c| c.success_prob.is_nan()));
        assert!(a.iter().filter(|c| c.time == 9000.0).all(|c| c.success_prob.is_nan()));
        assert!(a.iter().filter(|c| c.omega == 5.0 && c.time < 5000.0).all(|c| (0.0..=1.0).contains(&c.success_prob)));
        let b = qaa_sweep(&emb, &dev, Family::Simple, &[5.0, 100.0], &[2.0, 4.0], &[500.0, 1000.0, 9000.0], &s).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        let mut csv = Vec::new();
        write_sweep_csv(&mut csv, &a).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 13);
    }

    #[test]
    fn single_cell_matches_direct_run() {
        let emb = pair();
        let dev = DeviceParams::default();
        let s = RunSettings { shots: 500, seed: 3, ..RunSettings::default() };
        let cell = qaa_sweep(&emb, &dev, Family::Simple, &[6.0], &[3.0], &[1500.0], &s).unwrap()[0];
        let band = omega_bounds(&emb, &dev).unwrap();
        let eval = Evaluator::new(&emb, &dev, SearchSpace::simple(&band, &dev).unwrap(), s).unwrap();
        let h = eval.histogram(&[6.0, 3.0, 1500.0], 500, "sweep", 0).unwrap();
        assert_eq!(cell.success_prob, success_probability(&h, &emb.origin).unwrap().probability);
    }
}
