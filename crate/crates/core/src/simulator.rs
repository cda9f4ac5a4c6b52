// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! State-vector emulation of a globally driven Rydberg array.
//!
//! With ħ = 1 the Hamiltonian is
//! `H = Ω/2 Σ (e^{iφ}|0⟩⟨1| + h.c.) − δ Σ wᵢ nᵢ + Σ_{i<j} c6/Rᵢⱼ⁶ nᵢ nⱼ`
//! in rad/µs. Bit `k` of a basis index is atom `k` (1 = Rydberg), and the
//! matching bitstring lists atom 0 first.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{DriveSample, PulseSequence};
use crate::register::{DeviceParams, Register};

pub const DEFAULT_ATOM_CAP: usize = 16;
/// Default integration step, ns.
pub const DEFAULT_DT: f64 = 4.0;

const SERIES_TOL: f64 = 1e-12;
const MAX_SERIES_TERMS: usize = 100;
// Largest ‖H‖·h handled in a single series evaluation.
const MAX_SERIES_ARG: f64 = 10.0;
const DRIFT_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn ground(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                got: amps.len(),
            });
        }
        Ok(Self { n, amps })
    }

    pub fn atoms(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability of basis index `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Bitstring of basis index `index` over `n` atoms, atom 0 first.
pub fn bitstring(index: usize, n: usize) -> String {
    (0..n)
        .map(|k| if index >> k & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn index_of_bitstring(bits: &str) -> Result<usize> {
    bits.chars().enumerate().try_fold(0usize, |acc, (k, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << k),
        _ => Err(Error::parse("bitstring", format!("invalid character {c:?} in {bits:?}"))),
    })
}

/// Time-independent part of the Hamiltonian for a fixed register.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n: usize,
    /// `Σ_{i<j} Uᵢⱼ nᵢ nⱼ` per basis state.
    interaction: Vec<f64>,
    /// `Σ wᵢ nᵢ` per basis state.
    weights: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(reg: &Register, dev: &DeviceParams) -> Result<Self> {
        Self::with_cap(reg, dev, DEFAULT_ATOM_CAP)
    }

    pub fn with_cap(reg: &Register, dev: &DeviceParams, cap: usize) -> Result<Self> {
        let n = reg.len();
        if n == 0 {
            return Err(Error::InvalidParameter("register has no atoms".into()));
        }
        if n > cap {
            return Err(Error::SizeCap { n, cap });
        }
        let mut pair = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let r = reg.distance(i, j);
                if r <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "atoms `{}` and `{}` coincide",
                        reg.atoms[i].id, reg.atoms[j].id
                    )));
                }
                pair[i][j] = dev.interaction(r);
            }
        }
        let w = reg.weights();
        let dim = 1usize << n;
        let mut interaction = vec![0.0; dim];
        let mut weights = vec![0.0; dim];
        for s in 1..dim {
            // extend from the state without its highest set bit
            let top = usize::BITS as usize - 1 - s.leading_zeros() as usize;
            let rest = s & !(1 << top);
            let mut u = interaction[rest];
            let mut r = rest;
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                u += pair[j][top];
                r &= r - 1;
            }
            interaction[s] = u;
            weights[s] = weights[rest] + w[top];
        }
        Ok(Self {
            n,
            interaction,
            weights,
        })
    }

    pub fn atoms(&self) -> usize {
        self.n
    }

    pub fn interaction_diagonal(&self) -> &[f64] {
        &self.interaction
    }

    /// `out = H ψ` for the given drive.
    pub fn apply(&self, drive: &DriveSample, psi: &[Complex64], out: &mut [Complex64]) {
        self.apply_shifted(drive, 0.0, psi, out);
    }

    // `out = (H − shift) ψ`
    fn apply_shifted(&self, drive: &DriveSample, shift: f64, psi: &[Complex64], out: &mut [Complex64]) {
        for (s, o) in out.iter_mut().enumerate() {
            let d = self.interaction[s] - drive.delta * self.weights[s] - shift;
            *o = psi[s] * d;
        }
        if drive.omega == 0.0 {
            return;
        }
        let half = 0.5 * drive.omega;
        let dim = psi.len();
        if drive.phase == 0.0 {
            for k in 0..self.n {
                let b = 1usize << k;
                let mut base = 0;
                while base < dim {
                    for s in base..base + b {
                        let t = s | b;
                        out[s] += psi[t] * half;
                        out[t] += psi[s] * half;
                    }
                    base += 2 * b;
                }
            }
            return;
        }
        // ⟨0|H|1⟩ = Ω/2 e^{iφ}
        let down = Complex64::from_polar(half, drive.phase);
        let up = down.conj();
        for k in 0..self.n {
            let b = 1usize << k;
            let mut base = 0;
            while base < dim {
                for s in base..base + b {
                    let t = s | b;
                    out[s] += down * psi[t];
                    out[t] += up * psi[s];
                }
                base += 2 * b;
            }
        }
    }

    fn diag_range(&self, drive: &DriveSample) -> (f64, f64) {
        self.interaction
            .iter()
            .zip(&self.weights)
            .map(|(u, w)| u - drive.delta * w)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)))
    }

    /// Row-major dense matrix, for tests and small diagnostics.
    pub fn dense(&self, drive: &DriveSample) -> Vec<Complex64> {
        let dim = 1usize << self.n;
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        for c in 0..dim {
            e.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
            e[c] = Complex64::new(1.0, 0.0);
            self.apply(drive, &e, &mut col);
            for r in 0..dim {
                m[r * dim + c] = col[r];
            }
        }
        m
    }

    /// Propagates `psi` through `seq` with midpoint exponential steps of at
    /// most `dt` ns.
    pub fn evolve_from(&self, seq: &PulseSequence, psi: &mut StateVector, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be > 0")));
        }
        if psi.n != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: psi.n,
            });
        }
        let dim = psi.amps.len();
        let mut work = Workspace {
            term: vec![Complex64::new(0.0, 0.0); dim],
            next: vec![Complex64::new(0.0, 0.0); dim],
        };
        let mut start = 0.0;
        for seg in seq.segments() {
            let duration = seg.omega.duration();
            let steps = (duration / dt).ceil().max(1.0) as usize;
            let h = duration / steps as f64;
            for k in 0..steps {
                let t = start + (k as f64 + 0.5) * h;
                let drive = DriveSample {
                    omega: seg.omega.sample(t - start)?,
                    delta: seg.delta.sample(t - start)?,
                    phase: seg.phase,
                };
                self.step(&drive, h * 1e-3, &mut psi.amps, &mut work);
            }
            start += duration;
        }
        let drift = (psi.norm() - 1.0).abs();
        if drift > DRIFT_LIMIT {
            return Err(Error::StepSize { drift, dt });
        }
        Ok(())
    }

    /// `ψ ← exp(−i H τ) ψ`, τ in µs, by a truncated Taylor series.
    fn step(&self, drive: &DriveSample, tau: f64, psi: &mut [Complex64], work: &mut Workspace) {
        // shifting the diagonal to the state's mean energy shrinks the series
        // argument where the amplitude lives; it only changes a global phase
        let mut mean = 0.0;
        let mut weight = 0.0;
        for (s, a) in psi.iter().enumerate() {
            let p = a.norm_sqr();
            mean += p * (self.interaction[s] - drive.delta * self.weights[s]);
            weight += p;
        }
        let shift = mean / weight;
        let (lo, hi) = self.diag_range(drive);
        let spread = (hi - shift).max(shift - lo);
        let arg = (spread + self.n as f64 * 0.5 * drive.omega.abs()) * tau;
        let pieces = (arg / MAX_SERIES_ARG).ceil().max(1.0) as usize;
        let tau = tau / pieces as f64;
        for _ in 0..pieces {
            work.term.copy_from_slice(psi);
            for m in 1..=MAX_SERIES_TERMS {
                self.apply_shifted(drive, shift, &work.term, &mut work.next);
                let c = Complex64::new(0.0, -tau / m as f64);
                let mut size = 0.0;
                for ((t, nx), p) in work.term.iter_mut().zip(&work.next).zip(psi.iter_mut()) {
                    *t = nx * c;
                    *p += *t;
                    size += t.norm_sqr();
                }
                if size.sqrt() < SERIES_TOL {
                    break;
                }
            }
        }
    }
}

struct Workspace {
    term: Vec<Complex64>,
    next: Vec<Complex64>,
}

/// Hamiltonian at a fixed drive, for inspection.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub hamiltonian: Hamiltonian,
    pub drive: DriveSample,
}

impl Snapshot {
    pub fn dense(&self) -> Vec<Complex64> {
        self.hamiltonian.dense(&self.drive)
    }
}

pub fn build_hamiltonian(reg: &Register, omega: f64, delta: f64, dev: &DeviceParams) -> Result<Snapshot> {
    Ok(Snapshot {
        hamiltonian: Hamiltonian::new(reg, dev)?,
        drive: DriveSample {
            omega,
            delta,
            phase: 0.0,
        },
    })
}

/// Final state of `reg` driven by `seq` from all-ground.
pub fn evolve(reg: &Register, seq: &PulseSequence, dev: &DeviceParams, dt: f64) -> Result<StateVector> {
    let ham = Hamiltonian::new(reg, dev)?;
    let mut psi = StateVector::ground(ham.atoms());
    ham.evolve_from(seq, &mut psi, dt)?;
    Ok(psi)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl Histogram {
    pub fn from_counts(counts: BTreeMap<String, u64>) -> Self {
        let shots = counts.values().sum();
        Self { shots, counts }
    }

    pub fn add(&mut self, bits: String, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(bits).or_insert(0) += count;
        self.shots += count;
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    /// Outcomes by descending count, ties broken by bitstring.
    pub fn ranked(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.counts.iter().map(|(k, &c)| (k.as_str(), c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        v
    }

    pub fn top(&self, k: usize) -> Vec<(&str, u64)> {
        let mut v = self.ranked();
        v.truncate(k);
        v
    }

    pub fn most_common(&self) -> Option<&str> {
        self.ranked().first().map(|x| x.0)
    }

    /// Consistency check for deserialized histograms.
    pub fn validate(&self) -> Result<()> {
        let sum: u64 = self.counts.values().sum();
        if sum != self.shots {
            return Err(Error::parse("histogram", format!("counts sum to {sum}, shots = {}", self.shots)));
        }
        Ok(())
    }
}

/// `shots` i.i.d. samples of the computational-basis measurement.
pub fn measure(psi: &StateVector, shots: u64, rng: &mut impl Rng) -> Histogram {
    let mut cumulative = Vec::with_capacity(psi.amps.len());
    let mut acc = 0.0;
    for a in &psi.amps {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let mut tally = vec![0u64; psi.amps.len()];
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        let i = cumulative.partition_point(|&c| c <= u).min(psi.amps.len() - 1);
        tally[i] += 1;
    }
    let mut h = Histogram::default();
    for (i, c) in tally.into_iter().enumerate() {
        if c > 0 {
            h.add(bitstring(i, psi.n), c);
        }
    }
    h
}

/// Outcome probabilities with nonzero weight, normalized to sum to one.
pub fn exact_distribution(psi: &StateVector) -> BTreeMap<String, f64> {
    let total = psi.norm().powi(2);
    psi.amps
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, a)| (bitstring(i, psi.n), a.norm_sqr() / total))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{simple_sequence, SimpleParams, Waveform, Segment};
    use crate::register::blockade_radius;
    use crate::rng;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dev() -> DeviceParams {
        DeviceParams::default()
    }

    fn constant(omega: f64, delta: f64, t: f64) -> PulseSequence {
        PulseSequence::new(vec![Segment {
            omega: Waveform::constant(omega, t).unwrap(),
            delta: Waveform::constant(delta, t).unwrap(),
            phase: 0.0,
        }])
        .unwrap()
    }

    fn eigenvalues(m: &[Complex64], dim: usize) -> Vec<f64> {
        let mat = DMatrix::from_fn(dim, dim, |r, c| {
            nalgebra::Complex::new(m[r * dim + c].re, m[r * dim + c].im)
        });
        let mut ev: Vec<f64> = mat.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn single_atom_spectrum() {
        let reg = Register::from_positions(&[[0.0, 0.0]]);
        let snap = build_hamiltonian(&reg, 1.0, 0.0, &dev()).unwrap();
        let ev = eigenvalues(&snap.dense(), 2);
        assert!((ev[0] + 0.5).abs() < 1e-12 && (ev[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn distant_atoms_are_a_tensor_sum() {
        let reg = Register::from_positions(&[[0.0, 0.0], [1000.0, 0.0]]);
        let snap = build_hamiltonian(&reg, 2.0, 1.5, &dev()).unwrap();
        let ev = eigenvalues(&snap.dense(), 4);
        let single = eigenvalues(
            &build_hamiltonian(&Register::from_positions(&[[0.0, 0.0]]), 2.0, 1.5, &dev())
                .unwrap()
                .dense(),
            2,
        );
        let mut sums: Vec<f64> = single.iter().flat_map(|a| single.iter().map(move |b| a + b)).collect();
        sums.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&sums) {
            assert!((a - b).abs() < 1e-9, "{ev:?} vs {sums:?}");
        }
    }

    #[test]
    fn pair_interaction_matrix_element() {
        let reg = Register::from_positions(&[[0.0, 0.0], [6.0, 0.0]]);
        let m = build_hamiltonian(&reg, 0.0, 0.0, &dev()).unwrap().dense();
        let u = 5.42e6 / 6f64.powi(6);
        for s in 0..4 {
            let expected = if s == 3 { u } else { 0.0 };
            assert!((m[s * 4 + s].re - expected).abs() < 1e-9);
        }
        assert!(m.iter().all(|x| x.im == 0.0));
    }

    #[test]
    fn sigma_z_form_differs_by_a_constant() {
        // n = (1 + σz)/2, so the spectra under both conventions differ by a shift
        let reg = Register::from_positions(&[[0.0, 0.0], [7.0, 0.0]]);
        let (omega, delta) = (3.0, 2.0);
        let ev = eigenvalues(&build_hamiltonian(&reg, omega, delta, &dev()).unwrap().dense(), 4);
        let u = dev().interaction(7.0);
        let z = |s: usize, k: usize| if s >> k & 1 == 1 { 1.0 } else { -1.0 };
        let mut m = vec![Complex64::new(0.0, 0.0); 16];
        for s in 0..4 {
            m[s * 4 + s] = Complex64::new(
                -0.5 * delta * (z(s, 0) + z(s, 1)) + 0.25 * u * (1.0 + z(s, 0)) * (1.0 + z(s, 1)),
                0.0,
            );
            for k in 0..2 {
                m[s * 4 + (s ^ 1 << k)] += Complex64::new(0.5 * omega, 0.0);
            }
        }
        let ev_z = eigenvalues(&m, 4);
        let shift = ev[0] - ev_z[0];
        for (a, b) in ev.iter().zip(&ev_z) {
            assert!((a - b - shift).abs() < 1e-9);
        }
    }

    #[test]
    fn atom_cap() {
        let pos: Vec<[f64; 2]> = (0..5).map(|i| [10.0 * i as f64, 0.0]).collect();
        let reg = Register::from_positions(&pos);
        assert!(matches!(
            Hamiltonian::with_cap(&reg, &dev(), 4),
            Err(Error::SizeCap { n: 5, cap: 4 })
        ));
    }

    #[test]
    fn rabi_oscillation() {
        let reg = Register::from_positions(&[[0.0, 0.0]]);
        for (omega, t) in [(1.0, 1000.0), (3.0, 777.0), (15.7, 400.0), (0.5, 4000.0)] {
            let psi = evolve(&reg, &constant(omega, 0.0, t), &dev(), DEFAULT_DT).unwrap();
            let expected = (omega * t * 1e-3 / 2.0).sin().powi(2);
            assert!((psi.probability(1) - expected).abs() < 1e-4);
        }
    }

    #[test]
    fn zero_drive_only_changes_phases() {
        let reg = Register::from_positions(&[[0.0, 0.0], [5.0, 0.0], [0.0, 9.0]]);
        let ham = Hamiltonian::new(&reg, &dev()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let amps: Vec<Complex64> = (0..8)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let total = norm(&amps);
        let amps: Vec<Complex64> = amps.into_iter().map(|a| a / total).collect();
        let mut psi = StateVector::from_amplitudes(3, amps).unwrap();
        let before = psi.probabilities();
        ham.evolve_from(&constant(0.0, 5.0, 2000.0), &mut psi, DEFAULT_DT).unwrap();
        for (a, b) in before.iter().zip(psi.probabilities()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    // Piecewise-constant propagation with a dense eigendecomposition per step,
    // using the same midpoint sampling.
    fn dense_oracle(reg: &Register, seq: &PulseSequence, dt: f64) -> Vec<f64> {
        let ham = Hamiltonian::new(reg, &dev()).unwrap();
        let dim = 1usize << reg.len();
        let mut psi = DVector::<nalgebra::Complex<f64>>::zeros(dim);
        psi[0] = nalgebra::Complex::new(1.0, 0.0);
        let mut start = 0.0;
        for seg in seq.segments() {
            let duration = seg.omega.duration();
            let steps = (duration / dt).ceil() as usize;
            let h = duration / steps as f64;
            for k in 0..steps {
                let local = (k as f64 + 0.5) * h;
                let drive = DriveSample {
                    omega: seg.omega.sample(local).unwrap(),
                    delta: seg.delta.sample(local).unwrap(),
                    phase: seg.phase,
                };
                let m = ham.dense(&drive);
                let mat = DMatrix::from_fn(dim, dim, |r, c| nalgebra::Complex::new(m[r * dim + c].re, m[r * dim + c].im));
                let eig = mat.symmetric_eigen();
                let phases = DVector::from_iterator(
                    dim,
                    eig.eigenvalues.iter().map(|&e| nalgebra::Complex::from_polar(1.0, -e * h * 1e-3)),
                );
                let v = &eig.eigenvectors;
                let coeffs = v.adjoint() * &psi;
                psi = v * coeffs.component_mul(&phases);
            }
            start += duration;
        }
        let _ = start;
        psi.iter().map(|a| a.norm_sqr()).collect()
    }

    #[test]
    fn matches_dense_propagator() {
        let configs: [&[[f64; 2]]; 3] = [
            &[[0.0, 0.0], [7.0, 0.0]],
            &[[0.0, 0.0], [6.0, 0.0], [12.0, 0.0]],
            &[[0.0, 0.0], [6.5, 0.0], [0.0, 6.5], [6.5, 6.5]],
        ];
        for pos in configs {
            let reg = Register::from_positions(pos);
            let seq = simple_sequence(&SimpleParams { omega: 6.0, delta: 4.0, time: 1200.0 }, &dev()).unwrap();
            let psi = evolve(&reg, &seq, &dev(), DEFAULT_DT).unwrap();
            let oracle = dense_oracle(&reg, &seq, DEFAULT_DT);
            for (a, b) in psi.probabilities().iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-5, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn halving_dt_converges() {
        let reg = Register::from_positions(&[[0.0, 0.0], [6.0, 0.0], [3.0, 5.0]]);
        let seq = simple_sequence(&SimpleParams { omega: 9.0, delta: 6.0, time: 2000.0 }, &dev()).unwrap();
        let a = evolve(&reg, &seq, &dev(), DEFAULT_DT).unwrap();
        let b = evolve(&reg, &seq, &dev(), DEFAULT_DT / 2.0).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-6);
        for (x, y) in a.probabilities().iter().zip(b.probabilities()) {
            assert!((x - y).abs() < 1e-4);
        }
    }

    #[test]
    fn blockade_suppresses_double_excitation() {
        let omega = 10.0;
        let r = 0.5 * blockade_radius(omega, &dev()).unwrap();
        let reg = Register::from_positions(&[[0.0, 0.0], [r, 0.0]]);
        let seq = simple_sequence(&SimpleParams { omega, delta: 4.0, time: 4000.0 }, &dev()).unwrap();
        let psi = evolve(&reg, &seq, &dev(), DEFAULT_DT).unwrap();
        assert!(psi.probability(3) < 0.01);
    }

    #[test]
    fn measurement_basics() {
        let psi = StateVector::basis(2, 0b01);
        let h = measure(&psi, 100, &mut rng::stream(1, "shots", 0));
        assert_eq!(h.counts().get("10"), Some(&100));
        assert_eq!(exact_distribution(&psi).into_iter().collect::<Vec<_>>(), vec![("10".to_string(), 1.0)]);

        let half = Complex64::new(0.5, 0.0);
        let uniform = StateVector::from_amplitudes(2, vec![half; 4]).unwrap();
        let a = measure(&uniform, 40_000, &mut rng::stream(9, "shots", 0));
        let b = measure(&uniform, 40_000, &mut rng::stream(9, "shots", 0));
        assert_eq!(a, b);
        let sigma = (40_000.0f64 * 0.25 * 0.75).sqrt();
        for c in a.counts().values() {
            assert!((*c as f64 - 10_000.0).abs() < 5.0 * sigma);
        }
        assert_eq!(a.shots(), 40_000);
    }

    #[test]
    fn sampled_frequencies_match_distribution() {
        let reg = Register::from_positions(&[[0.0, 0.0], [7.0, 0.0], [14.0, 0.0]]);
        let seq = simple_sequence(&SimpleParams { omega: 5.0, delta: 3.0, time: 600.0 }, &dev()).unwrap();
        let psi = evolve(&reg, &seq, &dev(), DEFAULT_DT).unwrap();
        let exact = exact_distribution(&psi);
        assert!((exact.values().sum::<f64>() - 1.0).abs() < 1e-9);
        let h = measure(&psi, 100_000, &mut rng::stream(2, "shots", 0));
        for (bits, p) in &exact {
            let f = *h.counts().get(bits).unwrap_or(&0) as f64 / 1e5;
            assert!((f - p).abs() < 0.02, "{bits}: {f} vs {p}");
        }
    }

    #[test]
    fn relabeling_atoms_permutes_bits() {
        let pos = [[0.0, 0.0], [6.0, 0.0], [20.0, 3.0]];
        let swapped = [pos[2], pos[0], pos[1]];
        let seq = simple_sequence(&SimpleParams { omega: 5.0, delta: 3.0, time: 600.0 }, &dev()).unwrap();
        let a = exact_distribution(&evolve(&Register::from_positions(&pos), &seq, &dev(), DEFAULT_DT).unwrap());
        let b = exact_distribution(&evolve(&Register::from_positions(&swapped), &seq, &dev(), DEFAULT_DT).unwrap());
        for (bits, p) in &a {
            let c: Vec<char> = bits.chars().collect();
            let moved: String = [c[2], c[0], c[1]].iter().collect();
            assert!((b[&moved] - p).abs() < 1e-9);
        }
    }

    #[test]
    fn bitstring_round_trip() {
        assert_eq!(bitstring(0b001, 3), "100");
        assert_eq!(index_of_bitstring("100").unwrap(), 1);
        assert!(index_of_bitstring("1x").is_err());
    }
}
