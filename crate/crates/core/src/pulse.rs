// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Drive waveforms and the two adiabatic schedule families.
//!
//! Times are in ns, amplitudes and detunings in rad/µs. Detuning enters the
//! Hamiltonian as `-δ(t)·wᵢ·nᵢ`, so every schedule sweeps δ from negative
//! (all-ground favoured) to positive (large independent sets favoured).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::register::DeviceParams;

/// Shortest waveform the hardware accepts, ns.
pub const MIN_DURATION: f64 = 16.0;
/// Shortest simple-family sequence, ns.
pub const MIN_SIMPLE_TIME: f64 = 32.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Ramp { start: f64, end: f64 },
    /// Evenly spaced points joined by a monotone cubic.
    Interpolated(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    shape: Shape,
    duration: f64,
    slopes: Vec<f64>,
}

impl Waveform {
    pub fn ramp(start: f64, end: f64, duration: f64) -> Result<Self> {
        Self::new(Shape::Ramp { start, end }, duration)
    }

    pub fn constant(value: f64, duration: f64) -> Result<Self> {
        Self::ramp(value, value, duration)
    }

    pub fn interpolated(points: Vec<f64>, duration: f64) -> Result<Self> {
        Self::new(Shape::Interpolated(points), duration)
    }

    pub fn new(shape: Shape, duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration >= MIN_DURATION) {
            return Err(Error::InvalidParameter(format!(
                "waveform duration {duration} ns is below {MIN_DURATION} ns"
            )));
        }
        let values: Vec<f64> = match &shape {
            Shape::Ramp { start, end } => vec![*start, *end],
            Shape::Interpolated(p) => {
                if p.len() < 2 {
                    return Err(Error::InvalidParameter(
                        "interpolated waveform needs at least two points".into(),
                    ));
                }
                p.clone()
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("waveform values must be finite".into()));
        }
        let slopes = match &shape {
            Shape::Ramp { .. } => Vec::new(),
            Shape::Interpolated(p) => pchip_slopes(p, duration / (p.len() - 1) as f64),
        };
        Ok(Self {
            shape,
            duration,
            slopes,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Value at `t` ns, `0 <= t <= duration`.
    pub fn sample(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                duration: self.duration,
            });
        }
        Ok(self.value(t))
    }

    fn value(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Ramp { start, end } => start + (end - start) * (t / self.duration),
            Shape::Interpolated(p) => {
                let h = self.duration / (p.len() - 1) as f64;
                let k = ((t / h).floor() as usize).min(p.len() - 2);
                let s = (t - k as f64 * h) / h;
                let (y0, y1) = (p[k], p[k + 1]);
                let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                    + (s3 - 2.0 * s2 + s) * m0
                    + (-2.0 * s3 + 3.0 * s2) * y1
                    + (s3 - s2) * m1
            }
        }
    }

    /// Smallest and largest value the waveform takes.
    pub fn range(&self) -> (f64, f64) {
        let pts: &[f64] = match &self.shape {
            Shape::Ramp { start, end } => &[*start, *end],
            Shape::Interpolated(p) => p,
        };
        pts.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    fn start_value(&self) -> f64 {
        self.value(0.0)
    }

    fn end_value(&self) -> f64 {
        self.value(self.duration)
    }
}

// Fritsch-Carlson slopes for evenly spaced knots.
fn pchip_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let d: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    if n == 2 {
        return vec![d[0], d[0]];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (d[k - 1], d[k]);
        m[k] = if a * b <= 0.0 { 0.0 } else { 2.0 / (1.0 / a + 1.0 / b) };
    }
    let end = |d0: f64, d1: f64| {
        let m = 0.5 * (3.0 * d0 - d1);
        if m.signum() != d0.signum() || d0 == 0.0 {
            0.0
        } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            m
        }
    };
    m[0] = end(d[0], d[1]);
    m[n - 1] = end(d[n - 2], d[n - 3]);
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub omega: Waveform,
    pub delta: Waveform,
    /// Constant drive phase, rad.
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub omega: f64,
    pub delta: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    segments: Vec<Segment>,
}

impl PulseSequence {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("sequence has no segments".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            if (s.omega.duration - s.delta.duration).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "segment {i}: amplitude and detuning durations differ"
                )));
            }
            if !s.phase.is_finite() {
                return Err(Error::InvalidParameter(format!("segment {i}: phase not finite")));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.omega.duration).sum()
    }

    /// Drive at `t` ns. Segment boundaries belong to the later segment.
    pub fn sample(&self, t: f64) -> Result<DriveSample> {
        let total = self.total_duration();
        if !(0.0..=total).contains(&t) {
            return Err(Error::TimeOutOfRange { t, duration: total });
        }
        let mut start = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            let end = start + s.omega.duration;
            if t < end || i + 1 == self.segments.len() {
                let local = (t - start).clamp(0.0, s.omega.duration);
                return Ok(DriveSample {
                    omega: s.omega.value(local),
                    delta: s.delta.value(local),
                    phase: s.phase,
                });
            }
            start = end;
        }
        unreachable!("non-empty sequence")
    }

    /// Checks duration and amplitude limits against the device.
    pub fn validate(&self, dev: &DeviceParams) -> Result<()> {
        let total = self.total_duration();
        if total > dev.coherence_time + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "sequence lasts {total} ns, beyond the {} ns coherence time",
                dev.coherence_time
            )));
        }
        for s in &self.segments {
            let (lo, hi) = s.omega.range();
            if lo < 0.0 || hi > dev.omega_max + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "amplitude range [{lo}, {hi}] outside [0, {}]",
                    dev.omega_max
                )));
            }
            let (lo, hi) = s.delta.range();
            if lo.abs().max(hi.abs()) > dev.delta_abs_max + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "detuning range [{lo}, {hi}] exceeds ±{}",
                    dev.delta_abs_max
                )));
            }
        }
        Ok(())
    }

    /// `(t, Ω, δ)` triples every `step` ns, always including the end point.
    pub fn sampled(&self, step: f64) -> Vec<[f64; 3]> {
        let total = self.total_duration();
        let n = (total / step).ceil() as usize;
        (0..=n)
            .map(|i| {
                let t = (i as f64 * step).min(total);
                let d = self.sample(t).expect("t within sequence");
                [t, d.omega, d.delta]
            })
            .collect()
    }

    pub fn end_values(&self) -> (DriveSample, DriveSample) {
        let first = &self.segments[0];
        let last = self.segments.last().expect("non-empty");
        (
            DriveSample {
                omega: first.omega.start_value(),
                delta: first.delta.start_value(),
                phase: first.phase,
            },
            DriveSample {
                omega: last.omega.end_value(),
                delta: last.delta.end_value(),
                phase: last.phase,
            },
        )
    }
}

/// Plot-ready dump of a sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceDump {
    pub step_ns: f64,
    pub total_duration: f64,
    /// `[t ns, Ω rad/µs, δ rad/µs]`
    pub samples: Vec<[f64; 3]>,
}

impl SequenceDump {
    pub const STEP_NS: f64 = 4.0;

    pub fn new(seq: &PulseSequence) -> Self {
        Self {
            step_ns: Self::STEP_NS,
            total_duration: seq.total_duration(),
            samples: seq.sampled(Self::STEP_NS),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimpleParams {
    pub omega: f64,
    pub delta: f64,
    /// ns
    pub time: f64,
}

impl SimpleParams {
    pub fn validate(&self, dev: &DeviceParams) -> Result<()> {
        check_in("omega", self.omega, 0.0, dev.omega_max, true)?;
        check_in("delta", self.delta, 0.0, dev.delta_abs_max, true)?;
        check_in("time", self.time, MIN_SIMPLE_TIME, dev.coherence_time, false)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.omega, self.delta, self.time]
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        match x {
            [omega, delta, time] => Ok(Self {
                omega: *omega,
                delta: *delta,
                time: *time,
            }),
            _ => Err(Error::LengthMismatch {
                expected: 3,
                got: x.len(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexParams {
    pub omega: f64,
    pub delta0: f64,
    pub deltaf: f64,
    /// ns
    pub t_rise: f64,
    /// ns
    pub t_fall: f64,
}

impl ComplexParams {
    pub const NAMES: [&'static str; 5] = ["omega", "delta0", "deltaf", "t_rise", "t_fall"];

    pub fn validate(&self, dev: &DeviceParams) -> Result<()> {
        check_in("omega", self.omega, 0.0, dev.omega_max, true)?;
        check_in("delta0", self.delta0, 0.0, dev.delta_abs_max, false)?;
        check_in("deltaf", self.deltaf, 0.0, dev.delta_abs_max, false)?;
        check_in("t_rise", self.t_rise, MIN_DURATION, dev.coherence_time, false)?;
        check_in("t_fall", self.t_fall, MIN_DURATION, dev.coherence_time, false)?;
        let total = self.t_rise + self.t_fall;
        if total > dev.coherence_time + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "t_rise + t_fall = {total} ns exceeds {} ns",
                dev.coherence_time
            )));
        }
        Ok(())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.omega, self.delta0, self.deltaf, self.t_rise, self.t_fall]
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        match x {
            [omega, delta0, deltaf, t_rise, t_fall] => Ok(Self {
                omega: *omega,
                delta0: *delta0,
                deltaf: *deltaf,
                t_rise: *t_rise,
                t_fall: *t_fall,
            }),
            _ => Err(Error::LengthMismatch {
                expected: 5,
                got: x.len(),
            }),
        }
    }
}

fn check_in(name: &str, v: f64, lo: f64, hi: f64, open_below: bool) -> Result<()> {
    let ok = v.is_finite() && v <= hi + 1e-9 && if open_below { v > lo } else { v >= lo - 1e-9 };
    if ok {
        Ok(())
    } else {
        let open = if open_below { "(" } else { "[" };
        Err(Error::InvalidParameter(format!("{name} = {v} outside {open}{lo}, {hi}]")))
    }
}

/// One segment: Ω rises and falls through `[0, ω, 0]` while δ sweeps
/// `[-δ, 0, δ]`.
pub fn simple_sequence(p: &SimpleParams, dev: &DeviceParams) -> Result<PulseSequence> {
    p.validate(dev)?;
    PulseSequence::new(vec![Segment {
        omega: Waveform::interpolated(vec![0.0, p.omega, 0.0], p.time)?,
        delta: Waveform::interpolated(vec![-p.delta, 0.0, p.delta], p.time)?,
        phase: 0.0,
    }])
}

/// Two segments: Ω ramps up at constant `-δ0`, then ramps down while δ
/// sweeps from `-δ0` to `+δf`.
pub fn complex_sequence(p: &ComplexParams, dev: &DeviceParams) -> Result<PulseSequence> {
    p.validate(dev)?;
    PulseSequence::new(vec![
        Segment {
            omega: Waveform::ramp(0.0, p.omega, p.t_rise)?,
            delta: Waveform::constant(-p.delta0, p.t_rise)?,
            phase: 0.0,
        },
        Segment {
            omega: Waveform::ramp(p.omega, 0.0, p.t_fall)?,
            delta: Waveform::ramp(-p.delta0, p.deltaf, p.t_fall)?,
            phase: 0.0,
        },
    ])
}
