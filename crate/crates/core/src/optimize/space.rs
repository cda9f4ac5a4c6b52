// Copyright 2026 The qdock Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse-parameter search spaces.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{
    complex_sequence, simple_sequence, ComplexParams, PulseSequence, SimpleParams, MIN_DURATION,
    MIN_SIMPLE_TIME,
};
use crate::register::{DeviceParams, OmegaBand};

/// Longest single ramp in the complex family, ns.
pub const MAX_RAMP: f64 = 2500.0;
/// Coherence time assumed by the relaxed (Nelder-Mead) spaces, ns.
pub const RELAXED_COHERENCE: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Simple,
    Complex,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Self::Simple),
            "complex" => Ok(Self::Complex),
            _ => Err(Error::InvalidParameter(format!("unknown family `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub family: Family,
    /// Simple: omega, delta, time. Complex: omega, delta0, deltaf, t_rise, t_fall.
    pub bounds: Vec<Interval>,
    /// Ceiling on the summed duration, ns.
    pub max_total: f64,
}

fn omega_interval(band: &OmegaBand) -> Result<Interval> {
    // stay strictly inside the band, away from a useless zero drive
    let lo = (band.min * 1.001).max(0.02 * band.max);
    Interval::new(lo, band.max * 0.999)
}

impl SearchSpace {
    pub fn simple(band: &OmegaBand, dev: &DeviceParams) -> Result<Self> {
        Ok(Self {
            family: Family::Simple,
            bounds: vec![
                omega_interval(band)?,
                Interval::new(0.05, dev.delta_abs_max)?,
                Interval::new(MIN_SIMPLE_TIME, dev.coherence_time)?,
            ],
            max_total: dev.coherence_time,
        })
    }

    pub fn complex(band: &OmegaBand, dev: &DeviceParams) -> Result<Self> {
        let ramp = MAX_RAMP.min(dev.coherence_time - MIN_DURATION);
        Ok(Self {
            family: Family::Complex,
            bounds: vec![
                omega_interval(band)?,
                Interval::new(0.0, dev.delta_abs_max)?,
                Interval::new(0.0, dev.delta_abs_max)?,
                Interval::new(MIN_DURATION, ramp)?,
                Interval::new(MIN_DURATION, ramp)?,
            ],
            max_total: dev.coherence_time,
        })
    }

    pub fn for_family(family: Family, band: &OmegaBand, dev: &DeviceParams) -> Result<Self> {
        match family {
            Family::Simple => Self::simple(band, dev),
            Family::Complex => Self::complex(band, dev),
        }
    }

    /// Longer-schedule variant: times up to the relaxed coherence ceiling.
    pub fn relaxed(mut self) -> Self {
        self.max_total = RELAXED_COHERENCE;
        match self.family {
            Family::Simple => self.bounds[2].hi = RELAXED_COHERENCE,
            Family::Complex => {
                self.bounds[3].hi = RELAXED_COHERENCE - MIN_DURATION;
                self.bounds[4].hi = RELAXED_COHERENCE - MIN_DURATION;
            }
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn names(&self) -> &'static [&'static str] {
        match self.family {
            Family::Simple => &["omega", "delta", "time"],
            Family::Complex => &["omega", "delta0", "deltaf", "t_rise", "t_fall"],
        }
    }

    /// Summed schedule duration; zero for vectors not shaped like the family.
    pub fn total_time(&self, x: &[f64]) -> f64 {
        match (self.family, x.len()) {
            (Family::Simple, 3) => x[2],
            (Family::Complex, 5) => x[3] + x[4],
            _ => 0.0,
        }
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.bounds).all(|(v, b)| b.contains(*v))
            && self.total_time(x) <= self.max_total + 1e-9
    }

    /// Clamps into the box, then shrinks both ramps proportionally when their
    /// sum exceeds the ceiling.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = x.iter().zip(&self.bounds).map(|(v, b)| b.clamp(*v)).collect();
        if self.family == Family::Complex && y.len() == 5 {
            let total = y[3] + y[4];
            if total > self.max_total {
                let f = self.max_total / total;
                y[3] = (y[3] * f).max(self.bounds[3].lo);
                y[4] = (self.max_total - y[3]).max(self.bounds[4].lo);
            }
        }
        y
    }

    /// Uniform draw, with the joint duration constraint by rejection.
    pub fn sample_uniform(&self, rng: &mut impl Rng) -> Vec<f64> {
        loop {
            let x: Vec<f64> = self.bounds.iter().map(|b| b.lo + b.width() * rng.gen::<f64>()).collect();
            if self.is_feasible(&x) {
                return x;
            }
        }
    }

    pub fn centre(&self) -> Vec<f64> {
        self.project(&self.bounds.iter().map(|b| 0.5 * (b.lo + b.hi)).collect::<Vec<_>>())
    }

    /// Device used to validate sequences drawn from this space.
    pub fn device(&self, dev: &DeviceParams) -> DeviceParams {
        DeviceParams {
            coherence_time: dev.coherence_time.max(self.max_total),
            ..*dev
        }
    }

    pub fn sequence(&self, x: &[f64], dev: &DeviceParams) -> Result<PulseSequence> {
        let dev = self.device(dev);
        match self.family {
            Family::Simple => simple_sequence(&SimpleParams::from_slice(x)?, &dev),
            Family::Complex => complex_sequence(&ComplexParams::from_slice(x)?, &dev),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn band() -> OmegaBand {
        OmegaBand { min: 1.0, max: 12.0 }
    }

    #[test]
    fn complex_space_projection() {
        let s = SearchSpace::complex(&band(), &DeviceParams::default()).unwrap();
        let y = s.project(&[20.0, -1.0, 9.0, 2500.0, 2500.0]);
        assert!(s.is_feasible(&y), "{y:?}");
        assert!((y[3] + y[4] - 5000.0).abs() < 1e-9);
        let y = s.project(&[5.0, 1.0, 1.0, 10.0, 2600.0]);
        assert_eq!(y[3], 16.0);
        assert_eq!(y[4], 2500.0);
    }

    #[test]
    fn uniform_draws_are_feasible() {
        let dev = DeviceParams {
            coherence_time: 3000.0,
            ..DeviceParams::default()
        };
        let s = SearchSpace::complex(&band(), &dev).unwrap();
        let mut r = rng::stream(0, "test", 0);
        for _ in 0..200 {
            let x = s.sample_uniform(&mut r);
            assert!(s.is_feasible(&x));
            s.sequence(&x, &dev).unwrap();
        }
    }

    #[test]
    fn relaxed_space_allows_long_schedules() {
        let dev = DeviceParams::default();
        let s = SearchSpace::simple(&band(), &dev).unwrap().relaxed();
        assert!(s.sequence(&[2.0, 3.0, 5429.0], &dev).is_ok());
        let strict = SearchSpace::simple(&band(), &dev).unwrap();
        assert!(strict.sequence(&[2.0, 3.0, 5429.0], &dev).is_err());
    }
}
