// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Control envelopes for qubit and coupler frequencies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseShape {
    FlatTopGaussian,
    /// Held at `plateau_value` for the whole pulse.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub start_value: f64,
    pub plateau_value: f64,
    pub sigma_ns: f64,
    pub buffer_ns: f64,
    pub total_ns: f64,
}

impl PulseSpec {
    pub fn constant(value: f64, total_ns: f64) -> Self {
        PulseSpec {
            shape: PulseShape::Constant,
            start_value: value,
            plateau_value: value,
            sigma_ns: 1.0,
            buffer_ns: 0.0,
            total_ns,
        }
    }

    pub fn flat_top(start_value: f64, plateau_value: f64, sigma_ns: f64, buffer_ns: f64, total_ns: f64) -> Self {
        PulseSpec {
            shape: PulseShape::FlatTopGaussian,
            start_value,
            plateau_value,
            sigma_ns,
            buffer_ns,
            total_ns,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_ns > 0.0) {
            return Err(Error::invariant("pulse.sigma_ns", "must be positive"));
        }
        if !(self.buffer_ns >= 0.0 && self.total_ns >= 2.0 * self.buffer_ns) {
            return Err(Error::invariant("pulse.total_ns", "must be at least twice the buffer"));
        }
        if !(self.start_value.is_finite() && self.plateau_value.is_finite()) {
            return Err(Error::invariant("pulse", "values must be finite"));
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::Constant => self.plateau_value,
            PulseShape::FlatTopGaussian => flattop_gaussian(t, self),
        }
    }
}

/// Error-function-smoothed rectangle from `buffer` to `total - buffer`,
/// rescaled so the endpoints sit exactly at `start_value` and the centre
/// exactly at `plateau_value`.
pub fn flattop_gaussian(t: f64, spec: &PulseSpec) -> f64 {
    let total = spec.total_ns;
    let s = std::f64::consts::SQRT_2 * spec.sigma_ns;
    let (rise, fall) = (spec.buffer_ns, total - spec.buffer_ns);
    let raw = |t: f64| 0.5 * (libm::erf((t - rise) / s) - libm::erf((t - fall) / s));
    // Fold onto the first half so the envelope is symmetric by construction.
    let t = t.clamp(0.0, total);
    let t = if t > 0.5 * total { total - t } else { t };
    let edge = raw(0.0);
    let centre = raw(0.5 * total);
    let w = if centre > edge {
        ((raw(t) - edge) / (centre - edge)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    spec.start_value + (spec.plateau_value - spec.start_value) * w
}

/// Controlled frequencies during one gate: the low qubit and each spectator
/// coupler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub f_l: PulseSpec,
    pub f_cs: Vec<PulseSpec>,
    pub gate_total_ns: f64,
}

impl ControlSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.gate_total_ns >= 0.0 && self.gate_total_ns.is_finite()) {
            return Err(Error::invariant("schedule.gate_total_ns", "must be finite and nonnegative"));
        }
        for p in std::iter::once(&self.f_l).chain(&self.f_cs) {
            p.validate()?;
            if p.total_ns != self.gate_total_ns {
                return Err(Error::invariant(
                    "schedule",
                    "all pulses must span gate_total_ns",
                ));
            }
        }
        Ok(())
    }

    pub fn f_cs_at(&self, t: f64) -> Vec<f64> {
        self.f_cs.iter().map(|p| p.value_at(t)).collect()
    }
}
