// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Error-budget arithmetic for leakage and seepage.

use serde::{Deserialize, Serialize};

use crate::device::DeviceConfig;
use crate::error::{Error, Result};

/// Dimension of the two-qubit computational subspace.
pub const COMPUTATIONAL_DIM: f64 = 4.0;

/// Gate error attributable to leakage: `L1` lost plus the `L1/4` that the
/// depolarizing average would otherwise have credited.
pub fn leakage_error_contribution(l1: f64) -> f64 {
    1.25 * l1
}

/// Average gate fidelity from the depolarizing decay and leakage rate.
pub fn average_fidelity(lambda2: f64, l1: f64) -> f64 {
    ((COMPUTATIONAL_DIM - 1.0) * lambda2 + (1.0 - l1)) / COMPUTATIONAL_DIM
}

/// Seepage per cycle from relaxation of the leaked spectator level.
///
/// The single-qubit layer decays at the idle T1, the CZ layer at the T1 of
/// the spectator while resonant.
pub fn seepage_rate(t_1q_ns: f64, t1_idle_us: f64, t_cz_ns: f64, t1_res_us: f64) -> f64 {
    t_1q_ns / (1e3 * t1_idle_us) + t_cz_ns / (1e3 * t1_res_us)
}

/// Seepage from the first spectator of a device.
///
/// Falls back to the idle T1 when no resonant T1 is recorded and reports it.
pub fn seepage_rate_from_config(config: &DeviceConfig) -> Result<(f64, Option<String>)> {
    let label = config
        .roles
        .qs
        .first()
        .ok_or_else(|| Error::MissingRole("qs".into()))?;
    let qs = config.role_mode(label);
    let cz = config.cz_point();
    let t1_idle = qs
        .t1_us
        .ok_or_else(|| Error::Input(format!("{}: no T1 recorded", qs.label)))?;
    let (t1_res, warning) = match qs.t1_resonant_us {
        Some(t) => (t, None),
        None => (
            t1_idle,
            Some(format!("{}: no resonant T1 recorded, using idle T1", qs.label)),
        ),
    };
    if !(t1_idle > 0.0 && t1_res > 0.0) {
        return Err(Error::Input(format!("{}: T1 must be positive", qs.label)));
    }
    Ok((seepage_rate(cz.t_1q_ns, t1_idle, cz.t_cz_ns, t1_res), warning))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementFloor {
    /// `p_inf_min · L2`, valid for `L1 ≪ L2`.
    pub approx: f64,
    /// Solution of `L1 = p_inf_min · (L1 + L2)`.
    pub exact: f64,
}

/// Smallest leakage rate resolvable given the smallest resolvable steady-state
/// population.
pub fn measurement_floor(p_inf_min: f64, l2: f64) -> MeasurementFloor {
    let exact = if p_inf_min < 1.0 {
        p_inf_min * l2 / (1.0 - p_inf_min)
    } else {
        f64::INFINITY
    };
    MeasurementFloor {
        approx: p_inf_min * l2,
        exact,
    }
}

/// Independent spectators add their leakage.
pub fn total_leakage(per_spectator: &[f64]) -> f64 {
    per_spectator.iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub l1: f64,
    pub eps_leak: f64,
    pub l2_seepage: f64,
    pub l1_min_floor: f64,
}

impl ErrorBudget {
    pub fn new(l1: f64, l2: f64, p_inf_min: f64) -> Result<Self> {
        for (name, v) in [("l1", l1), ("l2", l2), ("p_inf_min", p_inf_min)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invariant(format!("budget.{name}"), "must be finite and nonnegative"));
            }
        }
        Ok(ErrorBudget {
            l1,
            eps_leak: leakage_error_contribution(l1),
            l2_seepage: l2,
            l1_min_floor: measurement_floor(p_inf_min, l2).approx,
        })
    }
}
