// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Coherent amplification of a small |11>→|S> transfer by repeated gates.
//!
//! One cycle is a gate rotation followed by an idle phase. In the two-level
//! subspace {|11>, |S>} the cycle is
//!
//! ```text
//! R(β, ζ') = [[e^{-iζ'} cos β,  -i sin β      ],
//!             [-i sin β,         e^{iζ'} cos β]]
//! ```
//!
//! with `ζ' = ζ + φ/2`, and `R^n` has the closed form used here.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::spectrum::golden_section_min;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SU2Params {
    /// Per-gate transfer angle (rad).
    pub beta: f64,
    /// Per-gate phase (rad).
    pub zeta: f64,
    /// Idle-period phase `2π·Δ·τ` (rad).
    pub phi: f64,
}

impl SU2Params {
    pub fn new(beta: f64, zeta: f64, phi: f64) -> Self {
        SU2Params { beta, zeta, phi }
    }

    pub fn zeta_prime(&self) -> f64 {
        self.zeta + 0.5 * self.phi
    }
}

/// Per-cycle rotation angle Ω, with `cos Ω = cos β cos ζ'`.
fn rotation_angle(beta: f64, zeta_prime: f64) -> f64 {
    let (sb, cb) = beta.sin_cos();
    let (sz, cz) = zeta_prime.sin_cos();
    // atan2 keeps full precision when Ω is small.
    (sb * sb + cb * cb * sz * sz).sqrt().atan2(cb * cz)
}

/// Population of |S> after `n` cycles, as a function of (β, ζ').
///
/// Evaluates `sin²α·sin²(nΩ)` with `sin²α = sin²β / sin²Ω`. When
/// `sin ζ' = 0` this is the α = π/2 limit and reduces to `sin²(nβ)`.
pub fn population(beta: f64, zeta_prime: f64, n: u32) -> f64 {
    if n == 0 || beta.sin() == 0.0 {
        return 0.0;
    }
    if zeta_prime.sin() == 0.0 {
        return (n as f64 * beta).sin().powi(2);
    }
    let omega = rotation_angle(beta, zeta_prime);
    let s = (n as f64 * omega).sin() / omega.sin();
    beta.sin().powi(2) * s * s
}

pub fn su2_sequence_population(p: &SU2Params, n: u32) -> f64 {
    population(p.beta, p.zeta_prime(), n)
}

/// The gate rotation `R(β, ζ)` without the idle phase.
pub fn gate_matrix(beta: f64, zeta: f64) -> Matrix2<Complex64> {
    let (sb, cb) = beta.sin_cos();
    let m_is = Complex64::new(0.0, -sb);
    Matrix2::new(
        Complex64::from_polar(cb, -zeta),
        m_is,
        m_is,
        Complex64::from_polar(cb, zeta),
    )
}

/// Idle evolution `diag(e^{-iφ/2}, e^{iφ/2})`.
pub fn idle_matrix(phi: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::from_polar(1.0, -0.5 * phi),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, 0.5 * phi),
    )
}

/// Population of |S> by explicit multiplication of `n` gate-then-idle cycles.
pub fn su2_sequence_population_matrix(p: &SU2Params, n: u32) -> f64 {
    let cycle = idle_matrix(p.phi) * gate_matrix(p.beta, p.zeta);
    let mut u = Matrix2::<Complex64>::identity();
    for _ in 0..n {
        u = cycle * u;
    }
    u[(1, 0)].norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseScan {
    /// Maximizing phase, folded into `[0, π/2]`.
    pub zeta_prime: f64,
    pub amplitude: f64,
    pub amplitude_at_half_pi: f64,
}

/// Peak population over `1..=n_max` cycles.
pub fn peak_amplitude(beta: f64, zeta_prime: f64, n_max: u32) -> f64 {
    (1..=n_max).map(|n| population(beta, zeta_prime, n)).fold(0.0, f64::max)
}

/// Effective phase ζ' that maximizes the peak population over `1..=n_max`.
///
/// The population is unchanged by `ζ' → -ζ'` and `ζ' → π - ζ'`, so the scan
/// covers `[0, π/2]` only.
pub fn scan_phase_for_max_amplitude(beta: f64, n_max: u32) -> PhaseScan {
    const GRID: usize = 2001;
    let amp = |z: f64| peak_amplitude(beta, z, n_max);
    let step = FRAC_PI_2 / (GRID - 1) as f64;
    let (k_best, _) = (0..GRID)
        .map(|k| (k, amp(k as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let lo = (k_best as f64 - 1.0).max(0.0) * step;
    let hi = ((k_best + 1) as f64 * step).min(FRAC_PI_2);
    let (z_ref, neg) = golden_section_min(|z| -amp(z), lo, hi, 1e-12);
    let (zeta_prime, amplitude) = if -neg >= amp(k_best as f64 * step) {
        (z_ref, -neg)
    } else {
        (k_best as f64 * step, amp(k_best as f64 * step))
    };
    PhaseScan {
        zeta_prime: fold_phase(zeta_prime),
        amplitude,
        amplitude_at_half_pi: amp(FRAC_PI_2),
    }
}

/// Map any phase onto the equivalent representative in `[0, π/2]`.
pub fn fold_phase(z: f64) -> f64 {
    let z = z.rem_euclid(PI);
    if z > FRAC_PI_2 { PI - z } else { z }
}

/// Map any transfer angle onto the equivalent representative in `[0, π/2]`.
///
/// `β → -β` and `β → π - β` leave every population unchanged.
pub fn fold_beta(b: f64) -> f64 {
    fold_phase(b)
}
