// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Second-order Schrieffer-Wolff couplings for a qubit pair sharing a coupler.

use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest allowed magnitude of any perturbative denominator, GHz.
pub const SW_GUARD_GHZ: f64 = 1e-3;

/// Pair `a`-`b` with direct coupling `g_direct` and a shared coupler `c`.
///
/// Anharmonicities are signed (negative for transmons).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairInput {
    pub g_direct: f64,
    pub g_ac: f64,
    pub g_bc: f64,
    pub f_a: f64,
    pub f_b: f64,
    pub f_c: f64,
    pub alpha_a: f64,
    pub alpha_b: f64,
}

impl PairInput {
    /// Same pair with the roles of `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        PairInput {
            g_direct: self.g_direct,
            g_ac: self.g_bc,
            g_bc: self.g_ac,
            f_a: self.f_b,
            f_b: self.f_a,
            f_c: self.f_c,
            alpha_a: self.alpha_b,
            alpha_b: self.alpha_a,
        }
    }
}

/// Effective couplings between pair transitions, GHz.
///
/// `g01`: |10> <-> |01>. `g20`: |11> <-> |20>. `g02`: |11> <-> |02>.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwCouplings {
    pub g01: f64,
    pub g20: f64,
    pub g02: f64,
}

pub fn sw_pair_couplings(p: &PairInput) -> Result<SwCouplings> {
    sw_pair_couplings_with_guard(p, SW_GUARD_GHZ)
}

/// The second-excitation denominators carry `Δ + α` with the signed
/// anharmonicity, i.e. the energy cost of moving the doubly occupied mode's
/// second quantum onto the coupler.
pub fn sw_pair_couplings_with_guard(p: &PairInput, guard: f64) -> Result<SwCouplings> {
    let s2 = std::f64::consts::SQRT_2;
    let mediated = p.g_ac * p.g_bc;
    if mediated == 0.0 {
        return Ok(SwCouplings {
            g01: p.g_direct,
            g20: s2 * p.g_direct,
            g02: s2 * p.g_direct,
        });
    }
    let d_ac = p.f_a - p.f_c;
    let d_bc = p.f_b - p.f_c;
    let s_ac = p.f_a + p.f_c;
    let s_bc = p.f_b + p.f_c;
    let denominators = [
        ("Δ_ac", d_ac),
        ("Δ_bc", d_bc),
        ("Δ_ac+α_a", d_ac + p.alpha_a),
        ("Δ_bc+α_b", d_bc + p.alpha_b),
        ("Σ_ac", s_ac),
        ("Σ_bc", s_bc),
        ("Σ_ac+α_a", s_ac + p.alpha_a),
        ("Σ_bc+α_b", s_bc + p.alpha_b),
    ];
    for (name, value) in denominators {
        if !(value.abs() >= guard) {
            return Err(Error::SwDivergence { name, value });
        }
    }
    let g01 = p.g_direct + mediated / 2.0 * ((1.0 / d_ac - 1.0 / s_ac) + (1.0 / d_bc - 1.0 / s_bc));
    let g20 = s2 * p.g_direct
        + mediated / s2
            * (1.0 / (d_ac + p.alpha_a) + 1.0 / d_bc - 1.0 / (s_ac + p.alpha_a) - 1.0 / s_bc);
    let g02 = s2 * p.g_direct
        + mediated / s2
            * (1.0 / d_ac + 1.0 / (d_bc + p.alpha_b) - 1.0 / s_ac - 1.0 / (s_bc + p.alpha_b));
    Ok(SwCouplings { g01, g20, g02 })
}

/// Fourth-order coupler-mediated |110> <-> |011> coupling.
///
/// `delta_hc` and `delta_lc` are detunings of the gate qubits from the
/// spectator coupler.
pub fn stray_fourth_order(g_gate: f64, g_sc: f64, g_hc: f64, delta_hc: f64, delta_lc: f64) -> Result<f64> {
    if !(delta_hc.abs() >= SW_GUARD_GHZ) {
        return Err(Error::SwDivergence {
            name: "Δ_hc",
            value: delta_hc,
        });
    }
    if !(delta_lc.abs() >= SW_GUARD_GHZ) {
        return Err(Error::SwDivergence {
            name: "Δ_lc",
            value: delta_lc,
        });
    }
    Ok(-g_gate * g_sc * g_hc / (delta_hc * delta_lc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gate_pair(f_c: f64) -> PairInput {
        PairInput {
            g_direct: 0.0029 * (4.276_f64 * 4.512).sqrt(),
            g_ac: 0.0223 * (4.276 * f_c).sqrt(),
            g_bc: 0.0249 * (4.512 * f_c).sqrt(),
            f_a: 4.276,
            f_b: 4.512,
            f_c,
            alpha_a: -0.233,
            alpha_b: -0.236,
        }
    }

    #[test]
    fn no_mediation_gives_bare_couplings() {
        let p = PairInput {
            g_ac: 0.0,
            g_bc: 0.0,
            ..gate_pair(6.0)
        };
        let c = sw_pair_couplings(&p).unwrap();
        assert_eq!(c.g01, p.g_direct);
        assert_eq!(c.g20, std::f64::consts::SQRT_2 * p.g_direct);
        assert_eq!(c.g02, c.g20);
    }

    #[test]
    fn gate_coupling_at_calibrated_coupler_point() {
        let c = sw_pair_couplings(&gate_pair(4.646867)).unwrap();
        assert!((c.g02 + 0.027).abs() < 2e-6, "g02 = {}", c.g02);
    }

    // Hand-evaluated reference: g_ac = g_bc = 0.1, f = (5, 5.5, 6), alpha = -0.2.
    #[test]
    fn matches_hand_evaluated_point() {
        let p = PairInput {
            g_direct: 0.0,
            g_ac: 0.1,
            g_bc: 0.1,
            f_a: 5.0,
            f_b: 5.5,
            f_c: 6.0,
            alpha_a: -0.2,
            alpha_b: -0.2,
        };
        let c = sw_pair_couplings(&p).unwrap();
        let g01 = 0.005 * ((-1.0 - 1.0 / 11.0) + (-2.0 - 1.0 / 11.5));
        let g02 = 0.01 / 2f64.sqrt() * (-1.0 + 1.0 / -0.7 - 1.0 / 11.0 - 1.0 / 11.3);
        assert!((c.g01 - g01).abs() < 1e-15);
        assert!((c.g02 - g02).abs() < 1e-15);
    }

    #[test]
    fn resonant_denominator_is_named() {
        let p = PairInput {
            f_c: 4.276 + 5e-4,
            ..gate_pair(6.0)
        };
        match sw_pair_couplings(&p) {
            Err(Error::SwDivergence { name, .. }) => assert_eq!(name, "Δ_ac"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fourth_order_cases() {
        assert_eq!(stray_fourth_order(0.0, 0.1, 0.1, -1.0, -2.0).unwrap(), 0.0);
        assert!(stray_fourth_order(0.027, 0.1, 0.1, -1.0, -2.0).unwrap() < 0.0);
        assert!(stray_fourth_order(0.027, 0.1, 0.1, 0.0, -2.0).is_err());
    }

    proptest! {
        #[test]
        fn swap_exchanges_double_excitation_couplings(
            f_a in 3.5f64..5.0, f_b in 3.5f64..5.0, f_c in 5.5f64..7.0,
            alpha in -0.3f64..-0.1, g_ac in 0.0f64..0.15, g_bc in 0.0f64..0.15, gd in -0.01f64..0.01,
        ) {
            let p = PairInput { g_direct: gd, g_ac, g_bc, f_a, f_b, f_c, alpha_a: alpha, alpha_b: alpha };
            let c = sw_pair_couplings(&p).unwrap();
            let s = sw_pair_couplings(&p.swapped()).unwrap();
            prop_assert!((c.g01 - s.g01).abs() < 1e-14);
            prop_assert!((c.g20 - s.g02).abs() < 1e-14);
            prop_assert!((c.g02 - s.g20).abs() < 1e-14);
        }
    }
}
