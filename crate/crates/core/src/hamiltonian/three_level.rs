// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Effective Hamiltonians on {|11>, |02>, |S_1>, ..., |S_n>}.

use nalgebra::DMatrix;
use serde::Serialize;

use super::sw::{stray_fourth_order, sw_pair_couplings, PairInput};
use crate::device::{DeviceConfig, Topology};
use crate::error::{Error, Result};

/// Three-level Hamiltonian in the basis `[|11>, |02>, |S>]`, GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeLevelH {
    pub f11: f64,
    pub f02: f64,
    pub f_s: f64,
    pub g_gate: f64,
    pub g1: f64,
    pub g2: f64,
}

impl ThreeLevelH {
    pub fn matrix(&self) -> DMatrix<f64> {
        self.matrix_offset(0.0)
    }

    /// Matrix with `offset` subtracted from the diagonal.
    pub fn matrix_offset(&self, offset: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            3,
            3,
            &[
                self.f11 - offset,
                self.g_gate,
                self.g1,
                self.g_gate,
                self.f02 - offset,
                self.g2,
                self.g1,
                self.g2,
                self.f_s - offset,
            ],
        )
    }

    /// Spectator detuning from the |11> level.
    pub fn spectator_detuning(&self) -> f64 {
        self.f_s - self.f11
    }

    pub fn as_multi(&self) -> MultiLevelH {
        MultiLevelH {
            f11: self.f11,
            f02: self.f02,
            g_gate: self.g_gate,
            spectators: vec![SpectatorLevel {
                f_s: self.f_s,
                g1: self.g1,
                g2: self.g2,
            }],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectatorLevel {
    pub f_s: f64,
    pub g1: f64,
    pub g2: f64,
}

/// Gate pair plus `n` spectator levels without mutual coupling, basis
/// `[|11>, |02>, |S_1>, ..., |S_n>]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiLevelH {
    pub f11: f64,
    pub f02: f64,
    pub g_gate: f64,
    pub spectators: Vec<SpectatorLevel>,
}

impl MultiLevelH {
    pub fn dim(&self) -> usize {
        self.spectators.len() + 2
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.matrix_offset(0.0)
    }

    pub fn matrix_offset(&self, offset: f64) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = self.f11 - offset;
        m[(1, 1)] = self.f02 - offset;
        m[(0, 1)] = self.g_gate;
        m[(1, 0)] = self.g_gate;
        for (k, s) in self.spectators.iter().enumerate() {
            let i = k + 2;
            m[(i, i)] = s.f_s - offset;
            m[(0, i)] = s.g1;
            m[(i, 0)] = s.g1;
            m[(1, i)] = s.g2;
            m[(i, 1)] = s.g2;
        }
        m
    }

    /// Three-level slice keeping only spectator `i`.
    pub fn single(&self, i: usize) -> ThreeLevelH {
        let s = self.spectators[i];
        ThreeLevelH {
            f11: self.f11,
            f02: self.f02,
            f_s: s.f_s,
            g_gate: self.g_gate,
            g1: s.g1,
            g2: s.g2,
        }
    }
}

/// Which gate qubit the spectator is near-resonant with, per topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResonanceCase {
    /// l-h-s, spectator near the low qubit: |S> = |011>.
    LhsNearLow,
    /// l-h-s, spectator near the high qubit: |S> = |101>.
    LhsNearHigh,
    /// h-l-s, spectator near the low qubit: |S> = |011>.
    HlsNearLow,
    /// h-l-s, spectator near the high qubit: |S> = |101>.
    HlsNearHigh,
}

impl ResonanceCase {
    pub fn classify(topology: Topology, f_s: f64, f_l: f64, f_h: f64) -> Self {
        let near_low = (f_s - f_l).abs() <= (f_s - f_h).abs();
        match (topology, near_low) {
            (Topology::Lhs, true) => ResonanceCase::LhsNearLow,
            (Topology::Lhs, false) => ResonanceCase::LhsNearHigh,
            (Topology::Hls, true) => ResonanceCase::HlsNearLow,
            (Topology::Hls, false) => ResonanceCase::HlsNearHigh,
        }
    }

    /// Whether the spectator coupler can tune the bright-dark coupling to zero.
    pub fn suppressible(self) -> bool {
        !matches!(self, ResonanceCase::HlsNearHigh)
    }

    pub fn warning(self) -> Option<&'static str> {
        (!self.suppressible()).then_some("suppression challenging / fixed stray coupling dominates")
    }

    /// Spectator state label in `|l h s>` order.
    pub fn spectator_state(self) -> &'static str {
        match self {
            ResonanceCase::LhsNearLow | ResonanceCase::HlsNearLow => "|011>",
            ResonanceCase::LhsNearHigh | ResonanceCase::HlsNearHigh => "|101>",
        }
    }
}

/// Instantaneous frequencies of the modes entering the effective model, GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxPoint {
    pub f_l: f64,
    pub f_h: f64,
    pub f_cg: f64,
}

impl FluxPoint {
    /// CZ operating point with the low qubit at `f_l` and |11>, |02> degenerate.
    pub fn cz(config: &DeviceConfig, f_l: f64) -> Self {
        let alpha_h = config.role_mode(&config.roles.qh).anharmonicity_ghz;
        FluxPoint {
            f_l,
            f_h: f_l - alpha_h,
            f_cg: config.cz_f_cg(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveModel {
    pub h: ThreeLevelH,
    pub case: ResonanceCase,
}

/// Gate coupling |11> <-> |02> through the gate coupler.
pub fn gate_coupling(config: &DeviceConfig, p: &FluxPoint) -> Result<f64> {
    let r = &config.roles;
    let l = config.role_mode(&r.ql);
    let h = config.role_mode(&r.qh);
    let pair = PairInput {
        g_direct: config.coupling(&r.ql, &r.qh, p.f_l, p.f_h),
        g_ac: config.coupling(&r.ql, &r.cg, p.f_l, p.f_cg),
        g_bc: config.coupling(&r.qh, &r.cg, p.f_h, p.f_cg),
        f_a: p.f_l,
        f_b: p.f_h,
        f_c: p.f_cg,
        alpha_a: l.anharmonicity_ghz,
        alpha_b: h.anharmonicity_ghz,
    };
    Ok(sw_pair_couplings(&pair)?.g02)
}

/// Level energy and leakage couplings of spectator `i`.
fn spectator_level(
    config: &DeviceConfig,
    i: usize,
    p: &FluxPoint,
    g_gate: f64,
    f_cs: f64,
    f_s: f64,
) -> Result<(SpectatorLevel, ResonanceCase)> {
    let r = &config.roles;
    let (qs, cs) = (&r.qs[i], &r.cs[i]);
    let alpha_s = config.role_mode(qs).anharmonicity_ghz;
    let alpha_h = config.role_mode(&r.qh).anharmonicity_ghz;
    let alpha_l = config.role_mode(&r.ql).anharmonicity_ghz;
    let g = |x: &str, fx: f64, y: &str, fy: f64| config.coupling(x, y, fx, fy);

    let case = ResonanceCase::classify(config.topology, f_s, p.f_l, p.f_h);
    let level = match case {
        ResonanceCase::LhsNearLow => {
            let g_hs = sw_pair_couplings(&PairInput {
                g_direct: g(&r.qh, p.f_h, qs, f_s),
                g_ac: g(&r.qh, p.f_h, cs, f_cs),
                g_bc: g(qs, f_s, cs, f_cs),
                f_a: p.f_h,
                f_b: f_s,
                f_c: f_cs,
                alpha_a: alpha_h,
                alpha_b: alpha_s,
            })?;
            let fourth = stray_fourth_order(
                g_gate,
                g(qs, f_s, cs, f_cs),
                g(&r.qh, p.f_h, cs, f_cs),
                p.f_h - f_cs,
                p.f_l - f_cs,
            )?;
            SpectatorLevel {
                f_s: p.f_h + f_s,
                g1: g(&r.ql, p.f_l, qs, f_s) + fourth,
                g2: g_hs.g20,
            }
        }
        ResonanceCase::LhsNearHigh => {
            let g_hs = sw_pair_couplings(&PairInput {
                g_direct: g(&r.qh, p.f_h, qs, f_s),
                g_ac: g(&r.qh, p.f_h, cs, f_cs),
                g_bc: g(qs, f_s, cs, f_cs),
                f_a: p.f_h,
                f_b: f_s,
                f_c: f_cs,
                alpha_a: alpha_h,
                alpha_b: alpha_s,
            })?;
            SpectatorLevel {
                f_s: p.f_l + f_s,
                g1: g_hs.g01,
                g2: 0.0,
            }
        }
        ResonanceCase::HlsNearLow => {
            let g_ls = sw_pair_couplings(&PairInput {
                g_direct: g(&r.ql, p.f_l, qs, f_s),
                g_ac: g(&r.ql, p.f_l, cs, f_cs),
                g_bc: g(qs, f_s, cs, f_cs),
                f_a: p.f_l,
                f_b: f_s,
                f_c: f_cs,
                alpha_a: alpha_l,
                alpha_b: alpha_s,
            })?;
            SpectatorLevel {
                f_s: p.f_h + f_s,
                g1: g_ls.g01,
                g2: std::f64::consts::SQRT_2 * g(&r.qh, p.f_h, qs, f_s),
            }
        }
        ResonanceCase::HlsNearHigh => SpectatorLevel {
            f_s: p.f_l + f_s,
            g1: g(&r.qh, p.f_h, qs, f_s),
            g2: 0.0,
        },
    };
    Ok((level, case))
}

/// Energies of |11> and |02>. Within rounding of each other they are snapped
/// to exact degeneracy.
fn gate_levels(p: &FluxPoint, alpha_h: f64) -> (f64, f64) {
    let f11 = p.f_l + p.f_h;
    let f02 = 2.0 * p.f_h + alpha_h;
    if (f02 - f11).abs() <= 1e-12 {
        (f11, f11)
    } else {
        (f11, f02)
    }
}

/// Effective model for spectator 0 at the CZ point with the low qubit at `f_l`.
pub fn build_three_level(config: &DeviceConfig, f_cs: f64, f_s: f64, f_l: f64) -> Result<EffectiveModel> {
    build_three_level_at(config, &FluxPoint::cz(config, f_l), f_cs, f_s)
}

/// Effective model for spectator 0 at an arbitrary flux point.
pub fn build_three_level_at(config: &DeviceConfig, p: &FluxPoint, f_cs: f64, f_s: f64) -> Result<EffectiveModel> {
    let alpha_h = config.role_mode(&config.roles.qh).anharmonicity_ghz;
    let g_gate = gate_coupling(config, p)?;
    let (s, case) = spectator_level(config, 0, p, g_gate, f_cs, f_s)?;
    let (f11, f02) = gate_levels(p, alpha_h);
    Ok(EffectiveModel {
        h: ThreeLevelH {
            f11,
            f02,
            f_s: s.f_s,
            g_gate,
            g1: s.g1,
            g2: s.g2,
        },
        case,
    })
}

/// Multi-spectator model; `f_cs[i]`, `f_s[i]` belong to spectator `i`.
pub fn build_multi_level(config: &DeviceConfig, p: &FluxPoint, f_cs: &[f64], f_s: &[f64]) -> Result<(MultiLevelH, Vec<ResonanceCase>)> {
    let n = config.n_spectators();
    if f_cs.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: f_cs.len(),
        });
    }
    if f_s.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: f_s.len(),
        });
    }
    let alpha_h = config.role_mode(&config.roles.qh).anharmonicity_ghz;
    let g_gate = gate_coupling(config, p)?;
    let mut spectators = Vec::with_capacity(n);
    let mut cases = Vec::with_capacity(n);
    for i in 0..n {
        let (s, case) = spectator_level(config, i, p, g_gate, f_cs[i], f_s[i])?;
        spectators.push(s);
        cases.push(case);
    }
    let (f11, f02) = gate_levels(p, alpha_h);
    Ok((
        MultiLevelH {
            f11,
            f02,
            g_gate,
            spectators,
        },
        cases,
    ))
}
