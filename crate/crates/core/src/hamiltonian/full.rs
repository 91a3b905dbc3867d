// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Five-mode Kerr-oscillator Hamiltonian for exact diagonalization.
//!
//! Modes are ordered `(l, h, s, c_g, c_s)`; basis index is the mixed-radix
//! number with `l` most significant. Only spectator 0 is modelled.

use nalgebra::DMatrix;

use super::sw::{sw_pair_couplings, PairInput};
use super::spectrum::golden_section_min;
use crate::device::DeviceConfig;
use crate::error::{Error, Result};
use crate::linalg::sorted_eigh;

pub const MAX_FULL_DIM: usize = 1024;
const N_MODES: usize = 5;

/// Mode frequencies `(l, h, s, c_g, c_s)` in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFrequencies(pub [f64; N_MODES]);

impl ModeFrequencies {
    pub fn idle(config: &DeviceConfig) -> Self {
        let labels = role_labels(config);
        ModeFrequencies(labels.map(|l| config.role_mode(l).f_idle_ghz))
    }
}

fn role_labels(config: &DeviceConfig) -> [&str; N_MODES] {
    let r = &config.roles;
    [&r.ql, &r.qh, &r.qs[0], &r.cg, &r.cs[0]]
}

/// Fock-basis index of an occupation tuple.
pub fn basis_index(occupation: [usize; N_MODES], levels: usize) -> usize {
    occupation.iter().fold(0, |acc, &n| acc * levels + n)
}

/// Diagonal Kerr terms plus `-g (a†-a)(b†-b)` for every configured edge between
/// the five modes, each coupling multiplied by `coupling_scale`.
pub fn full_hamiltonian(
    config: &DeviceConfig,
    levels: usize,
    freqs: &ModeFrequencies,
    coupling_scale: f64,
) -> Result<DMatrix<f64>> {
    if !(2..=4).contains(&levels) {
        return Err(Error::Input(format!("levels per mode must be 2, 3 or 4, got {levels}")));
    }
    let dim = levels.pow(N_MODES as u32);
    if dim > MAX_FULL_DIM {
        return Err(Error::DimensionTooLarge(dim));
    }
    let labels = role_labels(config);
    let alphas = labels.map(|l| config.role_mode(l).anharmonicity_ghz);
    let mut edges = Vec::new();
    for x in 0..N_MODES {
        for y in x + 1..N_MODES {
            if let Some(e) = config.edge(labels[x], labels[y]) {
                let g = crate::device::coupling_strength(e, freqs.0[x], freqs.0[y]);
                edges.push((x, y, coupling_scale * g));
            }
        }
    }

    let occupation = |mut i: usize| {
        let mut occ = [0usize; N_MODES];
        for k in (0..N_MODES).rev() {
            occ[k] = i % levels;
            i /= levels;
        }
        occ
    };

    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let occ = occupation(i);
        h[(i, i)] = (0..N_MODES)
            .map(|k| {
                let n = occ[k] as f64;
                freqs.0[k] * n + alphas[k] / 2.0 * n * (n - 1.0)
            })
            .sum();
    }
    // Off-diagonals are accumulated on the upper triangle and mirrored, so the
    // stored matrix is bit-for-bit symmetric.
    for &(x, y, g) in &edges {
        for i in 0..dim {
            let occ = occupation(i);
            let (nx, ny) = (occ[x], occ[y]);
            // (a†-a)(b†-b) = a†b† - a†b - ab† + ab; contributions with target j > i.
            let moves: [(isize, isize, f64); 4] = [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)];
            for (dx, dy, sign) in moves {
                let mx = nx as isize + dx;
                let my = ny as isize + dy;
                if mx < 0 || my < 0 || mx >= levels as isize || my >= levels as isize {
                    continue;
                }
                let mut target = occ;
                target[x] = mx as usize;
                target[y] = my as usize;
                let j = basis_index(target, levels);
                if j <= i {
                    continue;
                }
                let amp = (nx.max(mx as usize) as f64).sqrt() * (ny.max(my as usize) as f64).sqrt();
                h[(i, j)] += -g * sign * amp;
            }
        }
    }
    for i in 0..dim {
        for j in i + 1..dim {
            h[(j, i)] = h[(i, j)];
        }
    }
    Ok(h)
}

/// Half of the minimal |110>-|020> splitting as the low qubit is swept
/// through the resonance `f_l = f_h + alpha_h`, with all other modes at
/// `freqs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateAnticrossing {
    pub f_l: f64,
    pub half_gap: f64,
}

pub fn gate_anticrossing(
    config: &DeviceConfig,
    levels: usize,
    freqs: &ModeFrequencies,
    coupling_scale: f64,
    window: f64,
) -> Result<GateAnticrossing> {
    let alpha_h = config.role_mode(&config.roles.qh).anharmonicity_ghz;
    let f_res = freqs.0[1] + alpha_h;
    let i11 = basis_index([1, 1, 0, 0, 0], levels);
    let i02 = basis_index([0, 2, 0, 0, 0], levels);
    let half_gap = |f_l: f64| -> Result<f64> {
        let mut f = *freqs;
        f.0[0] = f_l;
        let h = full_hamiltonian(config, levels, &f, coupling_scale)?;
        let (vals, vecs) = sorted_eigh(&h);
        let weight = |k: usize| vecs[(i11, k)].powi(2) + vecs[(i02, k)].powi(2);
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)));
        Ok((vals[order[0]] - vals[order[1]]).abs() / 2.0)
    };
    let n = 61;
    let step = 2.0 * window / (n - 1) as f64;
    let mut best = (f64::INFINITY, 0);
    for k in 0..n {
        let g = half_gap(f_res - window + step * k as f64)?;
        if g < best.0 {
            best = (g, k);
        }
    }
    let centre = f_res - window + step * best.1 as f64;
    let (f_l, g) = golden_section_min(
        |f| half_gap(f).unwrap_or(f64::INFINITY),
        centre - step,
        centre + step,
        1e-9,
    );
    Ok(GateAnticrossing { f_l, half_gap: g })
}

/// SW gate coupling `|g02|` for the same mode frequencies and coupling scale,
/// evaluated at the bare resonance `f_l = f_h + alpha_h`.
pub fn sw_gate_coupling(config: &DeviceConfig, freqs: &ModeFrequencies, coupling_scale: f64) -> Result<f64> {
    let r = &config.roles;
    let l = config.role_mode(&r.ql);
    let h = config.role_mode(&r.qh);
    let f_h = freqs.0[1];
    let f_l = f_h + h.anharmonicity_ghz;
    let f_c = freqs.0[3];
    let pair = PairInput {
        g_direct: coupling_scale * config.coupling(&r.ql, &r.qh, f_l, f_h),
        g_ac: coupling_scale * config.coupling(&r.ql, &r.cg, f_l, f_c),
        g_bc: coupling_scale * config.coupling(&r.qh, &r.cg, f_h, f_c),
        f_a: f_l,
        f_b: f_h,
        f_c,
        alpha_a: l.anharmonicity_ghz,
        alpha_b: h.anharmonicity_ghz,
    };
    Ok(sw_pair_couplings(&pair)?.g02.abs())
}
