// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Eigenvalue sweeps over the spectator detuning and anticrossing extraction.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use super::three_level::{MultiLevelH, ThreeLevelH};
use crate::linalg::sorted_eigenvalues;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub delta_sl: f64,
    pub eigenvalues: Vec<f64>,
}

/// Hamiltonians whose spectator levels can be placed at a detuning from |11>.
pub trait DetuningSweep {
    /// Matrix with the (first) spectator at `f11 + delta`; further spectators
    /// keep their offsets relative to the first.
    fn matrix_at_detuning(&self, delta: f64) -> DMatrix<f64>;
}

impl DetuningSweep for ThreeLevelH {
    fn matrix_at_detuning(&self, delta: f64) -> DMatrix<f64> {
        ThreeLevelH {
            f_s: self.f11 + delta,
            ..*self
        }
        .matrix()
    }
}

impl DetuningSweep for MultiLevelH {
    fn matrix_at_detuning(&self, delta: f64) -> DMatrix<f64> {
        let mut h = self.clone();
        if let Some(first) = self.spectators.first() {
            let shift = self.f11 + delta - first.f_s;
            for s in &mut h.spectators {
                s.f_s += shift;
            }
        }
        h.matrix()
    }
}

/// Sorted eigenvalues at each grid detuning.
pub fn eigenspectrum<H: DetuningSweep + Sync>(h: &H, grid: &[f64]) -> Vec<SpectrumRow> {
    use rayon::prelude::*;
    grid.par_iter()
        .map(|&d| SpectrumRow {
            delta_sl: d,
            eigenvalues: sorted_eigenvalues(&h.matrix_at_detuning(d)),
        })
        .collect()
}

/// CSV with columns `delta_sl_ghz, e1_ghz, e2_ghz, ...`.
pub fn write_spectrum_csv<W: Write>(rows: &[SpectrumRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = rows.first().map_or(0, |r| r.eigenvalues.len());
    let mut header = vec!["delta_sl_ghz".to_string()];
    header.extend((1..=n).map(|k| format!("e{k}_ghz")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![format!("{:.6}", r.delta_sl)];
        rec.extend(r.eigenvalues.iter().map(|e| format!("{e:.9}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// A local minimum of the splitting between adjacent levels `lower` and `lower + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anticrossing {
    pub lower: usize,
    pub delta_sl: f64,
    pub gap: f64,
}

/// Minimum splitting of each adjacent level pair over `[lo, hi]`.
///
/// A dense scan locates each minimum, then golden-section search refines it.
pub fn minimum_gaps<H: DetuningSweep>(h: &H, lo: f64, hi: f64, n_grid: usize) -> Vec<Anticrossing> {
    let n_levels = h.matrix_at_detuning(lo).nrows();
    let gap = |d: f64, k: usize| {
        let e = sorted_eigenvalues(&h.matrix_at_detuning(d));
        e[k + 1] - e[k]
    };
    let step = (hi - lo) / (n_grid.max(2) - 1) as f64;
    let grid: Vec<f64> = (0..n_grid.max(2)).map(|i| lo + step * i as f64).collect();
    let spectra: Vec<Vec<f64>> = grid
        .iter()
        .map(|&d| sorted_eigenvalues(&h.matrix_at_detuning(d)))
        .collect();
    (0..n_levels - 1)
        .map(|k| {
            let (imin, _) = spectra
                .iter()
                .map(|e| e[k + 1] - e[k])
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("grid nonempty");
            let a = grid[imin.saturating_sub(1)];
            let b = grid[(imin + 1).min(grid.len() - 1)];
            let (delta_sl, g) = golden_section_min(|d| gap(d, k), a, b, 1e-12);
            Anticrossing {
                lower: k,
                delta_sl,
                gap: g,
            }
        })
        .collect()
}

/// Minimize a unimodal function on `[a, b]` to abscissa tolerance `tol`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Symmetric and antisymmetric combination couplings `(g1, g2)` from `g± = g1 ± g2`.
pub fn couplings_from_anticrossings(g_plus: f64, g_minus: f64) -> (f64, f64) {
    ((g_plus + g_minus) / 2.0, (g_plus - g_minus) / 2.0)
}

/// Magnitudes `(|g+|, |g-|)` from the two spectator anticrossings of a
/// degenerate gate pair.
///
/// The spectator meets `(|11> ± |02>)/√2` with coupling `g±/√2`, so each
/// minimal splitting is `√2·|g±|`. The symmetric combination sits above the
/// antisymmetric one when `g_gate > 0`.
pub fn anticrossing_couplings(h: &ThreeLevelH, window: f64, n_grid: usize) -> (f64, f64) {
    let gaps = minimum_gaps(h, -window, window, n_grid);
    let lower = gaps[0].gap / std::f64::consts::SQRT_2;
    let upper = gaps[1].gap / std::f64::consts::SQRT_2;
    if h.g_gate >= 0.0 {
        (upper, lower)
    } else {
        (lower, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(g1: f64, g2: f64) -> ThreeLevelH {
        ThreeLevelH {
            f11: 8.788,
            f02: 8.788,
            f_s: 8.788,
            g_gate: 0.027,
            g1,
            g2,
        }
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(couplings_from_anticrossings(1.0, 1.0), (1.0, 0.0));
        assert_eq!(couplings_from_anticrossings(1.0, -1.0), (0.0, 1.0));
    }

    #[test]
    fn decoupled_spectator_crosses_without_gap() {
        let gaps = minimum_gaps(&h(0.0, 0.0), -0.06, 0.06, 241);
        assert!(gaps.iter().all(|a| a.gap < 1e-9), "{gaps:?}");
    }

    #[test]
    fn gate_only_levels_split_by_twice_coupling() {
        let rows = eigenspectrum(&h(0.0, 0.0), &[0.2, 0.3]);
        for r in rows {
            assert!((r.eigenvalues[1] - r.eigenvalues[0] - 0.054).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalue_sum_equals_trace() {
        let m = h(0.0012, -0.0007);
        for r in eigenspectrum(&m, &[-0.05, -0.01, 0.0, 0.02]) {
            let trace = m.matrix_at_detuning(r.delta_sl).trace();
            assert!((r.eigenvalues.iter().sum::<f64>() - trace).abs() < 1e-10);
        }
    }

    #[test]
    fn round_trip_recovers_couplings() {
        for (g1, g2) in [(0.0005, 0.0002), (0.001, -0.0004), (0.0008, 0.0)] {
            for sign in [1.0, -1.0] {
                let m = ThreeLevelH {
                    g_gate: sign * 0.027,
                    ..h(g1, g2)
                };
                let (gp, gm) = anticrossing_couplings(&m, 0.06, 601);
                let (r1, r2) = couplings_from_anticrossings(gp, gm);
                assert!((r1 - g1).abs() < 1e-6, "g1 {r1} vs {g1}");
                assert!((r2 - g2).abs() < 1e-6, "g2 {r2} vs {g2}");
            }
        }
    }

    #[test]
    fn csv_has_one_column_per_level() {
        let mut buf = Vec::new();
        write_spectrum_csv(&eigenspectrum(&h(0.001, 0.0), &[0.0]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("delta_sl_ghz,e1_ghz,e2_ghz,e3_ghz\n"));
    }
}
