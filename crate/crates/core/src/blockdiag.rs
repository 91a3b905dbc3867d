// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Bright/dark frame, coupler off-point solver and multi-spectator closure.
//!
//! In the frame `|B> = c|02> + s|S>`, `|D> = -s|02> + c|S>` with
//! `tan θ = g1/g_gate`, the dark state never couples to |11>. Leakage out of
//! the gate manifold then runs only through `g_BD = <B|H|D>`; nulling it
//! leaves `{|11>, |B>}` block-diagonal from `|D>`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::device::DeviceConfig;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_three_level, MultiLevelH, ThreeLevelH};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrightDarkFrame {
    pub theta: f64,
    /// Magnitude of `<B|H|11>`; the element itself carries the sign of `g_gate`.
    pub g_b: f64,
    pub g_bd: f64,
    pub f_b: f64,
    pub f_d: f64,
    /// Set when `g_gate = g1 = 0` and `θ` was defaulted to zero.
    pub degenerate: bool,
}

pub fn bright_dark_frame(h: &ThreeLevelH) -> Result<BrightDarkFrame> {
    let degenerate = h.g_gate == 0.0;
    if degenerate && h.g1 != 0.0 {
        return Err(Error::DegenerateFrame);
    }
    let theta = if degenerate { 0.0 } else { (h.g1 / h.g_gate).atan() };
    let (s, c) = theta.sin_cos();
    let (s2, c2) = (2.0 * theta).sin_cos();
    Ok(BrightDarkFrame {
        theta,
        g_b: h.g_gate.hypot(h.g1),
        g_bd: s * c * (h.f_s - h.f02) + h.g2 * c2,
        f_b: c * c * h.f02 + s * s * h.f_s + h.g2 * s2,
        f_d: s * s * h.f02 + c * c * h.f_s - h.g2 * s2,
        degenerate,
    })
}

/// Orthogonal change of basis from `[|11>, |02>, |S>]` to `[|11>, |B>, |D>]`
/// (columns are the new basis vectors).
pub fn frame_rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c])
}

/// Hamiltonian in the `[|11>, |B>, |D>]` basis.
///
/// The `|11>`-`|D>` element is zero by construction.
pub fn transform_hamiltonian(h: &ThreeLevelH) -> Result<DMatrix<f64>> {
    let fr = bright_dark_frame(h)?;
    let g_b = if h.g_gate < 0.0 { -fr.g_b } else { fr.g_b };
    Ok(DMatrix::from_row_slice(
        3,
        3,
        &[h.f11, g_b, 0.0, g_b, fr.f_b, fr.g_bd, 0.0, fr.g_bd, fr.f_d],
    ))
}

pub const OFF_POINT_TOL_GHZ: f64 = 1e-6;
const PRESCAN_STEP_GHZ: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffPointSolution {
    pub f_cs_off: f64,
    pub g_bd_residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Every sign-change interval found by the pre-scan.
    pub candidate_brackets: Vec<(f64, f64)>,
}

/// Spectator-coupler frequency where `g_BD` vanishes for spectator 0 at the
/// CZ point. Among several roots the one closest to the idle coupler
/// frequency is returned.
pub fn solve_off_frequency(config: &DeviceConfig, f_s: f64, bracket: (f64, f64)) -> Result<OffPointSolution> {
    let f_l = config.cz_point().f_l_ghz;
    let g_bd = |f_cs: f64| -> Result<f64> {
        Ok(bright_dark_frame(&build_three_level(config, f_cs, f_s, f_l)?.h)?.g_bd)
    };
    solve_off_frequency_with(g_bd, bracket, config.idle_f_cs(0))
}

/// Root of `g_bd` in `bracket` nearest to `preferred`.
pub fn solve_off_frequency_with(
    g_bd: impl Fn(f64) -> Result<f64>,
    bracket: (f64, f64),
    preferred: f64,
) -> Result<OffPointSolution> {
    let (lo, hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    let no_root = || Error::NoOffPoint { lo, hi };
    if !(hi > lo) {
        return Err(no_root());
    }
    let n = (((hi - lo) / PRESCAN_STEP_GHZ).ceil() as usize).max(1);
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&f| g_bd(f)).collect::<Result<_>>()?;

    let mut candidates = Vec::new();
    for i in 0..n {
        if values[i] == 0.0 {
            candidates.push((grid[i], grid[i]));
        } else if values[i].signum() != values[i + 1].signum() && values[i + 1] != 0.0 {
            candidates.push((grid[i], grid[i + 1]));
        }
    }
    if values[n] == 0.0 {
        candidates.push((grid[n], grid[n]));
    }
    let chosen = *candidates
        .iter()
        .min_by(|a, b| {
            let da = (0.5 * (a.0 + a.1) - preferred).abs();
            let db = (0.5 * (b.0 + b.1) - preferred).abs();
            da.total_cmp(&db)
        })
        .ok_or_else(no_root)?;

    let (mut a, mut b) = chosen;
    let mut fa = g_bd(a)?;
    let mut fb = g_bd(b)?;
    let mut iterations = 0;
    let mut x = a;
    let mut fx = fa;
    let mut last_width = b - a;
    let mut force_bisect = false;
    while iterations < 200 {
        if fa == 0.0 {
            x = a;
            fx = fa;
            break;
        }
        if fb == 0.0 {
            x = b;
            fx = fb;
            break;
        }
        iterations += 1;
        let secant = b - fb * (b - a) / (fb - fa);
        x = if force_bisect || !(secant > a && secant < b) {
            0.5 * (a + b)
        } else {
            secant
        };
        fx = g_bd(x)?;
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        let width = b - a;
        force_bisect = width > 0.5 * last_width;
        last_width = width;
        // Refine well past the acceptance tolerance; the secant phase makes
        // this cheap and dark-state confinement needs it.
        if fx.abs() < 1e-12 || width < 1e-12 {
            break;
        }
    }
    Ok(OffPointSolution {
        f_cs_off: x,
        g_bd_residual: fx,
        bracket: (lo, hi),
        iterations,
        candidate_brackets: candidates,
    })
}

/// Off-point solutions across spectator frequencies, solved in parallel.
pub fn off_point_sweep(config: &DeviceConfig, f_s_grid: &[f64], bracket: (f64, f64)) -> Vec<Result<OffPointSolution>> {
    use rayon::prelude::*;
    f_s_grid
        .par_iter()
        .map(|&f_s| solve_off_frequency(config, f_s, bracket))
        .collect()
}

/// CSV with columns `f_s_ghz, f_cs_off_ghz, residual_ghz`; failed points are
/// written with empty fields.
pub fn write_off_point_csv<W: Write>(f_s_grid: &[f64], rows: &[Result<OffPointSolution>], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["f_s_ghz", "f_cs_off_ghz", "residual_ghz"])?;
    for (f_s, r) in f_s_grid.iter().zip(rows) {
        match r {
            Ok(sol) => w.write_record([
                format!("{f_s:.6}"),
                format!("{:.6}", sol.f_cs_off),
                format!("{:.3e}", sol.g_bd_residual),
            ])?,
            Err(_) => w.write_record([format!("{f_s:.6}"), String::new(), String::new()])?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Closure solution for spectator couplings `g2_i` that keep every dark
/// direction decoupled, alongside its weak-coupling limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiSpectatorG2 {
    pub exact: Vec<f64>,
    pub weak: Vec<f64>,
    /// Bright-state energy implied by the exact solution.
    pub f_b: f64,
}

/// `spectators[i] = (g1_i, fS_i)`, with `|02>` degenerate with `|11>` at `f11`.
pub fn multi_spectator_g2(g_gate: f64, spectators: &[(f64, f64)], f11: f64) -> Result<MultiSpectatorG2> {
    let sum_g1_sq: f64 = spectators.iter().map(|&(g1, _)| g1 * g1).sum();
    let denom = g_gate * g_gate - sum_g1_sq;
    let scale = g_gate * g_gate + sum_g1_sq;
    if g_gate == 0.0 || !(denom.abs() > 1e-12 * scale) {
        return Err(Error::DenominatorUnderflow { value: denom });
    }
    // Bright-state energy from the |02> row of the closure condition, written
    // relative to f11 to avoid cancellation.
    let shift: f64 = -spectators
        .iter()
        .map(|&(g1, fs)| g1 * g1 * (fs - f11))
        .sum::<f64>()
        / denom;
    let exact = spectators
        .iter()
        .map(|&(g1, fs)| g1 * (shift - (fs - f11)) / g_gate)
        .collect();
    let weak = spectators
        .iter()
        .map(|&(g1, fs)| -g1 * (fs - f11) / g_gate)
        .collect();
    Ok(MultiSpectatorG2 {
        exact,
        weak,
        f_b: f11 + shift,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedBright {
    /// Unit vector over `[|02>, |S_1>, ..., |S_n>]`.
    pub coefficients: Vec<f64>,
    pub g_b: f64,
    pub f_b: f64,
    /// `‖H|B> - g_B|11> - f_B|B>‖₂`.
    pub closure_residual: f64,
}

pub fn generalized_bright_state(h: &MultiLevelH) -> Result<GeneralizedBright> {
    let mut raw = vec![h.g_gate];
    raw.extend(h.spectators.iter().map(|s| s.g1));
    let g_b = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    if g_b == 0.0 {
        return Err(Error::NoBrightDirection);
    }
    let coefficients: Vec<f64> = raw.iter().map(|x| x / g_b).collect();
    let n = h.dim();
    let m = h.matrix_offset(h.f11);
    let mut b = DVector::zeros(n);
    for (k, c) in coefficients.iter().enumerate() {
        b[k + 1] = *c;
    }
    let hb = &m * &b;
    let f_b_rel = b.dot(&hb);
    let mut r = hb - &b * f_b_rel;
    r[0] -= g_b;
    Ok(GeneralizedBright {
        coefficients,
        g_b,
        f_b: h.f11 + f_b_rel,
        closure_residual: r.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::SpectatorLevel;
    use crate::linalg::sorted_eigenvalues;
    use proptest::prelude::*;

    fn h(g_gate: f64, g1: f64, g2: f64, delta: f64) -> ThreeLevelH {
        ThreeLevelH {
            f11: 8.788,
            f02: 8.788,
            f_s: 8.788 + delta,
            g_gate,
            g1,
            g2,
        }
    }

    #[test]
    fn no_stray_coupling_gives_identity_frame() {
        let fr = bright_dark_frame(&h(0.027, 0.0, 0.003, -0.006)).unwrap();
        assert_eq!(fr.theta, 0.0);
        assert_eq!(fr.g_b, 0.027);
        assert_eq!(fr.g_bd, 0.003);
        assert_eq!(fr.f_b, 8.788);
        assert!((fr.f_d - (8.788 - 0.006)).abs() < 1e-15);
    }

    #[test]
    fn reference_frame_values() {
        let fr = bright_dark_frame(&h(0.027, 0.0005, 0.0, -0.006)).unwrap();
        assert!((fr.theta - 0.018_516_402).abs() < 1e-9);
        assert!((fr.g_b - 0.027_004_63).abs() < 1e-8);
    }

    #[test]
    fn degenerate_frames() {
        assert!(matches!(
            bright_dark_frame(&h(0.0, 0.001, 0.0, 0.0)),
            Err(Error::DegenerateFrame)
        ));
        let fr = bright_dark_frame(&h(0.0, 0.0, 0.001, 0.0)).unwrap();
        assert!(fr.degenerate);
        assert_eq!(fr.theta, 0.0);
    }

    // Newton solve of g_BD(g2) = 0 as an independent oracle.
    #[test]
    fn weak_coupling_null_matches_newton_root() {
        let (g, g1, delta) = (0.027, 0.0005, -0.006);
        let mut g2 = 0.0;
        for _ in 0..20 {
            let f = bright_dark_frame(&h(g, g1, g2, delta)).unwrap().g_bd;
            let df = (bright_dark_frame(&h(g, g1, g2 + 1e-7, delta)).unwrap().g_bd - f) / 1e-7;
            g2 -= f / df;
        }
        assert!((g2 - 1.111_492e-4).abs() < 1e-10, "root {g2}");
        assert!((g2 - (-g1 * delta / g)).abs() < 1e-7);
        let multi = multi_spectator_g2(g, &[(g1, 8.788 + delta)], 8.788).unwrap();
        assert!((multi.exact[0] - g2).abs() < 1e-12);
    }

    #[test]
    fn nulled_frame_is_block_diagonal() {
        let (g, g1, delta) = (-0.027, 0.0005, -0.006);
        let g2 = multi_spectator_g2(g, &[(g1, 8.788 + delta)], 8.788).unwrap().exact[0];
        let t = transform_hamiltonian(&h(g, g1, g2, delta)).unwrap();
        assert!(t[(1, 2)].abs() < 1e-15);
        assert_eq!(t[(0, 2)], 0.0);
    }

    #[test]
    fn off_point_root_in_bundled_window() {
        let cfg = DeviceConfig::bundled();
        let sol = solve_off_frequency(&cfg, 4.27, (5.0, 6.4)).unwrap();
        assert_eq!(sol.candidate_brackets.len(), 1);
        assert!(sol.g_bd_residual.abs() < OFF_POINT_TOL_GHZ);
        assert!(sol.f_cs_off > 5.0 && sol.f_cs_off < 6.4);
        // Dense 1 kHz oracle: g_BD changes sign within one step of the root.
        let f_l = cfg.cz_point().f_l_ghz;
        let gbd = |f: f64| bright_dark_frame(&build_three_level(&cfg, f, 4.27, f_l).unwrap().h).unwrap().g_bd;
        assert!(gbd(sol.f_cs_off - 1e-6).signum() != gbd(sol.f_cs_off + 1e-6).signum());
        assert!((sol.f_cs_off - 5.5649).abs() < 2e-3, "root {}", sol.f_cs_off);
    }

    #[test]
    fn missing_sign_change_is_reported() {
        let cfg = DeviceConfig::bundled();
        let err = solve_off_frequency(&cfg, 4.27, (6.0, 6.4)).unwrap_err();
        assert!(matches!(err, Error::NoOffPoint { .. }));
        assert!(!err.is_numerical());
    }

    #[test]
    fn decoupled_spectator_nulls_where_leakage_coupling_vanishes() {
        // g1 = 0 and a linear g2(f) with root at 5.7.
        let sol = solve_off_frequency_with(
            |f| Ok(bright_dark_frame(&h(0.027, 0.0, 0.01 * (f - 5.7), -0.006))?.g_bd),
            (5.0, 6.4),
            6.4,
        )
        .unwrap();
        assert!((sol.f_cs_off - 5.7).abs() < 1e-6);
    }

    #[test]
    fn closest_root_to_idle_is_chosen() {
        let sol = solve_off_frequency_with(|f| Ok((f - 5.2) * (f - 6.1)), (5.0, 6.4), 6.4).unwrap();
        assert_eq!(sol.candidate_brackets.len(), 2);
        assert!((sol.f_cs_off - 6.1).abs() < 1e-6);
    }

    #[test]
    fn decoupled_spectators_need_no_compensation() {
        let r = multi_spectator_g2(0.027, &[(0.0, 8.7), (0.0, 8.9)], 8.788).unwrap();
        assert_eq!(r.exact, vec![0.0, 0.0]);
    }

    #[test]
    fn weak_coupling_limit_within_one_percent() {
        let g = 0.027;
        let sp = [(g / 20.0, 8.782), (g / 25.0, 8.7815), (g / 30.0, 8.7825)];
        let r = multi_spectator_g2(g, &sp, 8.788).unwrap();
        for (e, w) in r.exact.iter().zip(&r.weak) {
            assert!(((e - w) / e).abs() < 0.01, "{e} vs {w}");
        }
    }

    #[test]
    fn closure_denominator_underflow() {
        assert!(matches!(
            multi_spectator_g2(0.001, &[(0.001, 8.7)], 8.788),
            Err(Error::DenominatorUnderflow { .. })
        ));
    }

    fn multi(g: f64, sp: &[(f64, f64, f64)]) -> MultiLevelH {
        MultiLevelH {
            f11: 8.788,
            f02: 8.788,
            g_gate: g,
            spectators: sp
                .iter()
                .map(|&(g1, f_s, g2)| SpectatorLevel { f_s, g1, g2 })
                .collect(),
        }
    }

    #[test]
    fn pure_gate_pair_bright_state() {
        let b = generalized_bright_state(&multi(0.027, &[])).unwrap();
        assert_eq!(b.coefficients, vec![1.0]);
        assert_eq!(b.g_b, 0.027);
        assert!(b.closure_residual < 1e-15);
        assert!(matches!(
            generalized_bright_state(&multi(0.0, &[(0.0, 8.7, 0.001)])),
            Err(Error::NoBrightDirection)
        ));
    }

    #[test]
    fn closure_residual_vanishes_at_exact_solution_and_grows_linearly() {
        let g = -0.027;
        let sp = [(0.0005, 8.782), (0.0004, 8.795), (0.0006, 8.770)];
        let g2 = multi_spectator_g2(g, &sp, 8.788).unwrap().exact;
        let build = |bump: f64| {
            let levels: Vec<_> = sp
                .iter()
                .zip(&g2)
                .enumerate()
                .map(|(i, (&(g1, fs), &g2))| (g1, fs, if i == 1 { g2 + bump } else { g2 }))
                .collect();
            generalized_bright_state(&multi(g, &levels)).unwrap()
        };
        assert!(build(0.0).closure_residual < 1e-10);
        let r1 = build(1e-5).closure_residual;
        let r2 = build(2e-5).closure_residual;
        assert!(r1 > 1e-8);
        assert!((r2 / r1 - 2.0).abs() < 1e-3);
        let norm: f64 = build(0.0).coefficients.iter().map(|c| c * c).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_solution_for_one_spectator_ignores_others() {
        let g = 0.027;
        let a = multi_spectator_g2(g, &[(0.0005, 8.782), (0.0004, 8.795)], 8.788).unwrap();
        // Spectator 0's closure row vanishes whatever spectator 1's g2 is.
        let hm = multi(g, &[(0.0005, 8.782, a.exact[0]), (0.0004, 8.795, 0.5)]);
        let b = generalized_bright_state(&hm).unwrap();
        let m = hm.matrix_offset(hm.f11);
        let mut v = DVector::zeros(4);
        for (k, c) in b.coefficients.iter().enumerate() {
            v[k + 1] = *c;
        }
        let row = (&m * &v)[2] - (a.f_b - hm.f11) * v[2];
        assert!(row.abs() < 1e-12);
    }

    fn arb_three_level() -> impl Strategy<Value = ThreeLevelH> {
        (
            -0.05f64..0.05,
            -0.05f64..0.05,
            -0.05f64..0.05,
            -0.2f64..0.2,
            -0.2f64..0.2,
        )
            .prop_filter("nonzero gate coupling", |t| t.0.abs() > 1e-4)
            .prop_map(|(g, g1, g2, d02, ds)| ThreeLevelH {
                f11: 8.788,
                f02: 8.788 + d02,
                f_s: 8.788 + ds,
                g_gate: g,
                g1,
                g2,
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn dark_state_never_couples_to_gate_state(h in arb_three_level()) {
            let u = frame_rotation(bright_dark_frame(&h).unwrap().theta);
            let rotated = u.transpose() * h.matrix_offset(h.f11) * &u;
            prop_assert!(rotated[(0, 2)].abs() < 1e-13);
        }

        #[test]
        fn transform_matches_congruence(h in arb_three_level()) {
            let fr = bright_dark_frame(&h).unwrap();
            let t = transform_hamiltonian(&h).unwrap();
            let u = frame_rotation(fr.theta);
            let rotated = u.transpose() * h.matrix() * &u;
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((rotated[(i, j)] - t[(i, j)]).abs() < 1e-13);
                }
            }
            prop_assert!((t[(1, 2)] - fr.g_bd).abs() < 1e-13);
            prop_assert!(fr.g_b >= h.g_gate.abs());
            prop_assert!(fr.theta.abs() < std::f64::consts::FRAC_PI_2);
        }

        #[test]
        fn transform_preserves_spectrum_and_trace(h in arb_three_level()) {
            let fr = bright_dark_frame(&h).unwrap();
            let t = transform_hamiltonian(&h).unwrap();
            let a = sorted_eigenvalues(&h.matrix());
            let b = sorted_eigenvalues(&t);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-10);
            }
            prop_assert!((t.trace() - (h.f11 + h.f02 + h.f_s)).abs() < 1e-12);
            prop_assert!((fr.f_b + fr.f_d - (h.f02 + h.f_s)).abs() < 1e-12);
        }
    }
}
