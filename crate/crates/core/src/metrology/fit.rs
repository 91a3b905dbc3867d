// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Fitters for amplified-leakage series and benchmark decays.
//!
//! Every fit starts from a coarse grid and is polished with
//! [`levenberg_marquardt`]. The exponential fits eliminate their linear
//! amplitudes on the grid (variable projection) so only the decay base is
//! searched.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::budget::average_fidelity;
use super::lsq::{LsqOptions, LsqResult, levenberg_marquardt};
use super::su2::{fold_beta, fold_phase, population};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// Exact data; the residual scatter sets the reported uncertainty.
    Noiseless,
    /// Binomial estimates from `shots` repetitions per point.
    Binomial { shots: u64 },
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn logspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub beta: f64,
    pub zeta_prime: f64,
    /// Per-gate leakage `sin²β / 4`.
    pub l1: f64,
    pub beta_sigma: f64,
    pub l1_sigma: f64,
    /// Covariance of `(β, ζ')`.
    pub covariance: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Fit the closed-form amplified population to `(n, P)` pairs.
///
/// Full contrast is assumed. An overall amplitude scale cannot be fitted
/// alongside (β, ζ') because the model only exposes one amplitude and one
/// frequency.
pub fn fit_beta(series: &[(u32, f64)], noise: NoiseModel) -> Result<BetaFit> {
    if series.len() < 8 {
        return Err(Error::Input("need at least 8 points".into()));
    }
    if series.iter().any(|&(_, p)| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Input("populations must lie in [0, 1]".into()));
    }
    if series.iter().all(|&(_, p)| p == 0.0) {
        return Ok(BetaFit {
            beta: 0.0,
            zeta_prime: 0.0,
            l1: 0.0,
            beta_sigma: 0.0,
            l1_sigma: 0.0,
            covariance: vec![vec![0.0; 2]; 2],
            residual_norm: 0.0,
            iterations: 0,
        });
    }

    let fit_with = |weights: &[f64], starts: &[[f64; 2]]| -> Option<LsqResult> {
        let resid = |q: &[f64]| -> Vec<f64> {
            series
                .iter()
                .zip(weights)
                .map(|(&(n, p), w)| w * (population(q[0], q[1], n) - p))
                .collect()
        };
        starts
            .iter()
            .map(|s| levenberg_marquardt(resid, s, &LsqOptions::default()))
            .filter(|r| r.converged)
            .min_by(|a, b| a.cost.total_cmp(&b.cost))
    };

    // Coarse grid over the fundamental domain.
    let cost = |b: f64, z: f64| -> f64 { series.iter().map(|&(n, p)| (population(b, z, n) - p).powi(2)).sum() };
    let mut grid: Vec<(f64, [f64; 2])> = Vec::new();
    for b in logspace(1e-3, FRAC_PI_2 - 1e-3, 48) {
        for k in 0..=48 {
            let z = FRAC_PI_2 * k as f64 / 48.0;
            grid.push((cost(b, z), [b, z]));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    let starts: Vec<[f64; 2]> = grid.iter().take(6).map(|g| g.1).collect();

    let unit = vec![1.0; series.len()];
    let mut best = fit_with(&unit, &starts)
        .ok_or_else(|| Error::Fit(format!("no start converged; best grid point {:?}", starts[0])))?;
    let mut cov = best.covariance_scaled(series.len());
    if let NoiseModel::Binomial { shots } = noise {
        // Reweight by the binomial variance of the fitted model, floored at
        // one count so exact zeros keep finite weight.
        let n = shots as f64;
        let w: Vec<f64> = series
            .iter()
            .map(|&(k, _)| {
                let p = population(best.params[0], best.params[1], k).clamp(1.0 / n, 1.0 - 1.0 / n);
                (n / (p * (1.0 - p))).sqrt()
            })
            .collect();
        best = fit_with(&w, &[[best.params[0], best.params[1]]])
            .ok_or_else(|| Error::Fit(format!("weighted refit diverged from {:?}", best.params)))?;
        cov = best.covariance_known_variance();
    }

    let beta = fold_beta(best.params[0]);
    let zeta_prime = fold_phase(best.params[1]);
    let omega = (beta.cos() * zeta_prime.cos()).acos();
    let (n_lo, n_hi) = series
        .iter()
        .fold((u32::MAX, 0), |(lo, hi), &(n, _)| (lo.min(n), hi.max(n)));
    if (n_hi - n_lo) as f64 * omega < FRAC_PI_2 {
        return Err(Error::Fit(format!(
            "series spans less than half an oscillation (beta = {beta:.6}, zeta' = {zeta_prime:.6})"
        )));
    }
    let cov = cov.unwrap_or_else(|| DMatrix::from_element(2, 2, f64::NAN));
    let beta_sigma = cov[(0, 0)].max(0.0).sqrt();
    Ok(BetaFit {
        beta,
        zeta_prime,
        l1: beta.sin().powi(2) / 4.0,
        beta_sigma,
        l1_sigma: ((2.0 * beta).sin() / 4.0).abs() * beta_sigma,
        covariance: to_rows(&cov),
        residual_norm: best.residual_norm,
        iterations: best.iterations,
    })
}

/// Linear least squares on the given columns. Returns the coefficients, the
/// residual sum of squares, and the condition number of the column-normalized
/// design.
fn linear_fit(cols: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64, f64) {
    let m = y.len();
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300)).collect();
    let a = DMatrix::from_fn(m, cols.len(), |i, j| cols[j][i] / norms[j]);
    let svd = a.clone().svd(true, true);
    let s = &svd.singular_values;
    let cond = s.max() / s.min().max(1e-300);
    let coeffs = svd
        .solve(&DVector::from_column_slice(y), 1e-14 * s.max())
        .map(|c| c.iter().zip(&norms).map(|(c, n)| c / n).collect::<Vec<_>>())
        .unwrap_or_else(|_| vec![0.0; cols.len()]);
    let rss = (0..m)
        .map(|i| {
            let fit: f64 = cols.iter().zip(&coeffs).map(|(c, k)| c[i] * k).sum();
            (fit - y[i]).powi(2)
        })
        .sum();
    (coeffs, rss, cond)
}

fn powers(depths: &[f64], lambda: f64) -> Vec<f64> {
    depths.iter().map(|&m| lambda.powf(m)).collect()
}

/// Best decay base `1 - x` on a log grid of `x`, with amplitudes eliminated.
fn grid_decay(depths: &[f64], y: &[f64], fixed: &[Vec<f64>]) -> f64 {
    logspace(1e-7, 0.999, 240)
        .map(|x| {
            let mut cols = fixed.to_vec();
            cols.push(powers(depths, 1.0 - x));
            (x, linear_fit(&cols, y).1)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(x, _)| x)
        .unwrap_or(1e-3)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageFit {
    pub l1: f64,
    pub l2: f64,
    pub p0: f64,
    pub p_inf: f64,
    pub lambda1: f64,
    pub l1_sigma: f64,
    pub l2_sigma: f64,
    /// Covariance of `(p0, p_inf, λ1)`.
    pub covariance: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Flat data: no decay is resolvable and `L1 + L2` is set to zero.
    pub degenerate: bool,
}

/// Fit `p_L(m) = (p0 - p_inf)·λ1^m + p_inf` to `(m, p_L)` pairs.
pub fn fit_leakage_population(data: &[(u32, f64)]) -> Result<LeakageFit> {
    let mut uniq: Vec<u32> = data.iter().map(|d| d.0).collect();
    uniq.sort_unstable();
    uniq.dedup();
    if uniq.len() < 5 {
        return Err(Error::Input("need at least 5 distinct cycle depths".into()));
    }
    if data.iter().any(|&(_, p)| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Input("leak populations must lie in [0, 1]".into()));
    }
    let depths: Vec<f64> = data.iter().map(|d| d.0 as f64).collect();
    let y: Vec<f64> = data.iter().map(|d| d.1).collect();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = y.iter().fold(0.0f64, |s, v| s.max((v - mean).abs()));
    if spread <= 1e-14 * mean.abs().max(1e-300) || spread == 0.0 {
        return Ok(LeakageFit {
            l1: 0.0,
            l2: 0.0,
            p0: mean,
            p_inf: mean,
            lambda1: 1.0,
            l1_sigma: 0.0,
            l2_sigma: 0.0,
            covariance: vec![vec![0.0; 3]; 3],
            residual_norm: 0.0,
            iterations: 0,
            degenerate: true,
        });
    }

    let ones = vec![1.0; y.len()];
    let x0 = grid_decay(&depths, &y, std::slice::from_ref(&ones));
    let (c, _, _) = linear_fit(&[ones.clone(), powers(&depths, 1.0 - x0)], &y);
    // Parameters (p0, p_inf, x) with λ1 = 1 - x.
    let start = [c[0] + c[1], c[0], x0];
    let model = |q: &[f64], m: f64| (q[0] - q[1]) * (1.0 - q[2]).powf(m) + q[1];
    let res = levenberg_marquardt(
        |q| depths.iter().zip(&y).map(|(&m, &v)| model(q, m) - v).collect(),
        &start,
        &LsqOptions::default(),
    );
    if !res.converged {
        return Err(Error::Fit(format!("leakage fit did not converge; best {:?}", res.params)));
    }
    let [p0, p_inf, x] = [res.params[0], res.params[1], res.params[2]];
    let lambda1 = 1.0 - x;
    if !(lambda1 > 0.0 && lambda1 <= 1.0) {
        return Err(Error::Fit(format!("lambda1 = {lambda1} outside (0, 1]")));
    }
    let mut cov = res
        .covariance_scaled(y.len())
        .unwrap_or_else(|| DMatrix::from_element(3, 3, f64::NAN));
    // Gradients of L1 = p_inf·x and L2 = (1 - p_inf)·x in (p0, p_inf, x).
    let var = |g: [f64; 3]| {
        let g = DVector::from_column_slice(&g);
        (g.transpose() * &cov * &g)[(0, 0)].max(0.0).sqrt()
    };
    let l1_sigma = var([0.0, x, p_inf]);
    let l2_sigma = var([0.0, -x, 1.0 - p_inf]);
    // Report in (p0, p_inf, λ1): dλ1/dx = -1.
    for k in 0..2 {
        cov[(k, 2)] = -cov[(k, 2)];
        cov[(2, k)] = -cov[(2, k)];
    }
    Ok(LeakageFit {
        l1: p_inf * x,
        l2: (1.0 - p_inf) * x,
        p0,
        p_inf,
        lambda1,
        l1_sigma,
        l2_sigma,
        covariance: to_rows(&cov),
        residual_norm: res.residual_norm,
        iterations: res.iterations,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub l1: f64,
    pub avg_fidelity: f64,
    /// Covariance of `(A, B, C, λ2)`, or `(B, C, λ2)` after fallback.
    pub covariance: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// The two decays could not be separated; `A` is fixed at zero.
    pub collinear: bool,
}

/// Condition number above which the two decays are treated as inseparable.
const COLLINEAR_CONDITION: f64 = 1e8;

/// Fit `F(m) = A·λ1^m + B·λ2^m + C` with `λ1` held fixed.
pub fn fit_xeb_fidelity(data: &[(u32, f64)], lambda1: f64, l1: f64) -> Result<FidelityFit> {
    let mut uniq: Vec<u32> = data.iter().map(|d| d.0).collect();
    uniq.sort_unstable();
    uniq.dedup();
    if uniq.len() < 8 {
        return Err(Error::Input("need at least 8 distinct depths".into()));
    }
    if !(lambda1 > 0.0 && lambda1 <= 1.0) {
        return Err(Error::Input(format!("lambda1 = {lambda1} outside (0, 1]")));
    }
    let depths: Vec<f64> = data.iter().map(|d| d.0 as f64).collect();
    let y: Vec<f64> = data.iter().map(|d| d.1).collect();
    let ones = vec![1.0; y.len()];
    let l1_col = powers(&depths, lambda1);

    let x0 = grid_decay(&depths, &y, &[l1_col.clone(), ones.clone()]);
    let (_, _, cond) = linear_fit(&[l1_col.clone(), powers(&depths, 1.0 - x0), ones.clone()], &y);

    let finish = |res: LsqResult, a: f64, b: f64, c: f64, x: f64, collinear: bool| -> Result<FidelityFit> {
        if !res.converged {
            return Err(Error::Fit(format!("fidelity fit did not converge; best {:?}", res.params)));
        }
        let lambda2 = 1.0 - x;
        if !(lambda2 > 0.0 && lambda2 <= 1.0 + 1e-12) {
            return Err(Error::Fit(format!("lambda2 = {lambda2} outside (0, 1]")));
        }
        let lambda2 = lambda2.min(1.0);
        let mut cov = res
            .covariance_scaled(y.len())
            .unwrap_or_else(|| DMatrix::from_element(res.params.len(), res.params.len(), f64::NAN));
        let last = res.params.len() - 1;
        for k in 0..last {
            cov[(k, last)] = -cov[(k, last)];
            cov[(last, k)] = -cov[(last, k)];
        }
        Ok(FidelityFit {
            a,
            b,
            c,
            lambda1,
            lambda2,
            l1,
            avg_fidelity: average_fidelity(lambda2, l1),
            covariance: to_rows(&cov),
            residual_norm: res.residual_norm,
            iterations: res.iterations,
            collinear,
        })
    };

    if cond <= COLLINEAR_CONDITION && ((1.0 - x0) - lambda1).abs() > 1e-9 {
        let (c, _, _) = linear_fit(&[l1_col.clone(), powers(&depths, 1.0 - x0), ones.clone()], &y);
        let model = |q: &[f64], m: f64| q[0] * lambda1.powf(m) + q[1] * (1.0 - q[3]).powf(m) + q[2];
        let res = levenberg_marquardt(
            |q| depths.iter().zip(&y).map(|(&m, &v)| model(q, m) - v).collect(),
            &[c[0], c[1], c[2], x0],
            &LsqOptions::default(),
        );
        let q = res.params.clone();
        let (_, _, cond_fit) = linear_fit(&[l1_col.clone(), powers(&depths, 1.0 - q[3]), ones.clone()], &y);
        // A vanishing amplitude leaves its decay base unidentified.
        let amp_ok = q[0].abs().min(q[1].abs()) > 1e-9 * (q[0].abs() + q[1].abs());
        if res.converged && amp_ok && cond_fit <= COLLINEAR_CONDITION {
            return finish(res, q[0], q[1], q[2], q[3], false);
        }
    }

    // Single-exponential fallback, also taken when the two-decay fit wanders
    // onto a zero amplitude and stops converging.
    let x0 = grid_decay(&depths, &y, std::slice::from_ref(&ones));
    let (c, _, _) = linear_fit(&[powers(&depths, 1.0 - x0), ones], &y);
    let model = |q: &[f64], m: f64| q[0] * (1.0 - q[2]).powf(m) + q[1];
    let res = levenberg_marquardt(
        |q| depths.iter().zip(&y).map(|(&m, &v)| model(q, m) - v).collect(),
        &[c[0], c[1], x0],
        &LsqOptions::default(),
    );
    let q = res.params.clone();
    finish(res, 0.0, q[0], q[1], q[2], true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::su2::{SU2Params, su2_sequence_population};
    use crate::metrology::synth::{XebTruth, synth_su2_series, synth_xeb_data};

    fn lengths() -> Vec<u32> {
        (0..=40).collect()
    }

    fn pairs(s: &[crate::metrology::synth::SeriesPoint]) -> Vec<(u32, f64)> {
        s.iter().map(|p| (p.depth, p.value)).collect()
    }

    #[test]
    fn beta_round_trip_noiseless() {
        let p = SU2Params::new(0.0696, 0.1, 0.4);
        let series: Vec<(u32, f64)> = lengths().iter().map(|&n| (n, su2_sequence_population(&p, n))).collect();
        let fit = fit_beta(&series, NoiseModel::Noiseless).unwrap();
        let l1_true = 0.0696f64.sin().powi(2) / 4.0;
        assert!((fit.l1 / l1_true - 1.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.zeta_prime - 0.3).abs() < 1e-6);
    }

    #[test]
    fn flat_series_gives_zero() {
        let series: Vec<(u32, f64)> = lengths().iter().map(|&n| (n, 0.0)).collect();
        let fit = fit_beta(&series, NoiseModel::Noiseless).unwrap();
        assert_eq!((fit.beta, fit.l1), (0.0, 0.0));
    }

    #[test]
    fn beta_fit_rejects_short_series() {
        assert!(fit_beta(&[(1, 0.1), (2, 0.2)], NoiseModel::Noiseless).is_err());
    }

    #[test]
    fn beta_noisy_fit_covers_truth() {
        let p = SU2Params::new(0.0696, 0.3, 0.0);
        let l1_true = 0.0696f64.sin().powi(2) / 4.0;
        let mut covered = 0;
        for trial in 0..20 {
            let s = synth_su2_series(&p, &lengths(), Some(2000), 11, trial).unwrap();
            let fit = fit_beta(&pairs(&s), NoiseModel::Binomial { shots: 2000 }).unwrap();
            if (fit.l1 - l1_true).abs() <= 3.0 * fit.l1_sigma {
                covered += 1;
            }
        }
        assert!(covered >= 18, "{covered}/20");
    }

    fn depths() -> Vec<u32> {
        (0..=50).map(|k| 10 * k).collect()
    }

    #[test]
    fn leakage_round_trip() {
        let t = XebTruth::from_rates(1.21e-3, 4.66e-3, 0.01);
        let (leak, _) = synth_xeb_data(&t, &depths(), None, 0).unwrap();
        let fit = fit_leakage_population(&pairs(&leak)).unwrap();
        assert!((fit.l1 / 1.21e-3 - 1.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.l2 / 4.66e-3 - 1.0).abs() < 1e-6);
        assert!((fit.p0 / 0.01 - 1.0).abs() < 1e-6);
        assert!((fit.p_inf - fit.l1 / (fit.l1 + fit.l2)).abs() < 1e-15);
    }

    #[test]
    fn pure_seepage_fit() {
        let t = XebTruth::from_rates(0.0, 4.66e-3, 0.05);
        let (leak, _) = synth_xeb_data(&t, &depths(), None, 0).unwrap();
        let fit = fit_leakage_population(&pairs(&leak)).unwrap();
        assert!(fit.p_inf.abs() < 1e-8 && fit.l1.abs() < 1e-10, "{fit:?}");
    }

    #[test]
    fn flat_leakage_is_degenerate() {
        let data: Vec<(u32, f64)> = depths().iter().map(|&m| (m, 0.02)).collect();
        let fit = fit_leakage_population(&data).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.l1 + fit.l2, 0.0);
        assert!(fit_leakage_population(&data[..3]).is_err());
    }

    #[test]
    fn fidelity_round_trip() {
        let t = XebTruth::from_rates(1.21e-3, 4.66e-3, 0.01);
        let (_, fid) = synth_xeb_data(&t, &depths(), None, 0).unwrap();
        let fit = fit_xeb_fidelity(&pairs(&fid), t.lambda1(), t.l1).unwrap();
        assert!(!fit.collinear);
        assert!((fit.lambda2 / 0.98 - 1.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.b / 0.9 - 1.0).abs() < 1e-6);
        assert!((fit.avg_fidelity - average_fidelity(0.98, 1.21e-3)).abs() < 1e-6);
    }

    #[test]
    fn equal_decays_fall_back() {
        let mut t = XebTruth::from_rates(1.21e-3, 4.66e-3, 0.01);
        t.lambda2 = t.lambda1();
        let (_, fid) = synth_xeb_data(&t, &depths(), None, 0).unwrap();
        let fit = fit_xeb_fidelity(&pairs(&fid), t.lambda1(), t.l1).unwrap();
        assert!(fit.collinear);
        assert!((fit.lambda2 - t.lambda1()).abs() < 1e-8, "{fit:?}");
        assert!((fit.b - 0.95).abs() < 1e-6);
    }
}
