// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Levenberg-Marquardt least squares with a central-difference Jacobian.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqOptions {
    pub max_iter: usize,
    /// Stop when every parameter moves by less than this relative amount.
    pub rel_tol: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        LsqOptions {
            max_iter: 200,
            rel_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqResult {
    pub params: Vec<f64>,
    /// Half the residual sum of squares.
    pub cost: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(JᵀJ)⁻¹` at the solution, absent when `JᵀJ` is singular.
    pub jtj_inverse: Option<DMatrix<f64>>,
}

impl LsqResult {
    /// Covariance assuming unit-variance residuals (already weighted).
    pub fn covariance_known_variance(&self) -> Option<DMatrix<f64>> {
        self.jtj_inverse.clone()
    }

    /// Covariance with the residual variance estimated from the fit.
    pub fn covariance_scaled(&self, n_data: usize) -> Option<DMatrix<f64>> {
        let dof = n_data.saturating_sub(self.params.len()).max(1);
        let s2 = 2.0 * self.cost / dof as f64;
        self.jtj_inverse.as_ref().map(|m| m * s2)
    }
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}

pub fn jacobian(f: &impl Fn(&[f64]) -> Vec<f64>, p: &[f64], m: usize) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(m, p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = 1e-6 * p[j].abs().max(1e-4);
        q[j] = p[j] + h;
        let up = f(&q);
        q[j] = p[j] - h;
        let dn = f(&q);
        q[j] = p[j];
        for i in 0..m {
            jac[(i, j)] = (up[i] - dn[i]) / (2.0 * h);
        }
    }
    jac
}

/// Minimize `½‖f(p)‖²` from `p0`.
pub fn levenberg_marquardt(f: impl Fn(&[f64]) -> Vec<f64>, p0: &[f64], opts: &LsqOptions) -> LsqResult {
    let mut p = p0.to_vec();
    let mut r = f(&p);
    let m = r.len();
    let mut cost = cost_of(&r);
    let mut mu = -1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter && cost > 0.0 {
        iterations += 1;
        let jac = jacobian(&f, &p, m);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * DVector::from_column_slice(&r);
        let diag: Vec<f64> = (0..p.len()).map(|k| jtj[(k, k)].max(1e-300)).collect();
        if mu < 0.0 {
            mu = 1e-3;
        }
        let mut accepted = false;
        while mu < 1e16 {
            let mut a = jtj.clone();
            for k in 0..p.len() {
                a[(k, k)] += mu * diag[k];
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                mu *= 4.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let r_trial = f(&trial);
            let c_trial = cost_of(&r_trial);
            if c_trial.is_finite() && c_trial <= cost {
                let small = p
                    .iter()
                    .zip(step.iter())
                    .all(|(pi, di)| di.abs() <= opts.rel_tol * pi.abs());
                // A parameter sitting at zero never meets the relative test;
                // stop once the cost itself has stagnated.
                let stalled = cost - c_trial <= 1e-15 * cost;
                p = trial;
                r = r_trial;
                cost = c_trial;
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                if small || stalled {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        // No descent direction left: the current point is a minimum to rounding.
        if !accepted {
            converged = true;
        }
        if converged {
            break;
        }
    }
    if cost == 0.0 {
        converged = true;
    }
    let jac = jacobian(&f, &p, m);
    let jtj_inverse = (jac.transpose() * &jac).try_inverse();
    LsqResult {
        params: p,
        cost,
        residual_norm: (2.0 * cost).sqrt(),
        iterations,
        converged,
        jtj_inverse,
    }
}
