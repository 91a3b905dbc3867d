// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive exponential-midpoint integration of `i dψ/dt = 2π H(t) ψ`.
//!
//! Every step applies `exp(-i 2π H(t_mid) dt)` exactly, so the scheme is
//! unitary for any step size. Step size is controlled by step doubling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{apply_propagator, norm};

pub type State = DVector<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorOptions {
    /// Local error bound per accepted step (2-norm of the state difference).
    pub tol: f64,
    pub min_step_ns: f64,
    pub max_step_ns: f64,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            tol: 1e-10,
            min_step_ns: 1e-6,
            max_step_ns: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// State at each requested grid time.
    pub states: Vec<State>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Integrate from `t_grid[0]` through each later grid time.
///
/// `t_grid` must be nondecreasing; `psi0` must be normalized.
pub fn propagate(
    h_of_t: impl Fn(f64) -> Result<DMatrix<f64>>,
    psi0: &State,
    t_grid: &[f64],
    opts: &PropagatorOptions,
) -> Result<Propagation> {
    if t_grid.is_empty() {
        return Err(Error::Input("time grid is empty".into()));
    }
    if !((norm(psi0) - 1.0).abs() < 1e-9) {
        return Err(Error::Input("initial state is not normalized".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Input("time grid must be nondecreasing".into()));
    }
    let step = |psi: &State, t: f64, dt: f64| -> Result<State> {
        Ok(apply_propagator(&h_of_t(t + 0.5 * dt)?, dt, psi))
    };

    let mut psi = psi0.clone();
    let mut t = t_grid[0];
    let mut dt = opts.max_step_ns.min(0.05);
    let mut states = vec![psi.clone()];
    let (mut accepted, mut rejected) = (0, 0);
    for &target in &t_grid[1..] {
        while target - t > 1e-12 {
            let h = dt.min(target - t);
            let full = step(&psi, t, h)?;
            let half = step(&psi, t, 0.5 * h)?;
            let fine = step(&half, t + 0.5 * h, 0.5 * h)?;
            let err = norm(&(&full - &fine));
            if err <= opts.tol {
                psi = fine;
                t += h;
                accepted += 1;
                // Midpoint local error scales as h³.
                let grow = if err == 0.0 {
                    2.0
                } else {
                    (0.9 * (opts.tol / err).cbrt()).min(2.0)
                };
                // Do not let a short final sub-step shrink the running step.
                dt = (dt.max(h) * grow).min(opts.max_step_ns);
            } else {
                rejected += 1;
                dt = h * (0.9 * (opts.tol / err).cbrt()).max(0.1);
                if dt < opts.min_step_ns {
                    return Err(Error::StepUnderflow { t, dt });
                }
            }
        }
        t = target;
        states.push(psi.clone());
    }
    Ok(Propagation {
        states,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize, k: usize) -> State {
        let mut v = State::zeros(n);
        v[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let psi0 = basis(3, 1);
        let out = propagate(|_| Ok(DMatrix::zeros(3, 3)), &psi0, &[0.0, 5.0, 40.0], &Default::default()).unwrap();
        for s in out.states {
            assert_eq!(s, psi0);
        }
    }

    #[test]
    fn resonant_rabi_oscillation() {
        let g = 0.027;
        let h = DMatrix::from_row_slice(2, 2, &[0.0, g, g, 0.0]);
        let grid: Vec<f64> = (0..=80).map(|k| 0.5 * k as f64).collect();
        let out = propagate(|_| Ok(h.clone()), &basis(2, 0), &grid, &Default::default()).unwrap();
        for (t, s) in grid.iter().zip(&out.states) {
            let expect = (std::f64::consts::TAU * g * t).sin().powi(2);
            assert!((s[1].norm_sqr() - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn driven_evolution_preserves_norm() {
        let h = |t: f64| {
            let d = 0.05 * (0.3 * t).sin();
            Ok(DMatrix::from_row_slice(3, 3, &[0.0, 0.027, 0.001, 0.027, d, 0.004, 0.001, 0.004, -0.006]))
        };
        let out = propagate(h, &basis(3, 0), &[0.0, 40.0], &Default::default()).unwrap();
        assert!((norm(&out.states[1]) - 1.0).abs() < 1e-9);
        assert!(out.accepted_steps > 10);
    }

    #[test]
    fn unreachable_tolerance_underflows() {
        let h = |t: f64| Ok(DMatrix::from_row_slice(2, 2, &[0.0, 1e3 * t.sin(), 1e3 * t.sin(), 0.0]));
        let opts = PropagatorOptions {
            tol: 1e-300,
            ..Default::default()
        };
        assert!(matches!(
            propagate(h, &basis(2, 0), &[0.0, 1.0], &opts),
            Err(Error::StepUnderflow { .. })
        ));
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let psi = basis(2, 0) * Complex64::new(2.0, 0.0);
        assert!(propagate(|_| Ok(DMatrix::zeros(2, 2)), &psi, &[0.0, 1.0], &Default::default()).is_err());
    }
}
