// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense linear-algebra helpers over `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigen-decomposition of a real symmetric matrix with eigenvalues sorted
/// ascending. Columns of the returned matrix are the matching eigenvectors.
pub fn sorted_eigh(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Apply `exp(-i·2π·H·dt)` to `psi` for real symmetric `H` (GHz) and `dt` (ns).
///
/// The propagator is built from the spectral decomposition, so it is unitary to
/// rounding for any step size.
pub fn apply_propagator(h: &DMatrix<f64>, dt: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let n = psi.len();
    let mut coeffs = DVector::<Complex64>::zeros(n);
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..n {
            acc += psi[r] * v[(r, k)];
        }
        let phase = -std::f64::consts::TAU * eig.eigenvalues[k] * dt;
        coeffs[k] = acc * Complex64::from_polar(1.0, phase);
    }
    let mut out = DVector::<Complex64>::zeros(n);
    for r in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            acc += coeffs[k] * v[(r, k)];
        }
        out[r] = acc;
    }
    out
}

pub fn norm(psi: &DVector<Complex64>) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// True if `m` equals its transpose bit-for-bit.
pub fn is_exactly_symmetric(m: &DMatrix<f64>) -> bool {
    m.nrows() == m.ncols()
        && (0..m.nrows()).all(|r| (0..r).all(|c| m[(r, c)].to_bits() == m[(c, r)].to_bits()))
}
