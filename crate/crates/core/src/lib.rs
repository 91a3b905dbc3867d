// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Spectator-leakage nulling for tunable-coupler CZ gates.
//!
//! The crate is organised bottom-up:
//!
//! - [`device`]: device parameters, topology, and flux-crosstalk compensation.
//! - [`hamiltonian`]: Schrieffer-Wolff couplings, the effective three-level and
//!   multi-spectator Hamiltonians, eigenvalue sweeps, and the full Kerr-oscillator
//!   model used as an exact-diagonalization oracle.
//! - [`blockdiag`]: the bright/dark frame, the coupler off-point solver, and the
//!   multi-spectator closure solution.
//! - [`dynamics`]: pulse envelopes, a unitary adaptive propagator, and CZ gate
//!   simulation.
//! - [`metrology`]: interference amplification model, decay fitters, error-budget
//!   arithmetic, and synthetic-data generators.
//!
//! Frequencies are `f = ω/2π` in GHz, gate times in ns and coherence times in µs.
//! Phases accumulate as `2π·f·t`.

// `!(x > 0.0)` is the NaN-rejecting form used throughout input validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blockdiag;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod metrology;

pub use error::{Error, Result};
