// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("role {0} unresolved")]
    MissingRole(String),

    #[error("invalid {field}: {reason}")]
    Invariant { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("singular matrix (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("SW divergence: denominator {name} = {value:.3e} GHz is inside the guard band")]
    SwDivergence { name: &'static str, value: f64 },

    #[error("degenerate frame: g_gate = 0 with nonzero g1, rotation angle undefined")]
    DegenerateFrame,

    #[error("no bright direction: all couplings to |11> vanish")]
    NoBrightDirection,

    #[error("closure denominator g_gate² - Σ g1² = {value:.3e} GHz² underflows")]
    DenominatorUnderflow { value: f64 },

    #[error("no off-point in window [{lo:.6}, {hi:.6}] GHz: g_BD does not change sign")]
    NoOffPoint { lo: f64, hi: f64 },

    #[error("Hilbert-space dimension {0} exceeds the 1024 limit")]
    DimensionTooLarge(usize),

    #[error("integration failure at t = {t:.6} ns: step {dt:.3e} ns below minimum")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn invariant(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invariant {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical procedure (as opposed to bad input).
    ///
    /// A search window without a root is a bad input: the caller chose it.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SwDivergence { .. }
                | Error::StepUnderflow { .. }
                | Error::Fit(_)
                | Error::DenominatorUnderflow { .. }
        )
    }
}
