// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Measurement-side models: interference amplification, benchmark decay
//! fits, error-budget arithmetic, and synthetic data.

pub mod budget;
pub mod fit;
pub mod lsq;
pub mod su2;
pub mod synth;

pub use budget::{
    COMPUTATIONAL_DIM, ErrorBudget, MeasurementFloor, average_fidelity, leakage_error_contribution,
    measurement_floor, seepage_rate, seepage_rate_from_config, total_leakage,
};
pub use fit::{BetaFit, FidelityFit, LeakageFit, NoiseModel, fit_beta, fit_leakage_population, fit_xeb_fidelity};
pub use su2::{PhaseScan, SU2Params, scan_phase_for_max_amplitude, su2_sequence_population, su2_sequence_population_matrix};
pub use synth::{SeriesPoint, XebTruth, synth_su2_series, synth_xeb_data};
