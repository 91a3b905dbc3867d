// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-domain CZ simulation.

pub mod cz;
pub mod propagate;
pub mod pulse;

pub use cz::{
    calibrate_gate_duration, cz_schedule, simulate_cz, sweep_coupler_frequency, DeviceBuilder, GateDuration,
    GateMode, HamiltonianBuilder, LeakageSweep, SimOptions, SimResult, TrajectoryPoint,
};
pub use propagate::{propagate, PropagatorOptions};
pub use pulse::{flattop_gaussian, ControlSchedule, PulseShape, PulseSpec};
