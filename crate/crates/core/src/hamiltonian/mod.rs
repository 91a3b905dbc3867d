// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Effective Hamiltonians and the full-model oracle.

pub mod full;
pub mod spectrum;
pub mod sw;
pub mod three_level;

pub use spectrum::{couplings_from_anticrossings, eigenspectrum, SpectrumRow};
pub use sw::{stray_fourth_order, sw_pair_couplings, PairInput, SwCouplings, SW_GUARD_GHZ};
pub use three_level::{
    build_multi_level, build_three_level, build_three_level_at, gate_coupling, EffectiveModel, FluxPoint,
    MultiLevelH, ResonanceCase, SpectatorLevel, ThreeLevelH,
};
