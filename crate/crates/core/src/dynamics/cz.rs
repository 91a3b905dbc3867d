// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! CZ gate simulation in the effective model.
//!
//! The state starts in |11> and evolves under the effective Hamiltonian
//! rebuilt from the instantaneous control frequencies. Energies are measured
//! from the instantaneous |11> level, so `arg <11|ψ>` is the conditional phase.

use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use super::propagate::{propagate, PropagatorOptions, State};
use super::pulse::{ControlSchedule, PulseSpec};
use crate::blockdiag::{bright_dark_frame, generalized_bright_state};
use crate::device::DeviceConfig;
use crate::error::{Error, Result};
use crate::hamiltonian::{build_multi_level, FluxPoint, MultiLevelH, ThreeLevelH};
use crate::linalg::{apply_propagator, norm};

/// Qubit ramp width and coupler ramp width, ns.
pub const QUBIT_SIGMA_NS: f64 = 1.25;
pub const COUPLER_SIGMA_NS: f64 = 2.0;
pub const BUFFER_NS: f64 = 7.5;

/// Maps `(f_l, f_cs per spectator)` to the effective Hamiltonian.
pub trait HamiltonianBuilder: Sync {
    fn build(&self, f_l: f64, f_cs: &[f64]) -> Result<MultiLevelH>;
}

impl<F> HamiltonianBuilder for F
where
    F: Fn(f64, &[f64]) -> Result<MultiLevelH> + Sync,
{
    fn build(&self, f_l: f64, f_cs: &[f64]) -> Result<MultiLevelH> {
        self(f_l, f_cs)
    }
}

/// Device-backed builder: the high qubit and gate coupler stay at the CZ
/// point, spectators at `f_s`. `keep` restricts the model to a subset of
/// spectators (all when `None`).
pub struct DeviceBuilder<'a> {
    pub config: &'a DeviceConfig,
    pub f_s: Vec<f64>,
    pub keep: Option<Vec<usize>>,
}

impl<'a> DeviceBuilder<'a> {
    pub fn new(config: &'a DeviceConfig, f_s: Vec<f64>) -> Self {
        DeviceBuilder {
            config,
            f_s,
            keep: None,
        }
    }

    pub fn only(mut self, spectators: Vec<usize>) -> Self {
        self.keep = Some(spectators);
        self
    }
}

impl HamiltonianBuilder for DeviceBuilder<'_> {
    fn build(&self, f_l: f64, f_cs: &[f64]) -> Result<MultiLevelH> {
        let p = FluxPoint {
            f_l,
            f_h: self.config.cz_f_h(),
            f_cg: self.config.cz_f_cg(),
        };
        let (mut h, _) = build_multi_level(self.config, &p, f_cs, &self.f_s)?;
        if let Some(keep) = &self.keep {
            h.spectators = keep.iter().map(|&i| h.spectators[i]).collect();
        }
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GateMode {
    /// Static controls at the CZ point for `duration_ns`.
    Rectangular { duration_ns: f64 },
    /// Flat-top ramps from the idle-equivalent point into the CZ point.
    FlatTop { total_ns: f64 },
}

/// Low-qubit start frequency that reproduces the idle |11>-|02> detuning
/// while the high qubit is held at its CZ frequency.
pub fn idle_equivalent_f_l(config: &DeviceConfig) -> f64 {
    let r = &config.roles;
    config.cz_f_h() + config.role_mode(&r.ql).f_idle_ghz - config.role_mode(&r.qh).f_idle_ghz
}

pub fn cz_schedule(config: &DeviceConfig, mode: GateMode, f_cs_plateau: &[f64]) -> ControlSchedule {
    let f_l_cz = config.cz_point().f_l_ghz;
    match mode {
        GateMode::Rectangular { duration_ns } => ControlSchedule {
            f_l: PulseSpec::constant(f_l_cz, duration_ns),
            f_cs: f_cs_plateau
                .iter()
                .map(|&f| PulseSpec::constant(f, duration_ns))
                .collect(),
            gate_total_ns: duration_ns,
        },
        GateMode::FlatTop { total_ns } => ControlSchedule {
            f_l: PulseSpec::flat_top(idle_equivalent_f_l(config), f_l_cz, QUBIT_SIGMA_NS, BUFFER_NS, total_ns),
            f_cs: f_cs_plateau
                .iter()
                .enumerate()
                .map(|(i, &f)| PulseSpec::flat_top(config.idle_f_cs(i), f, COUPLER_SIGMA_NS, BUFFER_NS, total_ns))
                .collect(),
            gate_total_ns: total_ns,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t_ns: f64,
    pub p11: f64,
    pub p02: f64,
    /// Total population over all spectator levels.
    pub p_s: f64,
    /// Population outside span{|11>, |B>} of the instantaneous Hamiltonian.
    pub p_dark: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    /// Final amplitudes as `[re, im]` over `[|11>, |02>, |S_1>, ...]`.
    pub final_state: Vec<[f64; 2]>,
    pub p_leak: Vec<f64>,
    pub p_return_11: f64,
    pub conditional_phase: f64,
    pub norm_drift: f64,
    pub max_dark_population: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

impl SimResult {
    pub fn total_leakage(&self) -> f64 {
        self.p_leak.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    pub propagator: PropagatorOptions,
    /// Number of evenly spaced trajectory samples (0 disables the trajectory;
    /// dark population is then tracked on 64 internal samples).
    pub trajectory_samples: usize,
}

fn dark_population(h: &MultiLevelH, psi: &State) -> f64 {
    let p11 = psi[0].norm_sqr();
    match generalized_bright_state(h) {
        Ok(b) => {
            let mut amp = Complex64::new(0.0, 0.0);
            for (k, c) in b.coefficients.iter().enumerate() {
                amp += psi[k + 1] * c;
            }
            (1.0 - p11 - amp.norm_sqr()).max(0.0)
        }
        Err(_) => 0.0,
    }
}

pub fn simulate_cz(builder: &dyn HamiltonianBuilder, schedule: &ControlSchedule, opts: &SimOptions) -> Result<SimResult> {
    schedule.validate()?;
    let total = schedule.gate_total_ns;
    let at = |t: f64| builder.build(schedule.f_l.value_at(t), &schedule.f_cs_at(t));
    let n = at(0.0)?.dim();
    let mut psi0 = State::zeros(n);
    psi0[0] = Complex64::new(1.0, 0.0);

    let samples = if opts.trajectory_samples > 0 {
        opts.trajectory_samples.max(2)
    } else {
        64
    };
    let grid: Vec<f64> = (0..samples).map(|k| total * k as f64 / (samples - 1) as f64).collect();
    let out = propagate(
        |t| {
            let h = at(t)?;
            Ok(h.matrix_offset(h.f11))
        },
        &psi0,
        &grid,
        &opts.propagator,
    )?;

    let mut trajectory = Vec::with_capacity(samples);
    let mut max_dark: f64 = 0.0;
    for (&t, psi) in grid.iter().zip(&out.states) {
        let h = at(t)?;
        let p_dark = dark_population(&h, psi);
        max_dark = max_dark.max(p_dark);
        trajectory.push(TrajectoryPoint {
            t_ns: t,
            p11: psi[0].norm_sqr(),
            p02: psi[1].norm_sqr(),
            p_s: (2..n).map(|k| psi[k].norm_sqr()).sum(),
            p_dark,
        });
    }
    let psi = out.states.last().expect("grid nonempty");
    Ok(SimResult {
        final_state: psi.iter().map(|c| [c.re, c.im]).collect(),
        p_leak: (2..n).map(|k| psi[k].norm_sqr()).collect(),
        p_return_11: psi[0].norm_sqr(),
        conditional_phase: psi[0].arg(),
        norm_drift: (norm(psi) - 1.0).abs(),
        max_dark_population: max_dark,
        trajectory: (opts.trajectory_samples > 0).then_some(trajectory),
    })
}

/// CSV with columns `t_ns, p11, p02, pS, pD`.
pub fn write_trajectory_csv<W: Write>(points: &[TrajectoryPoint], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_ns", "p11", "p02", "pS", "pD"])?;
    for p in points {
        w.write_record([
            format!("{:.6}", p.t_ns),
            format!("{:.5e}", p.p11),
            format!("{:.5e}", p.p02),
            format!("{:.5e}", p.p_s),
            format!("{:.5e}", p.p_dark),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageSweep {
    pub f_cs: Vec<f64>,
    pub p_leak: Vec<f64>,
    /// Valley location refined by a parabola through the grid minimum and its
    /// two neighbours.
    pub minimum_f_cs: f64,
    pub minimum_p_leak: f64,
}

/// Final spectator-0 leakage across spectator-coupler plateau frequencies.
pub fn sweep_coupler_frequency(config: &DeviceConfig, f_s: f64, f_cs_grid: &[f64], mode: GateMode, opts: &SimOptions) -> Result<LeakageSweep> {
    use rayon::prelude::*;
    if f_cs_grid.is_empty() {
        return Err(Error::Input("coupler grid is empty".into()));
    }
    let n_spec = config.n_spectators();
    let mut f_s_all: Vec<f64> = (0..n_spec)
        .map(|i| config.role_mode(&config.roles.qs[i]).f_idle_ghz)
        .collect();
    f_s_all[0] = f_s;
    let builder = DeviceBuilder::new(config, f_s_all).only(vec![0]);
    let p_leak: Vec<f64> = f_cs_grid
        .par_iter()
        .map(|&f| {
            let mut plateau: Vec<f64> = (0..n_spec).map(|i| config.idle_f_cs(i)).collect();
            plateau[0] = f;
            simulate_cz(&builder, &cz_schedule(config, mode, &plateau), opts).map(|r| r.p_leak[0])
        })
        .collect::<Result<_>>()?;
    let (imin, &pmin) = p_leak
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid nonempty");
    let (minimum_f_cs, minimum_p_leak) = if imin == 0 || imin + 1 == f_cs_grid.len() {
        (f_cs_grid[imin], pmin)
    } else {
        parabola_vertex(
            [f_cs_grid[imin - 1], f_cs_grid[imin], f_cs_grid[imin + 1]],
            [p_leak[imin - 1], p_leak[imin], p_leak[imin + 1]],
        )
    };
    Ok(LeakageSweep {
        f_cs: f_cs_grid.to_vec(),
        p_leak,
        minimum_f_cs,
        minimum_p_leak,
    })
}

fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d2 - d1) / (x[2] - x[0]);
    if !(curv > 0.0) {
        return (x[1], y[1]);
    }
    // Newton form y0 + d1·(x - x0) + curv·(x - x0)·(x - x1).
    let xm = x[1] - (d1 + curv * (x[1] - x[0])) / (2.0 * curv);
    let xm = xm.clamp(x[0], x[2]);
    let ym = y[0] + d1 * (xm - x[0]) + curv * (xm - x[0]) * (xm - x[1]);
    (xm, ym.max(0.0))
}

/// CSV with columns `f_cs_ghz, p_leak`.
pub fn write_sweep_csv<W: Write>(sweep: &LeakageSweep, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["f_cs_ghz", "p_leak"])?;
    for (f, p) in sweep.f_cs.iter().zip(&sweep.p_leak) {
        w.write_record([format!("{f:.6}"), format!("{p:.5e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateDuration {
    /// First return time of |11> in the {|11>, |B>} block.
    pub tau_ns: f64,
    /// `1/sqrt(g_B² + Δ²)`, the closed-form estimate used to bound the search.
    pub tau_formula_ns: f64,
    pub p_return: f64,
    /// `f_B - f11`.
    pub detuning_ghz: f64,
}

/// Gate duration that returns |11> fully at the off-point.
pub fn calibrate_gate_duration(h: &ThreeLevelH) -> Result<GateDuration> {
    let fr = bright_dark_frame(h)?;
    if fr.g_b == 0.0 {
        return Err(Error::Input("bright-state coupling is zero".into()));
    }
    let detuning = fr.f_b - h.f11;
    let tau_formula = 1.0 / (fr.g_b * fr.g_b + detuning * detuning).sqrt();
    let block = nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, fr.g_b, fr.g_b, detuning]);
    let mut psi0 = DVector::zeros(2);
    psi0[0] = Complex64::new(1.0, 0.0);
    let p11 = |t: f64| apply_propagator(&block, t, &psi0)[0].norm_sqr();

    let n = 4000;
    let t_max = 1.25 * tau_formula;
    let dt = t_max / n as f64;
    let mut prev = p11(0.0);
    let mut falling = true;
    let mut k_max = None;
    for k in 1..=n {
        let p = p11(k as f64 * dt);
        if falling && p > prev {
            falling = false;
        } else if !falling && p < prev {
            k_max = Some(k - 1);
            break;
        }
        prev = p;
    }
    let k = k_max.ok_or_else(|| Error::Fit("no return of |11> within the search window".into()))?;
    let (tau, _) = crate::hamiltonian::spectrum::golden_section_min(
        |t| -p11(t),
        (k as f64 - 1.0) * dt,
        (k as f64 + 1.0) * dt,
        1e-12,
    );
    Ok(GateDuration {
        tau_ns: tau,
        tau_formula_ns: tau_formula,
        p_return: p11(tau),
        detuning_ghz: detuning,
    })
}
