// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

use leaknull::blockdiag::{bright_dark_frame, off_point_sweep, solve_off_frequency};
use leaknull::hamiltonian::build_three_level;
use leaknull::device::DeviceConfig;
use leaknull::dynamics::{cz_schedule, simulate_cz, DeviceBuilder, GateMode, SimOptions};
use leaknull::metrology::synth::synth_su2_series;
use leaknull::metrology::{
    fit_beta, fit_leakage_population, fit_xeb_fidelity, leakage_error_contribution, total_leakage, synth_xeb_data,
    NoiseModel, SU2Params, XebTruth,
};
use rayon::prelude::*;

#[test]
fn off_point_tracks_spectator_frequency() {
    let cfg = DeviceConfig::bundled();
    let grid: Vec<f64> = (0..=60).map(|k| 4.24 + 0.001 * k as f64).collect();
    let roots: Vec<f64> = off_point_sweep(&cfg, &grid, (5.0, 6.4))
        .into_iter()
        .map(|r| r.unwrap().f_cs_off)
        .collect();
    assert!(roots.windows(2).all(|w| w[1] > w[0]));
    // Frozen from the first run of this configuration.
    assert!((roots[30] - 5.564938402).abs() < 1e-6, "{}", roots[30]);
    assert!((roots[60] - 5.666319303).abs() < 1e-6, "{}", roots[60]);
}

#[test]
fn gate_length_scan_oscillates_at_idle_and_stays_bounded_off() {
    let cfg = DeviceConfig::bundled();
    let f_s = 4.27;
    let off = solve_off_frequency(&cfg, f_s, (5.0, 6.4)).unwrap().f_cs_off;
    let builder = DeviceBuilder::new(&cfg, vec![f_s]);
    let leak = |f_cs: f64, t: f64| {
        let sched = cz_schedule(&cfg, GateMode::Rectangular { duration_ns: t }, &[f_cs]);
        simulate_cz(&builder, &sched, &SimOptions::default()).unwrap().total_leakage()
    };
    let lengths: Vec<f64> = (1..=60).map(|k| k as f64).collect();
    let idle: Vec<f64> = lengths.iter().map(|&t| leak(cfg.idle_f_cs(0), t)).collect();
    let at_off: Vec<f64> = lengths.iter().map(|&t| leak(off, t)).collect();
    let peak = idle.iter().copied().fold(0.0, f64::max);
    let rises = idle.windows(2).filter(|w| w[1] > w[0]).count();
    let falls = idle.windows(2).filter(|w| w[1] < w[0]).count();
    assert!(peak > 0.05 && rises > 5 && falls > 5, "idle {idle:?}");
    // Off the revival time the only spectator weight is the bright state's own
    // |S> admixture, bounded by sin²θ.
    let h = build_three_level(&cfg, off, f_s, cfg.cz_point().f_l_ghz).unwrap().h;
    let bound = bright_dark_frame(&h).unwrap().theta.sin().powi(2);
    let off_peak = at_off.iter().copied().fold(0.0, f64::max);
    assert!(off_peak <= bound + 1e-12, "off peak {off_peak} vs sin²θ {bound}");
    assert!(off_peak < 1e-2 * peak);
}

#[test]
fn zero_length_gate_is_identity() {
    let cfg = DeviceConfig::bundled();
    let builder = DeviceBuilder::new(&cfg, vec![4.27]);
    let sched = cz_schedule(&cfg, GateMode::Rectangular { duration_ns: 0.0 }, &[cfg.idle_f_cs(0)]);
    let r = simulate_cz(&builder, &sched, &SimOptions::default()).unwrap();
    assert_eq!(r.total_leakage(), 0.0);
    assert_eq!(r.p_return_11, 1.0);
}

#[test]
fn flat_top_gate_is_unitary_and_reduced_off_point() {
    let cfg = DeviceConfig::bundled();
    let f_s = 4.27;
    let off = solve_off_frequency(&cfg, f_s, (5.0, 6.4)).unwrap().f_cs_off;
    let builder = DeviceBuilder::new(&cfg, vec![f_s]);
    let run = |f_cs: f64| {
        let sched = cz_schedule(&cfg, GateMode::FlatTop { total_ns: 40.0 }, &[f_cs]);
        simulate_cz(&builder, &sched, &SimOptions::default()).unwrap()
    };
    let (idle, at_off) = (run(cfg.idle_f_cs(0)), run(off));
    assert!(idle.norm_drift < 1e-9 && at_off.norm_drift < 1e-9);
    assert!(at_off.total_leakage() < idle.total_leakage());
}

#[test]
fn additivity_report_matches_joint_simulation() {
    let cfg = DeviceConfig::bundled_five_qubit();
    let f_s: Vec<f64> = cfg.roles.qs.iter().map(|l| cfg.role_mode(l).f_idle_ghz).collect();
    let f_cs: Vec<f64> = (0..3).map(|i| cfg.idle_f_cs(i)).collect();
    let sched = cz_schedule(&cfg, GateMode::FlatTop { total_ns: 40.0 }, &f_cs);
    let opts = SimOptions::default();
    let joint = simulate_cz(&DeviceBuilder::new(&cfg, f_s.clone()), &sched, &opts).unwrap();
    let singles: Vec<f64> = (0..3)
        .map(|i| {
            simulate_cz(&DeviceBuilder::new(&cfg, f_s.clone()).only(vec![i]), &sched, &opts)
                .unwrap()
                .total_leakage()
        })
        .collect();
    let total = total_leakage(&singles);
    assert!((joint.total_leakage() / total - 1.0).abs() < 0.1, "{} vs {total}", joint.total_leakage());
}

#[test]
fn beta_fit_is_calibrated_under_shot_noise() {
    let beta = 0.0696;
    let p = SU2Params::new(beta, 0.3, 0.0);
    let l1 = beta.sin().powi(2) / 4.0;
    assert!((l1 / 1.21e-3 - 1.0).abs() < 0.01);
    let lengths: Vec<u32> = (0..=40).collect();
    let covered = (0..100u64)
        .into_par_iter()
        .filter(|&trial| {
            let s = synth_su2_series(&p, &lengths, Some(2000), 99, trial).unwrap();
            let data: Vec<(u32, f64)> = s.iter().map(|q| (q.depth, q.value)).collect();
            let fit = fit_beta(&data, NoiseModel::Binomial { shots: 2000 }).unwrap();
            (fit.l1 - l1).abs() <= 3.0 * fit.l1_sigma
        })
        .count();
    assert!(covered >= 95, "{covered}/100");
}

#[test]
fn shared_decay_fit_chain() {
    let depths: Vec<u32> = (0..=50).map(|k| 10 * k).collect();
    let truth = XebTruth::from_rates(1.21e-3, 4.66e-3, 0.01);
    let (leak, fid) = synth_xeb_data(&truth, &depths, None, 5).unwrap();
    let leak: Vec<(u32, f64)> = leak.iter().map(|q| (q.depth, q.value)).collect();
    let fid: Vec<(u32, f64)> = fid.iter().map(|q| (q.depth, q.value)).collect();
    let lf = fit_leakage_population(&leak).unwrap();
    let ff = fit_xeb_fidelity(&fid, lf.lambda1, lf.l1).unwrap();
    assert!((ff.lambda2 / truth.lambda2 - 1.0).abs() < 0.01);
    let report = serde_json::to_value(&ff).unwrap();
    assert!(report["avg_fidelity"].as_f64().unwrap() > 0.98);
    // Idle-to-off improvement predicted from the change in L1 alone.
    assert!((leakage_error_contribution(1.21e-3 - 4e-5) - 1.4625e-3).abs() < 1e-15);
}
