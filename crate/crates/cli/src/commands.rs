// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::path::Path;

use leaknull::blockdiag::{off_point_sweep, solve_off_frequency, write_off_point_csv};
use leaknull::device::{compensate_flux, load_config, CrosstalkMatrix, DeviceConfig};
use leaknull::dynamics::cz::{write_sweep_csv, write_trajectory_csv};
use leaknull::dynamics::{
    calibrate_gate_duration, cz_schedule, simulate_cz, sweep_coupler_frequency, DeviceBuilder, GateMode, SimOptions,
    SimResult,
};
use leaknull::hamiltonian::build_three_level;
use leaknull::metrology::synth::{read_series_csv, write_series_csv};
use leaknull::metrology::{
    fit_beta, fit_leakage_population, fit_xeb_fidelity, measurement_floor, seepage_rate_from_config, synth_xeb_data,
    ErrorBudget, NoiseModel, XebTruth,
};
use serde_json::{json, Value};

use crate::output::OutputDir;
use crate::{
    BudgetArgs, Cli, CliError, Command, CrosstalkArgs, FitArgs, FitModel, PulseKind, SimulateArgs, SolveOffArgs,
    SweepArgs, SynthArgs,
};

type Params = BTreeMap<String, Value>;

struct Context {
    config: DeviceConfig,
    config_path: String,
    out: OutputDir,
    seed: u64,
}

impl Context {
    fn finish(mut self, command: &str, params: Params) -> Result<(), CliError> {
        let path = self.out.manifest(command, &self.config_path, params, self.seed)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn params(value: Value) -> Params {
    match value {
        Value::Object(m) => m.into_iter().collect(),
        _ => Params::new(),
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (config, config_path) = match &cli.config {
        Some(p) => (load_config(p)?, p.display().to_string()),
        None => (DeviceConfig::bundled(), "<bundled>".to_string()),
    };
    let ctx = Context {
        config,
        config_path,
        out: OutputDir::create(&cli.out)?,
        seed: cli.seed,
    };
    match &cli.command {
        Command::SolveOff(a) => solve_off(ctx, a),
        Command::Sweep(a) => sweep(ctx, a),
        Command::Simulate(a) => simulate(ctx, a),
        Command::Fit(a) => fit(ctx, a),
        Command::Budget(a) => budget(ctx, a),
        Command::Crosstalk(a) => crosstalk(ctx, a),
        Command::Synth(a) => synth(ctx, a),
    }
}

fn default_bracket(config: &DeviceConfig) -> (f64, f64) {
    let idle = config.idle_f_cs(0);
    (idle - 1.5, idle)
}

fn bracket_arg(config: &DeviceConfig, given: &Option<Vec<f64>>) -> Result<(f64, f64), CliError> {
    match given.as_deref() {
        None => Ok(default_bracket(config)),
        Some([lo, hi]) if lo < hi => Ok((*lo, *hi)),
        Some(_) => Err(CliError::input("--bracket needs lo < hi")),
    }
}

fn triple(v: &[f64], flag: &str) -> Result<[f64; 3], CliError> {
    <[f64; 3]>::try_from(v).map_err(|_| CliError::input(format!("{flag} takes three comma-separated values")))
}

/// Inclusive grid `start, start + step, ..., stop`.
fn stepped_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && stop >= start) {
        return Err(CliError::input("range needs start <= stop and a positive step"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| start + step * k as f64).collect())
}

/// `points` evenly spaced values covering `[lo, hi]`.
fn counted_grid(lo: f64, hi: f64, points: f64, what: &str) -> Result<Vec<f64>, CliError> {
    if !(lo < hi && points >= 2.0 && points.fract() == 0.0) {
        return Err(CliError::input(format!("{what} needs lo < hi and at least 2 points")));
    }
    let n = points as usize;
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

fn solve_off(mut ctx: Context, a: &SolveOffArgs) -> Result<(), CliError> {
    let bracket = bracket_arg(&ctx.config, &a.bracket)?;
    let p = params(json!({ "fs_ghz": a.fs, "fs_range": a.fs_range, "bracket_ghz": [bracket.0, bracket.1] }));
    if let Some(f_s) = a.fs {
        let sol = solve_off_frequency(&ctx.config, f_s, bracket)?;
        ctx.out.json("off_point.json", &json!({ "f_s_ghz": f_s, "solution": sol }))?;
        println!("f_cs_off = {:.6} GHz", sol.f_cs_off);
        return ctx.finish("solve-off", p);
    }
    let r = triple(a.fs_range.as_deref().unwrap_or_default(), "--fs-range")?;
    let grid = stepped_grid(r[0], r[1], r[2])?;
    let rows = off_point_sweep(&ctx.config, &grid, bracket);
    ctx.out.csv(
        "off_points.csv",
        "f_s_ghz GHz, f_cs_off_ghz GHz, residual_ghz GHz",
        |buf| write_off_point_csv(&grid, &rows, buf),
    )?;
    let failed = rows.iter().filter(|r| r.is_err()).count();
    ctx.finish("solve-off", p)?;
    if failed > 0 {
        return Err(CliError::numerical(format!("{failed} of {} points have no off-point", grid.len())));
    }
    Ok(())
}

fn gate_mode(pulse: PulseKind, gate_ns: f64) -> GateMode {
    match pulse {
        PulseKind::Rect => GateMode::Rectangular { duration_ns: gate_ns },
        PulseKind::Flattop => GateMode::FlatTop { total_ns: gate_ns },
    }
}

/// Return time of the |11>-bright block for spectator 0 at `f_cs`.
fn calibrated_gate_ns(config: &DeviceConfig, f_cs: f64, f_s: f64) -> Result<f64, CliError> {
    let h = build_three_level(config, f_cs, f_s, config.cz_point().f_l_ghz)?.h;
    Ok(calibrate_gate_duration(&h)?.tau_ns)
}

fn sweep(mut ctx: Context, a: &SweepArgs) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let r = triple(&a.fcs_range, "--fcs-range")?;
    let grid = counted_grid(r[0], r[1], r[2], "--fcs-range")?;
    let idle = cfg.idle_f_cs(0);
    let gate_ns = match (a.gate_ns, a.pulse) {
        (Some(t), _) => t,
        (None, PulseKind::Flattop) => cfg.cz_point().t_cz_ns,
        (None, PulseKind::Rect) => {
            let f_cs = solve_off_frequency(cfg, a.fs, default_bracket(cfg)).map_or(idle, |s| s.f_cs_off);
            calibrated_gate_ns(cfg, f_cs, a.fs)?
        }
    };
    let mode = gate_mode(a.pulse, gate_ns);
    let opts = SimOptions::default();
    let sweep = sweep_coupler_frequency(cfg, a.fs, &grid, mode, &opts)?;
    let idle_point = sweep_coupler_frequency(cfg, a.fs, &[idle], mode, &opts)?;
    let idle_leak = idle_point.p_leak[0];

    ctx.out.csv("sweep.csv", "f_cs_ghz GHz, p_leak probability, marker label", |buf| {
        let mut body = Vec::new();
        write_sweep_csv(&sweep, &mut body)?;
        let text = String::from_utf8_lossy(&body);
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let mut rows: Vec<(f64, String)> = lines
            .map(|l| (l.split(',').next().unwrap_or("0").parse().unwrap_or(0.0), format!("{l},")))
            .collect();
        rows.push((idle, format!("{idle:.6},{idle_leak:.5e},idle")));
        rows.sort_by(|x, y| x.0.total_cmp(&y.0));
        use std::io::Write;
        writeln!(buf, "{header},marker")?;
        for (_, r) in rows {
            writeln!(buf, "{r}")?;
        }
        Ok::<(), std::io::Error>(())
    })?;
    let summary = json!({
        "f_s_ghz": a.fs,
        "gate_ns": gate_ns,
        "pulse": a.pulse,
        "minimum_f_cs_ghz": sweep.minimum_f_cs,
        "minimum_p_leak": sweep.minimum_p_leak,
        "idle_f_cs_ghz": idle,
        "idle_p_leak": idle_leak,
    });
    ctx.out.json("sweep.json", &summary)?;
    println!("valley minimum at {:.6} GHz", sweep.minimum_f_cs);
    let p = params(json!({ "fs_ghz": a.fs, "fcs_range": a.fcs_range, "pulse": a.pulse, "gate_ns": gate_ns }));
    ctx.finish("sweep", p)
}

fn simulate(mut ctx: Context, a: &SimulateArgs) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let n = cfg.n_spectators();
    let f_s = a
        .fs
        .clone()
        .unwrap_or_else(|| cfg.roles.qs.iter().map(|l| cfg.role_mode(l).f_idle_ghz).collect());
    let f_cs = a.fcs.clone().unwrap_or_else(|| (0..n).map(|i| cfg.idle_f_cs(i)).collect());
    if f_s.len() != n || f_cs.len() != n {
        return Err(CliError::input(format!("--fs and --fcs need {n} values for this device")));
    }
    let gate_ns = match (a.gate_ns, a.pulse) {
        (Some(t), _) => t,
        (None, PulseKind::Flattop) => cfg.cz_point().t_cz_ns,
        (None, PulseKind::Rect) => calibrated_gate_ns(cfg, f_cs[0], f_s[0])?,
    };
    let mut opts = SimOptions::default();
    if a.trajectory {
        opts.trajectory_samples = 201;
    }
    let builder = DeviceBuilder::new(cfg, f_s.clone());
    let schedule = cz_schedule(cfg, gate_mode(a.pulse, gate_ns), &f_cs);
    let result: SimResult = simulate_cz(&builder, &schedule, &opts)?;

    let mut report = json!({ "gate_ns": gate_ns, "pulse": a.pulse, "f_s_ghz": f_s, "f_cs_ghz": f_cs, "result": &result });
    if n > 1 {
        let singles: Vec<f64> = (0..n)
            .map(|i| {
                simulate_cz(&DeviceBuilder::new(cfg, f_s.clone()).only(vec![i]), &schedule, &SimOptions::default())
                    .map(|r| r.total_leakage())
            })
            .collect::<leaknull::Result<_>>()?;
        report["single_spectator_leakage"] = json!(singles);
        report["sum_of_singles"] = json!(singles.iter().sum::<f64>());
    }
    ctx.out.json("simulate.json", &report)?;
    if let Some(traj) = &result.trajectory {
        ctx.out.csv("trajectory.csv", "t_ns ns, p11 p02 pS pD probability", |buf| write_trajectory_csv(traj, buf))?;
    }
    if let Some(r) = &a.scan_gate {
        let r = triple(r, "--scan-gate")?;
        let lengths = counted_grid(r[0], r[1], r[2], "--scan-gate")?;
        let rows: Vec<SimResult> = lengths
            .iter()
            .map(|&t| simulate_cz(&builder, &cz_schedule(cfg, gate_mode(a.pulse, t), &f_cs), &SimOptions::default()))
            .collect::<leaknull::Result<_>>()?;
        ctx.out.csv("gate_scan.csv", "gate_ns ns, p_leak columns probability", |buf| {
            let mut w = csv::Writer::from_writer(buf);
            let mut header = vec!["gate_ns".to_string(), "p_leak_total".to_string()];
            header.extend(cfg.roles.qs.iter().map(|l| format!("p_leak_{l}")));
            w.write_record(&header)?;
            for (t, r) in lengths.iter().zip(&rows) {
                let mut rec = vec![format!("{t:.6}"), format!("{:.5e}", r.total_leakage())];
                rec.extend(r.p_leak.iter().map(|p| format!("{p:.5e}")));
                w.write_record(&rec)?;
            }
            w.flush()?;
            Ok::<(), csv::Error>(())
        })?;
    }
    println!("total leakage {:.5e}", result.total_leakage());
    let p = params(json!({
        "fs_ghz": f_s, "fcs_ghz": f_cs, "pulse": a.pulse, "gate_ns": gate_ns,
        "trajectory": a.trajectory, "scan_gate": a.scan_gate,
    }));
    ctx.finish("simulate", p)
}

fn read_series(path: &Path) -> Result<Vec<(u32, f64)>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let rows = read_series_csv(file)?;
    rows.into_iter()
        .map(|(d, v)| {
            if d >= 0.0 && d.fract() == 0.0 && d <= u32::MAX as f64 {
                Ok((d as u32, v))
            } else {
                Err(CliError::input(format!("depth {d} is not a nonnegative integer")))
            }
        })
        .collect()
}

fn fit(mut ctx: Context, a: &FitArgs) -> Result<(), CliError> {
    let data = read_series(&a.data)?;
    let report = match a.model {
        FitModel::Leak => {
            let f = fit_leakage_population(&data)?;
            println!("L1 = {:.5e} +/- {:.1e}", f.l1, f.l1_sigma);
            json!(f)
        }
        FitModel::Fidelity => {
            let lambda1 = a.lambda1.ok_or_else(|| CliError::input("--lambda1 is required"))?;
            let f = fit_xeb_fidelity(&data, lambda1, a.l1)?;
            if f.collinear {
                eprintln!("warning: decays are collinear, fitted a single exponential");
            }
            println!("average fidelity {:.6}", f.avg_fidelity);
            json!(f)
        }
        FitModel::Beta => {
            let noise = a.shots.map_or(NoiseModel::Noiseless, |shots| NoiseModel::Binomial { shots });
            let f = fit_beta(&data, noise)?;
            println!("L1 = {:.5e} +/- {:.1e}", f.l1, f.l1_sigma);
            json!(f)
        }
    };
    ctx.out.json("fit.json", &json!({ "model": a.model, "fit": report }))?;
    let p = params(json!({
        "model": a.model, "data": a.data.display().to_string(), "lambda1": a.lambda1, "l1": a.l1, "shots": a.shots,
    }));
    ctx.finish("fit", p)
}

fn budget(mut ctx: Context, a: &BudgetArgs) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&a.p_floor) {
        return Err(CliError::input("--p-floor must lie in [0, 1)"));
    }
    let (l2, warning) = seepage_rate_from_config(&ctx.config)?;
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }
    let b = ErrorBudget::new(a.l1, l2, a.p_floor)?;
    let floor = measurement_floor(a.p_floor, l2);
    ctx.out.json(
        "budget.json",
        &json!({ "budget": b, "l1_min_floor_exact": floor.exact, "warnings": warning.into_iter().collect::<Vec<_>>() }),
    )?;
    println!("L2 = {:.5e}, L1_min = {:.5e}", b.l2_seepage, b.l1_min_floor);
    ctx.finish("budget", params(json!({ "p_floor": a.p_floor, "l1": a.l1 })))
}

fn read_targets(path: &Path) -> Result<Vec<(String, f64)>, CliError> {
    let bad = |e: String| CliError::input(format!("{}: {e}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let label = rec.get(0).ok_or_else(|| bad("missing label".into()))?.to_string();
        let value = rec
            .get(1)
            .ok_or_else(|| bad("missing target".into()))?
            .parse::<f64>()
            .map_err(|e| bad(e.to_string()))?;
        out.push((label, value));
    }
    Ok(out)
}

fn crosstalk(mut ctx: Context, a: &CrosstalkArgs) -> Result<(), CliError> {
    let m = CrosstalkMatrix::load_csv(&a.matrix)?;
    let targets = read_targets(&a.targets)?;
    let z: Vec<f64> = m
        .labels
        .iter()
        .map(|l| {
            targets
                .iter()
                .find(|(t, _)| t == l)
                .map(|t| t.1)
                .ok_or_else(|| CliError::input(format!("no target for line {l}")))
        })
        .collect::<Result<_, _>>()?;
    let zc = compensate_flux(&m, &z)?;
    ctx.out.csv("compensated.csv", "flux amplitudes, arbitrary units", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["label", "target", "compensated"])?;
        for ((l, t), c) in m.labels.iter().zip(&z).zip(&zc) {
            w.write_record([l.clone(), format!("{t:.15e}"), format!("{c:.15e}")])?;
        }
        w.flush()?;
        Ok::<(), csv::Error>(())
    })?;
    println!("condition number {:.3e}", m.condition);
    let p = params(json!({
        "matrix": a.matrix.display().to_string(), "targets": a.targets.display().to_string(),
    }));
    ctx.finish("crosstalk", p)
}

fn synth(mut ctx: Context, a: &SynthArgs) -> Result<(), CliError> {
    if a.depth_step == 0 {
        return Err(CliError::input("--depth-step must be positive"));
    }
    let depths: Vec<u32> = (0..=a.max_depth).step_by(a.depth_step as usize).collect();
    let truth = XebTruth::from_rates(a.l1, a.l2, a.p0);
    let (leak, fid) = synth_xeb_data(&truth, &depths, a.shots, ctx.seed)?;
    ctx.out.csv("leak.csv", "depth cycles, value probability, shots count", |buf| write_series_csv(buf, &leak))?;
    ctx.out.csv("fidelity.csv", "depth cycles, value probability, shots count", |buf| write_series_csv(buf, &fid))?;
    ctx.out.json("truth.json", &truth)?;
    let p = params(json!({
        "l1": a.l1, "l2": a.l2, "p0": a.p0, "max_depth": a.max_depth, "depth_step": a.depth_step, "shots": a.shots,
    }));
    ctx.finish("synth", p)
}
