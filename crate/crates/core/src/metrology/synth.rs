// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Ground-truth generators for the fitters.
//!
//! Sampling is binomial per point from a ChaCha stream. A root seed fixes the
//! whole series; Monte-Carlo trials use separate streams of the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::su2::{SU2Params, su2_sequence_population};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub depth: u32,
    pub value: f64,
    /// `None` for an exact (infinite-shot) value.
    pub shots: Option<u64>,
}

/// Ground truth for a leakage-and-fidelity benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XebTruth {
    pub l1: f64,
    pub l2: f64,
    pub p0: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub lambda2: f64,
}

impl XebTruth {
    /// Leakage-only truth with a generic well-separated fidelity decay.
    pub fn from_rates(l1: f64, l2: f64, p0: f64) -> Self {
        XebTruth {
            l1,
            l2,
            p0,
            a: 0.05,
            b: 0.9,
            c: 0.05,
            lambda2: 0.98,
        }
    }

    pub fn lambda1(&self) -> f64 {
        1.0 - (self.l1 + self.l2)
    }

    pub fn p_inf(&self) -> f64 {
        let s = self.l1 + self.l2;
        if s > 0.0 { self.l1 / s } else { 0.0 }
    }

    pub fn leak_population(&self, m: u32) -> f64 {
        // Written so that m = 0 returns p0 exactly.
        let lam = self.lambda1().powi(m as i32);
        self.p0 * lam + self.p_inf() * (1.0 - lam)
    }

    pub fn fidelity(&self, m: u32) -> f64 {
        self.a * self.lambda1().powi(m as i32) + self.b * self.lambda2.powi(m as i32) + self.c
    }

    fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(unit(self.l1) && unit(self.l2) && unit(self.p0) && self.l1 + self.l2 <= 1.0) {
            return Err(Error::Input("rates and p0 must lie in [0, 1]".into()));
        }
        if !(self.lambda2 > 0.0 && self.lambda2 <= 1.0) {
            return Err(Error::Input("lambda2 must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draw a binomial estimate of `p`, or return `p` itself for infinite shots.
pub fn sample_probability(p: f64, shots: Option<u64>, rng: &mut ChaCha8Rng) -> Result<f64> {
    let Some(n) = shots else { return Ok(p) };
    if n == 0 {
        return Err(Error::Input("shots must be at least 1".into()));
    }
    let p = p.clamp(0.0, 1.0);
    let k = Binomial::new(n, p)
        .map_err(|e| Error::Input(e.to_string()))?
        .sample(rng);
    Ok(k as f64 / n as f64)
}

fn sample_series(
    depths: &[u32],
    shots: Option<u64>,
    rng: &mut ChaCha8Rng,
    model: impl Fn(u32) -> f64,
) -> Result<Vec<SeriesPoint>> {
    depths
        .iter()
        .map(|&depth| {
            Ok(SeriesPoint {
                depth,
                value: sample_probability(model(depth), shots, rng)?,
                shots,
            })
        })
        .collect()
}

/// Leakage-population and fidelity series at each depth.
pub fn synth_xeb_data(
    truth: &XebTruth,
    depths: &[u32],
    shots: Option<u64>,
    seed: u64,
) -> Result<(Vec<SeriesPoint>, Vec<SeriesPoint>)> {
    truth.validate()?;
    let mut rng = rng_for(seed, 0);
    let leak = sample_series(depths, shots, &mut rng, |m| truth.leak_population(m))?;
    let fid = sample_series(depths, shots, &mut rng, |m| truth.fidelity(m))?;
    Ok((leak, fid))
}

/// |S> population after each sequence length.
pub fn synth_su2_series(
    p: &SU2Params,
    lengths: &[u32],
    shots: Option<u64>,
    seed: u64,
    stream: u64,
) -> Result<Vec<SeriesPoint>> {
    let mut rng = rng_for(seed, stream);
    sample_series(lengths, shots, &mut rng, |n| su2_sequence_population(p, n))
}

pub fn write_series_csv<W: std::io::Write>(w: W, series: &[SeriesPoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    out.write_record(["depth", "value", "shots"]).map_err(io)?;
    for p in series {
        let shots = p.shots.map_or_else(|| "inf".to_string(), |n| n.to_string());
        out.write_record([p.depth.to_string(), format!("{:.17e}", p.value), shots])
            .map_err(io)?;
    }
    out.flush().map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_series_csv<R: std::io::Read>(r: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::Parse(format!("row has fewer than {} columns", k + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(e.to_string()))
        };
        out.push((field(0)?, field(1)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn depths() -> Vec<u32> {
        (0..=50).map(|k| 10 * k).collect()
    }

    #[test]
    fn infinite_shots_are_exact() {
        let t = XebTruth::from_rates(1.21e-3, 4.66e-3, 0.01);
        let (leak, fid) = synth_xeb_data(&t, &depths(), None, 7).unwrap();
        for (l, f) in leak.iter().zip(&fid) {
            assert_eq!(l.value, t.leak_population(l.depth));
            assert_eq!(f.value, t.fidelity(f.depth));
        }
        assert_eq!(leak[0].value, 0.01);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let t = XebTruth::from_rates(1.21e-3, 4.66e-3, 0.01);
        let a = synth_xeb_data(&t, &depths(), Some(2000), 42).unwrap();
        let b = synth_xeb_data(&t, &depths(), Some(2000), 42).unwrap();
        let c = synth_xeb_data(&t, &depths(), Some(2000), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pure_seepage_decays_monotonically() {
        let t = XebTruth::from_rates(0.0, 4.66e-3, 0.05);
        assert_eq!(t.p_inf(), 0.0);
        let d = depths();
        for w in d.windows(2) {
            assert!(t.leak_population(w[1]) < t.leak_population(w[0]));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = XebTruth::from_rates(1.5, 0.0, 0.0);
        assert!(synth_xeb_data(&t, &depths(), None, 0).is_err());
        let t = XebTruth::from_rates(0.01, 0.01, 0.0);
        assert!(synth_xeb_data(&t, &depths(), Some(0), 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = XebTruth::from_rates(1.21e-3, 4.66e-3, 0.01);
        let (leak, _) = synth_xeb_data(&t, &depths(), Some(500), 1).unwrap();
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &leak).unwrap();
        let back = read_series_csv(buf.as_slice()).unwrap();
        for (p, (d, v)) in leak.iter().zip(back) {
            assert_eq!(p.depth as f64, d);
            assert_eq!(p.value, v);
        }
    }
}
