// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Device parameters, topology, and flux-crosstalk compensation.
//!
//! A device is described by a JSON document:
//!
//! ```json
//! {
//!   "modes": [{"label": "QL", "f_idle_ghz": 4.26, "anharmonicity_ghz": -0.233, "t1_us": 24.1}],
//!   "edges": [{"a": "QL", "b": "CG", "rho": 0.0223}, {"a": "QL", "b": "QS", "g_fixed_ghz": 0.000387}],
//!   "roles": {"ql": "QL", "qh": "QH", "qs": "QS", "cg": "CG", "cs": "CS"},
//!   "topology": "LHS",
//!   "cz": {"f_l_ghz": 4.276, "f_cg_ghz": 4.6469}
//! }
//! ```
//!
//! `qs`/`cs` may also be arrays for multi-spectator devices; entry `i` of `cs`
//! is the coupler of spectator `i`.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_LHS: &str = include_str!("../data/device_lhs.json");
const BUNDLED_FIVE_QUBIT: &str = include_str!("../data/device_five_qubit.json");

/// Rejection threshold on the crosstalk-matrix condition number.
pub const MAX_CROSSTALK_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    pub label: String,
    pub f_idle_ghz: f64,
    pub anharmonicity_ghz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    /// Relaxation time when tuned near the gate resonance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_resonant_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_echo_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_f0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_f1: Option<f64>,
    /// Stored for completeness; no model uses it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_resonator_ghz: Option<f64>,
    /// Stored for completeness; no model uses it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_qubit_error: Option<f64>,
}

impl ModeParams {
    fn validate(&self) -> Result<()> {
        let field = |name: &str| format!("modes[{}].{}", self.label, name);
        if !(self.f_idle_ghz > 0.0 && self.f_idle_ghz.is_finite()) {
            return Err(Error::invariant(field("f_idle_ghz"), "must be positive"));
        }
        if !(self.anharmonicity_ghz < 0.0) {
            return Err(Error::invariant(
                field("anharmonicity_ghz"),
                format!("must be negative, got {}", self.anharmonicity_ghz),
            ));
        }
        for (name, v) in [
            ("t1_us", self.t1_us),
            ("t1_resonant_us", self.t1_resonant_us),
            ("t2_echo_us", self.t2_echo_us),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::invariant(field(name), "must be positive"));
                }
            }
        }
        for (name, v) in [("readout_f0", self.readout_f0), ("readout_f1", self.readout_f1)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invariant(field(name), "must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyEdge {
    pub a: String,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_fixed_ghz: Option<f64>,
}

impl TopologyEdge {
    pub fn connects(&self, x: &str, y: &str) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }
}

/// Coupling of an edge at the given mode frequencies.
///
/// Returns `g_fixed` when present, otherwise `rho·sqrt(f_a·f_b)`.
pub fn coupling_strength(edge: &TopologyEdge, f_a: f64, f_b: f64) -> f64 {
    match (edge.g_fixed_ghz, edge.rho) {
        (Some(g), _) => g,
        (None, Some(rho)) => rho * (f_a * f_b).sqrt(),
        (None, None) => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    /// Spectator coupler attached to the high-frequency gate qubit.
    #[serde(rename = "LHS")]
    Lhs,
    /// Spectator coupler attached to the low-frequency gate qubit.
    #[serde(rename = "HLS")]
    Hls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawRoles {
    #[serde(default)]
    ql: Option<String>,
    #[serde(default)]
    qh: Option<String>,
    #[serde(default)]
    qs: Option<OneOrMany>,
    #[serde(default)]
    cg: Option<String>,
    #[serde(default)]
    cs: Option<OneOrMany>,
}

/// Operating point of the CZ gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzPoint {
    /// Frequency of the low qubit during the gate; the high qubit sits at
    /// `f_l - alpha_h` so that |11> and |02> are degenerate.
    pub f_l_ghz: f64,
    /// Gate-coupler frequency during the gate (idle frequency when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_cg_ghz: Option<f64>,
    #[serde(default = "default_t_cz")]
    pub t_cz_ns: f64,
    #[serde(default = "default_t_1q")]
    pub t_1q_ns: f64,
}

fn default_t_cz() -> f64 {
    40.0
}

fn default_t_1q() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawConfig {
    modes: Vec<ModeParams>,
    edges: Vec<TopologyEdge>,
    roles: RawRoles,
    topology: Topology,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cz: Option<CzPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoleMap {
    pub ql: String,
    pub qh: String,
    pub qs: Vec<String>,
    pub cg: String,
    pub cs: Vec<String>,
}

/// Validated device description. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceConfig {
    pub modes: Vec<ModeParams>,
    pub edges: Vec<TopologyEdge>,
    pub topology: Topology,
    pub roles: RoleMap,
    pub cz: Option<CzPoint>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<DeviceConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    DeviceConfig::from_json_str(&text)
}

impl DeviceConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_raw(raw)
    }

    /// Single-spectator l-h-s device with the reference parameter set.
    pub fn bundled() -> Self {
        Self::from_json_str(BUNDLED_LHS).expect("bundled config is valid")
    }

    /// Three-spectator variant of the bundled device.
    pub fn bundled_five_qubit() -> Self {
        Self::from_json_str(BUNDLED_FIVE_QUBIT).expect("bundled config is valid")
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let mut labels = BTreeSet::new();
        for m in &raw.modes {
            m.validate()?;
            if !labels.insert(m.label.clone()) {
                return Err(Error::invariant(
                    format!("modes[{}].label", m.label),
                    "duplicate label",
                ));
            }
        }
        for (i, e) in raw.edges.iter().enumerate() {
            let field = format!("edges[{i}]");
            if e.rho.is_some() == e.g_fixed_ghz.is_some() {
                return Err(Error::invariant(field, "exactly one of rho / g_fixed_ghz is required"));
            }
            if e.a == e.b {
                return Err(Error::invariant(field, "edge endpoints must be distinct"));
            }
            for end in [&e.a, &e.b] {
                if !labels.contains(end) {
                    return Err(Error::invariant(field, format!("unknown mode label '{end}'")));
                }
            }
        }

        let r = raw.roles;
        let ql = r.ql.ok_or_else(|| Error::MissingRole("Q_l".into()))?;
        let qh = r.qh.ok_or_else(|| Error::MissingRole("Q_h".into()))?;
        let qs = r.qs.ok_or_else(|| Error::MissingRole("Q_s".into()))?.into_vec();
        let cg = r.cg.ok_or_else(|| Error::MissingRole("C_g".into()))?;
        let cs = r.cs.ok_or_else(|| Error::MissingRole("C_s".into()))?.into_vec();
        if qs.is_empty() {
            return Err(Error::MissingRole("Q_s".into()));
        }
        if cs.is_empty() {
            return Err(Error::MissingRole("C_s".into()));
        }
        if qs.len() != cs.len() {
            return Err(Error::invariant(
                "roles",
                format!("{} spectators but {} spectator couplers", qs.len(), cs.len()),
            ));
        }
        let roles = RoleMap { ql, qh, qs, cg, cs };
        for (role, label) in roles.all() {
            if !labels.contains(label) {
                return Err(Error::invariant(
                    format!("roles.{role}"),
                    format!("label '{label}' is not a declared mode"),
                ));
            }
        }
        let mut seen = BTreeSet::new();
        for (role, label) in roles.all() {
            if !seen.insert(label) {
                return Err(Error::invariant(
                    format!("roles.{role}"),
                    format!("label '{label}' assigned to more than one role"),
                ));
            }
        }

        let cfg = DeviceConfig {
            modes: raw.modes,
            edges: raw.edges,
            topology: raw.topology,
            roles,
            cz: raw.cz,
        };
        for (a, b) in cfg.required_edges() {
            if cfg.edge(&a, &b).is_none() {
                return Err(Error::invariant(
                    "edges",
                    format!("{:?} topology requires an edge {a}-{b}", cfg.topology),
                ));
            }
        }
        if let Some(cz) = &cfg.cz {
            if !(cz.f_l_ghz > 0.0) {
                return Err(Error::invariant("cz.f_l_ghz", "must be positive"));
            }
            if let Some(f) = cz.f_cg_ghz {
                if !(f > 0.0) {
                    return Err(Error::invariant("cz.f_cg_ghz", "must be positive"));
                }
            }
            if !(cz.t_cz_ns >= 0.0 && cz.t_1q_ns >= 0.0) {
                return Err(Error::invariant("cz", "gate durations must be nonnegative"));
            }
        }
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        let one_or_many = |v: &Vec<String>| {
            if v.len() == 1 {
                OneOrMany::One(v[0].clone())
            } else {
                OneOrMany::Many(v.clone())
            }
        };
        let raw = RawConfig {
            modes: self.modes.clone(),
            edges: self.edges.clone(),
            roles: RawRoles {
                ql: Some(self.roles.ql.clone()),
                qh: Some(self.roles.qh.clone()),
                qs: Some(one_or_many(&self.roles.qs)),
                cg: Some(self.roles.cg.clone()),
                cs: Some(one_or_many(&self.roles.cs)),
            },
            topology: self.topology,
            cz: self.cz.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("config serializes")
    }

    /// Edges the declared topology cannot do without.
    fn required_edges(&self) -> Vec<(String, String)> {
        let r = &self.roles;
        let mut req = vec![(r.ql.clone(), r.cg.clone()), (r.qh.clone(), r.cg.clone())];
        let anchor = match self.topology {
            Topology::Lhs => &r.qh,
            Topology::Hls => &r.ql,
        };
        for (qs, cs) in r.qs.iter().zip(&r.cs) {
            req.push((anchor.clone(), cs.clone()));
            req.push((qs.clone(), cs.clone()));
        }
        req
    }

    pub fn mode(&self, label: &str) -> Option<&ModeParams> {
        self.modes.iter().find(|m| m.label == label)
    }

    /// Mode for a label known to exist (role labels are checked at load time).
    pub fn role_mode(&self, label: &str) -> &ModeParams {
        self.mode(label).expect("role labels are validated at load time")
    }

    pub fn edge(&self, x: &str, y: &str) -> Option<&TopologyEdge> {
        self.edges.iter().find(|e| e.connects(x, y))
    }

    /// Coupling between two modes at the given frequencies; zero without an edge.
    pub fn coupling(&self, x: &str, y: &str, f_x: f64, f_y: f64) -> f64 {
        self.edge(x, y).map_or(0.0, |e| coupling_strength(e, f_x, f_y))
    }

    pub fn n_spectators(&self) -> usize {
        self.roles.qs.len()
    }

    /// CZ operating point, defaulting to the idle frequencies when absent.
    pub fn cz_point(&self) -> CzPoint {
        self.cz.clone().unwrap_or_else(|| CzPoint {
            f_l_ghz: self.role_mode(&self.roles.ql).f_idle_ghz,
            f_cg_ghz: None,
            t_cz_ns: default_t_cz(),
            t_1q_ns: default_t_1q(),
        })
    }

    /// High-qubit frequency that makes |11> and |02> degenerate at the CZ point.
    pub fn cz_f_h(&self) -> f64 {
        self.cz_point().f_l_ghz - self.role_mode(&self.roles.qh).anharmonicity_ghz
    }

    pub fn cz_f_cg(&self) -> f64 {
        self.cz_point()
            .f_cg_ghz
            .unwrap_or_else(|| self.role_mode(&self.roles.cg).f_idle_ghz)
    }

    /// Idle frequency of spectator coupler `i`.
    pub fn idle_f_cs(&self, i: usize) -> f64 {
        self.role_mode(&self.roles.cs[i]).f_idle_ghz
    }
}

impl RoleMap {
    fn all(&self) -> Vec<(String, &String)> {
        let mut out = vec![
            ("ql".to_string(), &self.ql),
            ("qh".to_string(), &self.qh),
            ("cg".to_string(), &self.cg),
        ];
        for (i, q) in self.qs.iter().enumerate() {
            out.push((format!("qs[{i}]"), q));
        }
        for (i, c) in self.cs.iter().enumerate() {
            out.push((format!("cs[{i}]"), c));
        }
        out
    }
}

/// Linear flux-crosstalk matrix: entry `(i, j)` is the response of line `i` to a
/// unit amplitude on line `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosstalkMatrix {
    pub labels: Vec<String>,
    pub m: DMatrix<f64>,
    pub condition: f64,
}

impl CrosstalkMatrix {
    pub fn new(labels: Vec<String>, m: DMatrix<f64>) -> Result<Self> {
        let n = labels.len();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: m.nrows().max(m.ncols()),
            });
        }
        for i in 0..n {
            if m[(i, i)] != 1.0 {
                return Err(Error::invariant(
                    format!("crosstalk[{},{}]", labels[i], labels[i]),
                    "diagonal entries must equal 1",
                ));
            }
        }
        let condition = condition_number(&m);
        if !(condition <= MAX_CROSSTALK_CONDITION) {
            return Err(Error::Singular { condition });
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && !(m[(i, j)].abs() < 0.1) {
                    return Err(Error::invariant(
                        format!("crosstalk[{},{}]", labels[i], labels[j]),
                        "off-diagonal magnitude must be below 0.1",
                    ));
                }
            }
        }
        Ok(CrosstalkMatrix { labels, m, condition })
    }

    /// Parse a CSV whose header row holds the labels and whose body is the
    /// square matrix. Lines starting with `#` are ignored.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let labels: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut data = Vec::new();
        let mut rows = 0;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != labels.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} entries, expected {}",
                    rows + 1,
                    rec.len(),
                    labels.len()
                )));
            }
            for field in rec.iter() {
                data.push(
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("'{field}': {e}")))?,
                );
            }
            rows += 1;
        }
        if rows != labels.len() {
            return Err(Error::Dimension {
                expected: labels.len(),
                got: rows,
            });
        }
        Self::new(labels, DMatrix::from_row_slice(rows, rows, &data))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_str(&text)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Amplitudes to send so that the crosstalk-mixed result equals `z`:
/// returns `z_corr` with `M·z_corr = z`.
pub fn compensate_flux(m: &CrosstalkMatrix, z: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    if z.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: z.len(),
        });
    }
    if !(m.condition <= MAX_CROSSTALK_CONDITION) {
        return Err(Error::Singular {
            condition: m.condition,
        });
    }
    let lu = m.m.clone().lu();
    let rhs = DVector::from_column_slice(z);
    let mut x = lu.solve(&rhs).ok_or(Error::Singular {
        condition: m.condition,
    })?;
    // One step of iterative refinement.
    let r = &rhs - &m.m * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundled_json() -> serde_json::Value {
        serde_json::from_str(BUNDLED_LHS).unwrap()
    }

    #[test]
    fn bundled_config_loads_with_reference_frequencies() {
        let cfg = DeviceConfig::bundled();
        let f = |role: &str| cfg.role_mode(role).f_idle_ghz;
        assert_eq!(f(&cfg.roles.ql), 4.260);
        assert_eq!(f(&cfg.roles.qh), 4.624);
        assert_eq!(f(&cfg.roles.qs[0]), 4.147);
        assert_eq!(cfg.topology, Topology::Lhs);
    }

    #[test]
    fn missing_spectator_coupler_role_is_named() {
        let mut v = bundled_json();
        v["roles"].as_object_mut().unwrap().remove("cs");
        let err = DeviceConfig::from_json_str(&v.to_string()).unwrap_err();
        assert_eq!(err.to_string(), "role C_s unresolved");
    }

    #[test]
    fn positive_anharmonicity_is_rejected() {
        let mut v = bundled_json();
        v["modes"][0]["anharmonicity_ghz"] = serde_json::json!(0.233);
        let err = DeviceConfig::from_json_str(&v.to_string()).unwrap_err();
        assert!(matches!(&err, Error::Invariant { field, .. } if field.ends_with("anharmonicity_ghz")));
    }

    #[test]
    fn edge_needs_exactly_one_coupling_source() {
        let mut v = bundled_json();
        v["edges"][0]["g_fixed_ghz"] = serde_json::json!(0.01);
        let err = DeviceConfig::from_json_str(&v.to_string()).unwrap_err();
        assert!(matches!(&err, Error::Invariant { field, .. } if field == "edges[0]"));
    }

    #[test]
    fn topology_requires_spectator_coupler_edges() {
        let mut v = bundled_json();
        v["topology"] = serde_json::json!("HLS");
        let err = DeviceConfig::from_json_str(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("requires an edge"));
    }

    #[test]
    fn unknown_role_label_is_rejected() {
        let mut v = bundled_json();
        v["roles"]["cg"] = serde_json::json!("NOPE");
        assert!(DeviceConfig::from_json_str(&v.to_string()).is_err());
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            DeviceConfig::from_json_str("{ not json"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn serialization_round_trips() {
        for cfg in [DeviceConfig::bundled(), DeviceConfig::bundled_five_qubit()] {
            let again = DeviceConfig::from_json_str(&cfg.to_json_string()).unwrap();
            assert_eq!(cfg, again);
        }
    }

    #[test]
    fn coupling_strength_cases() {
        let rho = TopologyEdge {
            a: "a".into(),
            b: "b".into(),
            rho: Some(0.0029),
            g_fixed_ghz: None,
        };
        // 0.0029 * sqrt(4.26 * 4.624) = 0.012870983
        assert!((coupling_strength(&rho, 4.26, 4.624) - 0.012_870_983).abs() < 1e-9);
        assert_eq!(coupling_strength(&rho, 4.26, 4.624), coupling_strength(&rho, 4.624, 4.26));

        let fixed = TopologyEdge {
            rho: None,
            g_fixed_ghz: Some(0.0005),
            ..rho.clone()
        };
        assert_eq!(coupling_strength(&fixed, 1.0, 9.0), 0.0005);

        let zero = TopologyEdge {
            rho: Some(0.0),
            ..rho
        };
        assert_eq!(coupling_strength(&zero, 4.0, 5.0), 0.0);
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("Z{i}")).collect()
    }

    #[test]
    fn identity_compensation_is_passthrough() {
        let m = CrosstalkMatrix::new(labels(2), DMatrix::identity(2, 2)).unwrap();
        assert_eq!(compensate_flux(&m, &[0.1, 0.2]).unwrap(), vec![0.1, 0.2]);
    }

    #[test]
    fn upper_triangular_compensation() {
        let m = CrosstalkMatrix::new(labels(2), DMatrix::from_row_slice(2, 2, &[1.0, 0.01, 0.0, 1.0]))
            .unwrap();
        let z = compensate_flux(&m, &[1.0, 1.0]).unwrap();
        assert!((z[0] - 0.99).abs() < 1e-15);
        assert!((z[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duplicated_rows_are_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            CrosstalkMatrix::new(labels(2), m),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn large_off_diagonal_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        assert!(matches!(
            CrosstalkMatrix::new(labels(2), m),
            Err(Error::Invariant { .. })
        ));
    }

    #[test]
    fn wrong_length_target_is_rejected() {
        let m = CrosstalkMatrix::new(labels(3), DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(
            compensate_flux(&m, &[1.0]),
            Err(Error::Dimension { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn crosstalk_csv_parses() {
        let text = "# dimensionless\nQ1,Q2\n1,0.002\n-0.001,1\n";
        let m = CrosstalkMatrix::from_csv_str(text).unwrap();
        assert_eq!(m.labels, vec!["Q1", "Q2"]);
        assert_eq!(m.m[(0, 1)], 0.002);
        assert!(m.condition > 1.0 && m.condition < 1.01);
    }
}
