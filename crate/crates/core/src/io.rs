//! JSON run reports and CSV writers for trajectories and diagnostics.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::peakon::{Diagnostics, Trajectory};
use crate::phase::CotangentState;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const RNG_NAME: &str = "ChaCha8Rng";

/// A named, unit-annotated number, optionally checked against an upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub unit: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub name: String,
    pub seed: u64,
    pub rng: String,
    pub passed: bool,
    pub parameters: serde_json::Value,
    pub measurements: Vec<Measurement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn new(name: &str, seed: u64, parameters: serde_json::Value) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            name: name.to_string(),
            seed,
            rng: RNG_NAME.to_string(),
            passed: true,
            parameters,
            measurements: Vec::new(),
            warnings: Vec::new(),
            files: Vec::new(),
            error: None,
        }
    }

    pub fn measure(&mut self, name: &str, value: f64, unit: &str) {
        self.measurements.push(Measurement { name: name.into(), value, unit: unit.into(), tolerance: None, passed: None });
    }

    /// Record `value` and require `value < tolerance` (NaN fails).
    pub fn check(&mut self, name: &str, value: f64, unit: &str, tolerance: f64) -> bool {
        let ok = value < tolerance;
        self.passed &= ok;
        self.measurements.push(Measurement { name: name.into(), value, unit: unit.into(), tolerance: Some(tolerance), passed: Some(ok) });
        ok
    }

    /// Record a boolean condition.
    pub fn require(&mut self, name: &str, ok: bool) {
        self.passed &= ok;
        self.measurements.push(Measurement { name: name.into(), value: if ok { 1.0 } else { 0.0 }, unit: "bool".into(), tolerance: None, passed: Some(ok) });
    }

    /// Record a condition that is reported but not asserted.
    pub fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    /// Under `strict`, warnings count as failures.
    pub fn finish(&mut self, strict: bool) {
        if strict && !self.warnings.is_empty() {
            self.passed = false;
        }
    }

    pub fn fail(&mut self, message: String) {
        self.passed = false;
        self.error = Some(message);
    }

    pub fn failures(&self) -> Vec<&Measurement> {
        self.measurements.iter().filter(|m| m.passed == Some(false)).collect()
    }

    /// Writes `<dir>/<name>.json` (spaces become underscores).
    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.name.replace(' ', "_")));
        fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

/// Generic CSV with a header row.
pub fn write_rows_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()
}

fn state_header(z: &CotangentState) -> Vec<String> {
    let mut h = vec!["t".to_string(), "node".to_string()];
    h.extend((0..z.d()).map(|j| format!("q{j}")));
    h.extend((0..z.d()).map(|j| format!("p{j}")));
    h.extend((0..z.m()).map(|a| format!("sigma{a}")));
    let gdim = z.gamma.first().map(|g| g.coordinates().len()).unwrap_or(0);
    h.extend((0..gdim).map(|a| format!("gamma{a}")));
    h
}

fn state_rows(z: &CotangentState, t: f64) -> Vec<Vec<f64>> {
    (0..z.n())
        .map(|i| {
            let mut r = vec![t, i as f64];
            r.extend(z.q.row(i).iter());
            r.extend(z.p.row(i).iter());
            r.extend_from_slice(z.sigma[i].coords(z.m()));
            r.extend(z.gamma[i].coordinates());
            r
        })
        .collect()
}

/// One row per node per snapshot: `t, node, q.., p.., sigma.., gamma..`
/// (gamma as an angle or a row-major rotation matrix).
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> io::Result<()> {
    let Some(first) = traj.states.first() else {
        return write_rows_csv(path, &["t", "node"], &[]);
    };
    let header = state_header(first);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = traj.states.iter().zip(&traj.diagnostics).flat_map(|(z, d)| state_rows(z, d.t)).collect();
    write_rows_csv(path, &header, &rows)
}

pub fn write_state_csv(path: &Path, z: &CotangentState) -> io::Result<()> {
    let header = state_header(z);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows_csv(path, &header, &state_rows(z, 0.0))
}

pub fn write_diagnostics_csv(path: &Path, diags: &[Diagnostics]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for d in diags {
        w.serialize(d)?;
    }
    w.flush()
}
