//! Field-wise comparison of two run directories.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{io_err, HarnessError, Result};
use crate::report::{Manifest, MANIFEST_FILE, REPORT_FILE};

/// Relative difference below which numbers count as rounding noise.
pub const ROUNDING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffClass {
    /// `|a − b| ≤ 1e-9·max(|a|, |b|)` but not bit-identical.
    Rounding,
    Numeric,
    /// Strings, booleans or structure differ.
    NonNumeric,
    /// Present on one side only.
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDiff {
    /// JSON pointer into `report.json`.
    pub path: String,
    pub class: DiffClass,
    pub a: Option<Value>,
    pub b: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub version_a: String,
    pub version_b: String,
    pub version_mismatch: bool,
    pub seeds_match: bool,
    pub config_match: bool,
    pub diffs: Vec<FieldDiff>,
}

impl CompareReport {
    /// No field differs at all.
    pub fn identical(&self) -> bool {
        self.diffs.is_empty()
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Err(HarnessError::ManifestMismatch(format!("{} has no {MANIFEST_FILE}", dir.display())));
    }
    Ok(serde_json::from_value(read_json(&path)?)?)
}

fn flatten(v: &Value, prefix: String, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(x, format!("{prefix}/{}", k.replace('~', "~0").replace('/', "~1")), out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(x, format!("{prefix}/{i}"), out);
            }
        }
        _ => {
            out.insert(prefix, v.clone());
        }
    }
}

fn classify(a: &Value, b: &Value) -> Option<(DiffClass, Option<f64>)> {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => {
            if x.to_bits() == y.to_bits() {
                return None;
            }
            let scale = x.abs().max(y.abs());
            let rel = if scale > 0.0 { (x - y).abs() / scale } else { 0.0 };
            let class = if rel <= ROUNDING_TOL { DiffClass::Rounding } else { DiffClass::Numeric };
            Some((class, Some(rel)))
        }
        _ if a == b => None,
        _ => Some((DiffClass::NonNumeric, None)),
    }
}

/// Compare `report.json` of two runs of the same command.
pub fn compare_runs(dir_a: &Path, dir_b: &Path) -> Result<CompareReport> {
    let ma = read_manifest(dir_a)?;
    let mb = read_manifest(dir_b)?;
    if ma.command != mb.command {
        return Err(HarnessError::ManifestMismatch(format!(
            "commands differ: {} vs {}",
            ma.command, mb.command
        )));
    }
    let mut fa = BTreeMap::new();
    let mut fb = BTreeMap::new();
    flatten(&read_json(&dir_a.join(REPORT_FILE))?, String::new(), &mut fa);
    flatten(&read_json(&dir_b.join(REPORT_FILE))?, String::new(), &mut fb);
    let mut diffs = Vec::new();
    for (path, a) in &fa {
        match fb.get(path) {
            Some(b) => {
                if let Some((class, rel)) = classify(a, b) {
                    diffs.push(FieldDiff {
                        path: path.clone(),
                        class,
                        a: Some(a.clone()),
                        b: Some(b.clone()),
                        rel,
                    });
                }
            }
            None => diffs.push(FieldDiff {
                path: path.clone(),
                class: DiffClass::Missing,
                a: Some(a.clone()),
                b: None,
                rel: None,
            }),
        }
    }
    for (path, b) in &fb {
        if !fa.contains_key(path) {
            diffs.push(FieldDiff {
                path: path.clone(),
                class: DiffClass::Missing,
                a: None,
                b: Some(b.clone()),
                rel: None,
            });
        }
    }
    diffs.sort_by(|x, y| x.path.cmp(&y.path));
    Ok(CompareReport {
        version_mismatch: ma.version != mb.version,
        version_a: ma.version,
        version_b: mb.version,
        seeds_match: ma.seeds == mb.seeds,
        config_match: ma.config == mb.config,
        diffs,
    })
}
