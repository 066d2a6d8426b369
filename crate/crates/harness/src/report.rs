//! Report, tables and manifest written by every run.

use std::collections::BTreeMap;
use std::path::Path;

use lapcert::oracle::SampleSet;
use serde::{Deserialize, Serialize};

use crate::config::{Command, ExperimentConfig};
use crate::error::{io_err, Result};
use crate::samples;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A number with the formula or oracle that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub source: String,
}

impl Quantity {
    pub fn new(value: f64, source: &str) -> Self {
        Self {
            value,
            source: source.to_string(),
        }
    }
}

/// `lower ≤ observed ≤ bound`, checked only when `applicable`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub id: String,
    pub observed: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Quantity>,
    pub bound: Quantity,
    pub applicable: bool,
    pub holds: bool,
    /// Non-gating certificates are reported but do not affect the exit status.
    pub gating: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn upper(id: &str, observed: Quantity, bound: Quantity, applicable: bool) -> Self {
        let ok = observed.value <= bound.value;
        Self {
            id: id.to_string(),
            holds: !applicable || ok,
            observed,
            lower: None,
            bound,
            applicable,
            gating: true,
            notes: Vec::new(),
        }
    }

    pub fn interval(id: &str, lower: Quantity, observed: Quantity, bound: Quantity, applicable: bool) -> Self {
        let ok = lower.value <= observed.value && observed.value <= bound.value;
        Self {
            id: id.to_string(),
            holds: !applicable || ok,
            observed,
            lower: Some(lower),
            bound,
            applicable,
            gating: true,
            notes: Vec::new(),
        }
    }

    pub fn non_gating(mut self) -> Self {
        self.gating = false;
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn violated(&self) -> bool {
        self.gating && !self.holds
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub quantities: BTreeMap<String, Quantity>,
    pub certificates: Vec<Certificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SeedReport {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn q(&mut self, name: &str, value: f64, source: &str) {
        self.quantities.insert(name.to_string(), Quantity::new(value, source));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.quantities.get(name).map(|q| q.value)
    }

    pub fn cert(&mut self, c: Certificate) {
        self.certificates.push(c);
    }

    pub fn certificate(&self, id: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Command,
    pub version: String,
    pub model_kind: Option<String>,
    pub x: f64,
    pub seeds: Vec<u64>,
    /// All gating certificates hold.
    pub holds: bool,
    pub runs: Vec<SeedReport>,
    /// Aggregates across seeds.
    pub summary: SeedReport,
}

impl Report {
    pub fn assemble(cfg: &ExperimentConfig, runs: Vec<SeedReport>, summary: SeedReport) -> Self {
        let holds = runs
            .iter()
            .chain(std::iter::once(&summary))
            .all(|r| r.certificates.iter().all(|c| !c.violated()));
        Self {
            command: cfg.command,
            version: VERSION.to_string(),
            model_kind: cfg.model.as_ref().map(|m| m.kind().to_string()),
            x: cfg.x,
            seeds: cfg.seeds.clone(),
            holds,
            runs,
            summary,
        }
    }

    pub fn violations(&self) -> Vec<(Option<u64>, &Certificate)> {
        let mut v = Vec::new();
        for r in &self.runs {
            v.extend(r.certificates.iter().filter(|c| c.violated()).map(|c| (Some(r.seed), c)));
        }
        v.extend(self.summary.certificates.iter().filter(|c| c.violated()).map(|c| (None, c)));
        v
    }
}

/// A plot-ready CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub struct RunOutput {
    pub report: Report,
    pub tables: Vec<Table>,
    pub samples: Vec<(String, SampleSet)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seeds: Vec<u64>,
    pub config: ExperimentConfig,
    pub files: Vec<String>,
    pub threads: usize,
}

pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Write `report.json`, `tables/*.csv`, `samples/*` and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = vec![REPORT_FILE.to_string()];
    let rp = dir.join(REPORT_FILE);
    std::fs::write(&rp, serde_json::to_string_pretty(&out.report)? + "\n").map_err(io_err(&rp))?;
    if !out.tables.is_empty() {
        let td = dir.join("tables");
        std::fs::create_dir_all(&td).map_err(io_err(&td))?;
        for t in &out.tables {
            let path = td.join(format!("{}.csv", t.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&t.header)?;
            for row in &t.rows {
                w.write_record(row.iter().map(|v| format!("{v:e}")))?;
            }
            w.flush().map_err(io_err(&path))?;
            files.push(format!("tables/{}.csv", t.name));
        }
    }
    if !out.samples.is_empty() {
        let sd = dir.join("samples");
        for (name, s) in &out.samples {
            samples::write_samples(&sd, name, s)?;
            files.push(format!("samples/{name}.bin"));
            files.push(format!("samples/{name}.json"));
        }
    }
    let manifest = Manifest {
        tool: "lapcert".into(),
        version: VERSION.into(),
        command: cfg.command,
        seeds: cfg.seeds.clone(),
        config: cfg.clone(),
        files,
        threads: rayon::current_num_threads(),
    };
    let mp = dir.join(MANIFEST_FILE);
    std::fs::write(&mp, serde_json::to_string_pretty(&manifest)? + "\n").map_err(io_err(&mp))?;
    Ok(())
}
