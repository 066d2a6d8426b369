//! Sample sets on disk: a little-endian `f64` column file plus a JSON sidecar.

use std::path::{Path, PathBuf};

use lapcert::oracle::SampleSet;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};

pub const FORMAT: &str = "f64-le-column-major";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub format: String,
    pub dim: usize,
    pub n_draws: usize,
    pub seed: u64,
    pub acceptance_rate: f64,
    pub ess_per_dim: Vec<f64>,
    pub warnings: Vec<String>,
}

fn paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{name}.bin")), dir.join(format!("{name}.json")))
}

pub fn write_samples(dir: &Path, name: &str, s: &SampleSet) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let dim = s.draws.first().map_or(0, Vec::len);
    let mut bytes = Vec::with_capacity(8 * dim * s.draws.len());
    for k in 0..dim {
        for d in &s.draws {
            bytes.extend_from_slice(&d[k].to_le_bytes());
        }
    }
    let (bin, json) = paths(dir, name);
    std::fs::write(&bin, bytes).map_err(io_err(&bin))?;
    let side = SampleSidecar {
        format: FORMAT.into(),
        dim,
        n_draws: s.draws.len(),
        seed: s.seed,
        acceptance_rate: s.acceptance_rate,
        ess_per_dim: s.ess_per_dim.clone(),
        warnings: s.warnings.clone(),
    };
    std::fs::write(&json, serde_json::to_string_pretty(&side)?).map_err(io_err(&json))?;
    Ok(())
}

pub fn read_samples(dir: &Path, name: &str) -> Result<SampleSet> {
    let (bin, json) = paths(dir, name);
    let side: SampleSidecar = serde_json::from_str(&std::fs::read_to_string(&json).map_err(io_err(&json))?)?;
    if side.format != FORMAT {
        return Err(HarnessError::Model(format!("unknown sample format {:?}", side.format)));
    }
    let bytes = std::fs::read(&bin).map_err(io_err(&bin))?;
    if bytes.len() != 8 * side.dim * side.n_draws {
        return Err(HarnessError::Model(format!("{} has {} bytes, sidecar implies {}", bin.display(), bytes.len(), 8 * side.dim * side.n_draws)));
    }
    let at = |k: usize, i: usize| {
        let o = 8 * (k * side.n_draws + i);
        f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8-byte slice"))
    };
    let draws = (0..side.n_draws).map(|i| (0..side.dim).map(|k| at(k, i)).collect()).collect();
    Ok(SampleSet {
        draws,
        acceptance_rate: side.acceptance_rate,
        ess_per_dim: side.ess_per_dim,
        seed: side.seed,
        warnings: side.warnings,
    })
}
