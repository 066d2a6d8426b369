//! Experiment configuration files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};
use crate::model::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    PmleCert,
    LaplaceCert,
    MarginalCert,
    EioDemo,
    GaussSuite,
    SobolevRate,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::PmleCert,
        Command::LaplaceCert,
        Command::MarginalCert,
        Command::EioDemo,
        Command::GaussSuite,
        Command::SobolevRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::PmleCert => "pmle-cert",
            Command::LaplaceCert => "laplace-cert",
            Command::MarginalCert => "marginal-cert",
            Command::EioDemo => "eio-demo",
            Command::GaussSuite => "gauss-suite",
            Command::SobolevRate => "sobolev-rate",
        }
    }

    fn needs_model(self) -> bool {
        !matches!(self, Command::GaussSuite | Command::SobolevRate)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const DEFAULT_X: f64 = 3.0;

fn default_x() -> f64 {
    DEFAULT_X
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_x")]
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Command-specific settings, see `docs/config.md`.
    #[serde(default)]
    pub params: serde_json::Value,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| HarnessError::Config {
            path: display_path(&e.path().to_string()),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg = Self::from_json_str(&s)?;
        // Relative model paths resolve against the config file.
        if let (Some(m), Some(dir)) = (cfg.model.as_mut(), path.parent()) {
            m.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(config_err("seeds", "at least one seed is required"));
        }
        if !(self.x >= 0.0 && self.x.is_finite()) {
            return Err(config_err("x", "must be finite and nonnegative"));
        }
        if self.command.needs_model() && self.model.is_none() {
            return Err(config_err("model", &format!("{} needs a model", self.command)));
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(config_err(&format!("tolerances.{k}"), "must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    /// Tolerance `name`, or `default` when the config does not set it.
    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    /// Deserialize `params` into the command's parameter struct.
    pub fn params<T: DeserializeOwned + Default>(&self) -> Result<T> {
        if self.params.is_null() {
            return Ok(T::default());
        }
        serde_path_to_error::deserialize(&self.params).map_err(|e| {
            let inner = e.path().to_string();
            HarnessError::Config {
                path: if inner == "." { String::from("params") } else { format!("params.{inner}") },
                message: e.inner().to_string(),
            }
        })
    }
}

fn display_path(p: &str) -> String {
    if p == "." {
        String::from("<root>")
    } else {
        p.to_string()
    }
}

pub(crate) fn config_err(path: &str, message: &str) -> HarnessError {
    HarnessError::Config {
        path: path.to_string(),
        message: message.to_string(),
    }
}
