//! Configuration, orchestration and reports for the `lapcert` command-line tool.
//!
//! A run reads an [`ExperimentConfig`], executes one command over every seed
//! and writes `report.json`, `tables/*.csv`, optional `samples/*` and
//! `manifest.json` into the output directory.

pub mod commands;
pub mod compare;
pub mod config;
pub mod error;
pub mod ingest;
pub mod model;
pub mod report;
pub mod samples;

use std::path::{Path, PathBuf};

pub use compare::{compare_runs, CompareReport};
pub use config::{Command, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use report::{Report, RunOutput};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "LAPCERT_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Size the global thread pool from [`THREADS_ENV`]; later calls are no-ops.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config {
            path: THREADS_ENV.into(),
            message: format!("expected a thread count, found {v:?}"),
        })?;
    // Fails only when the pool was already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Execute the command named in `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.command {
        Command::PmleCert => commands::pmle::run(cfg),
        Command::LaplaceCert => commands::laplace::run(cfg),
        Command::MarginalCert => commands::marginal::run(cfg),
        Command::EioDemo => commands::eio::run(cfg),
        Command::GaussSuite => commands::gauss::run(cfg),
        Command::SobolevRate => commands::sobolev::run(cfg),
    }
}

/// Output directory: explicit argument, then the config, then `runs/<command>`.
pub fn output_dir(cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(cfg.command.name()))
}

/// Run and write all artifacts; returns the report.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<Report> {
    let out = run(cfg)?;
    report::write_outputs(dir, cfg, &out)?;
    Ok(out.report)
}

pub fn exit_code(result: &Result<Report>) -> i32 {
    match result {
        Ok(r) if r.holds => EXIT_OK,
        Ok(_) => EXIT_VIOLATION,
        Err(_) => EXIT_ERROR,
    }
}
