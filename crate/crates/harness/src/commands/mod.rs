//! One module per command. Each turns a validated config into a [`RunOutput`].

use lapcert::linalg::{Mat, PsdOperator, Vector};
use lapcert::oracle::{self, GridPosterior};
use lapcert::pmle::{fit, FitOptions, PmleResult};
use lapcert::sls::{ProbeConfig, SlsModel};
use lapcert::oracle::SampleSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{Report, RunOutput, SeedReport, Table};

pub mod eio;
pub mod gauss;
pub mod laplace;
pub mod marginal;
pub mod pmle;
pub mod sobolev;

/// Result of one seed.
pub(crate) struct SeedOutput {
    pub report: SeedReport,
    pub tables: Vec<Table>,
    pub samples: Vec<(String, SampleSet)>,
}

impl SeedOutput {
    pub fn new(report: SeedReport) -> Self {
        Self {
            report,
            tables: Vec::new(),
            samples: Vec::new(),
        }
    }
}

/// Run `f` for every seed in parallel; results keep the seed order.
pub(crate) fn per_seed<F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<SeedOutput>>
where
    F: Fn(u64) -> Result<SeedOutput> + Sync,
{
    cfg.seeds.par_iter().map(|&s| f(s)).collect()
}

/// Merge seed outputs and a summary into the run output.
pub(crate) fn finish(cfg: &ExperimentConfig, outs: Vec<SeedOutput>, summary: SeedReport) -> RunOutput {
    let mut runs = Vec::with_capacity(outs.len());
    let mut tables = Vec::new();
    let mut samples = Vec::new();
    for o in outs {
        runs.push(o.report);
        tables.extend(o.tables);
        samples.extend(o.samples);
    }
    RunOutput {
        report: Report::assemble(cfg, runs, summary),
        tables,
        samples,
    }
}

/// Summary with the count of seeds whose gating certificates all hold.
pub(crate) fn basic_summary(outs: &[SeedOutput]) -> SeedReport {
    let mut s = SeedReport::new(0);
    let bad = outs
        .iter()
        .filter(|o| o.report.certificates.iter().any(|c| c.violated()))
        .count();
    s.q("seeds", outs.len() as f64, "count");
    s.q("seeds_with_violations", bad as f64, "count");
    s
}

/// Probe settings in params; the run seed replaces `seed` unless one is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeParams {
    #[serde(default = "default_directions")]
    pub n_directions: usize,
    #[serde(default = "default_shells")]
    pub shells: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_directions() -> usize {
    256
}

fn default_shells() -> usize {
    4
}

impl Default for ProbeParams {
    fn default() -> Self {
        Self {
            n_directions: default_directions(),
            shells: default_shells(),
            seed: None,
        }
    }
}

impl ProbeParams {
    pub fn config(&self, run_seed: u64) -> ProbeConfig {
        ProbeConfig {
            n_directions: self.n_directions,
            shells: self.shells,
            seed: self.seed.unwrap_or(run_seed),
        }
    }
}

pub(crate) fn fit_from_zero(model: &(dyn SlsModel + Sync)) -> Result<PmleResult> {
    let res = fit(model, &Vector::zeros(model.dim()), &FitOptions::default())?;
    if !res.converged {
        return Err(HarnessError::Model(format!(
            "maximizer search did not converge (gradient norm {:e})",
            res.grad_norm
        )));
    }
    Ok(res)
}

/// Cells per axis for a full-dimensional grid.
pub(crate) fn auto_resolution(dim: usize) -> usize {
    match dim {
        1 => 2001,
        2 => 241,
        3 => 61,
        _ => 25,
    }
}

/// Grid over `center + F^{-1/2}z`, `|z_k| ≤ half_width`.
pub(crate) fn whitened_grid(
    model: &(dyn SlsModel + Sync),
    center: &Vector,
    f: &PsdOperator,
    resolution: usize,
    half_width: f64,
) -> Result<GridPosterior> {
    let d = center.len();
    let t = f.inv_sqrt()?.matrix().clone();
    let fmax = model.eval(center);
    let lf = |x: &[f64]| model.eval(&Vector::from_column_slice(x)) - fmax;
    let off: Vec<f64> = center.iter().copied().collect();
    Ok(oracle::grid_posterior_affine(
        &lf,
        &vec![-half_width; d],
        &vec![half_width; d],
        &vec![resolution; d],
        &off,
        &t,
    )?)
}

/// Marginal tables in whitened coordinates, one per axis, with the Gaussian cell mass.
pub(crate) fn grid_marginal_tables(grid: &GridPosterior, prefix: &str) -> Vec<Table> {
    let d = grid.dim();
    let h = grid.spacing();
    let mut idx_mass: Vec<Vec<f64>> = (0..d).map(|k| vec![0.0; grid.resolution[k]]).collect();
    for flat in 0..grid.len() {
        let mut rem = flat;
        for k in (0..d).rev() {
            let i = rem % grid.resolution[k];
            rem /= grid.resolution[k];
            idx_mass[k][i] += grid.cell_mass[flat];
        }
    }
    (0..d)
        .map(|k| {
            let mut t = Table::new(format!("{prefix}_axis{k}"), &["z", "mass", "gaussian_mass"]);
            for (i, m) in idx_mass[k].iter().enumerate() {
                let a = grid.lo[k] + i as f64 * h[k];
                let b = a + h[k];
                let g = lapcert::gauss_compare::normal_cdf(b) - lapcert::gauss_compare::normal_cdf(a);
                t.push(vec![0.5 * (a + b), *m, g]);
            }
            t
        })
        .collect()
}

pub(crate) fn mat_of_rows(rows: &[Vec<f64>], what: &str) -> Result<Mat> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n == 0 || p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(crate::config::config_err(what, "must be a nonempty rectangular array"));
    }
    Ok(Mat::from_fn(n, p, |i, j| rows[i][j]))
}

pub(crate) fn rows_of(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub(crate) fn check_positive(v: f64, path: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(crate::config::config_err(path, "must be positive and finite"))
    }
}
