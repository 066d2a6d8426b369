//! `sobolev-rate`: convergence rate of the penalized estimator in the sequence model.

use lapcert::sobolev::{rate_experiment_with, PenaltyChoice, RateConfig, RateResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{basic_summary, check_positive, finish, per_seed, SeedOutput};
use crate::config::{config_err, ExperimentConfig};
use crate::error::Result;
use crate::report::{Certificate, Quantity, RunOutput, SeedReport, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SobolevParams {
    pub s0: f64,
    pub n_list: Vec<f64>,
    pub reps: usize,
    pub c0: f64,
    /// Truncation dimension; the largest `n` when absent.
    pub dim: Option<usize>,
    /// Smoothness of an oversmoothing penalty run next to the aware one.
    pub mismatch_s: Option<f64>,
}

impl Default for SobolevParams {
    fn default() -> Self {
        Self {
            s0: 1.0,
            n_list: (7..=13).map(|k| 2f64.powi(k)).collect(),
            reps: 200,
            c0: 1.0,
            dim: None,
            mismatch_s: Some(2.0),
        }
    }
}

fn parallel_reps(idx: usize, reps: usize, f: &(dyn Fn(usize, usize) -> f64 + Sync)) -> Vec<f64> {
    (0..reps).into_par_iter().map(|r| f(idx, r)).collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params: SobolevParams = cfg.params()?;
    check_positive(params.s0, "params.s0")?;
    check_positive(params.c0, "params.c0")?;
    if let Some(s) = params.mismatch_s {
        if !(s >= params.s0 && s.is_finite()) {
            return Err(config_err("params.mismatch_s", "must be at least s0"));
        }
    }
    let outs = per_seed(cfg, |seed| {
        let mut rep = SeedReport::new(seed);
        let mut tables = Vec::new();
        let base = RateConfig {
            s0: params.s0,
            n_list: params.n_list.clone(),
            reps: params.reps,
            seed,
            c0: params.c0,
            penalty: PenaltyChoice::Aware,
            dim: params.dim,
        };
        let aware = rate_experiment_with(&base, &parallel_reps)?;
        record(cfg, &mut rep, &mut tables, "aware", &aware, seed);
        if let Some(s) = params.mismatch_s {
            let mis = rate_experiment_with(
                &RateConfig {
                    penalty: PenaltyChoice::Mismatch { s },
                    ..base.clone()
                },
                &parallel_reps,
            )?;
            record(cfg, &mut rep, &mut tables, "mismatch", &mis, seed);
        }
        let mut out = SeedOutput::new(rep);
        out.tables = tables;
        Ok(out)
    })?;
    let summary = basic_summary(&outs);
    Ok(finish(cfg, outs, summary))
}

fn record(cfg: &ExperimentConfig, rep: &mut SeedReport, tables: &mut Vec<Table>, tag: &str, r: &RateResult, seed: u64) {
    rep.q(&format!("{tag}_slope"), r.slope, "oracle:least-squares log-log fit");
    rep.q(&format!("{tag}_slope_se"), r.slope_se, "oracle:least-squares log-log fit");
    rep.q(&format!("{tag}_intercept"), r.intercept, "oracle:least-squares log-log fit");
    rep.q(&format!("{tag}_target_slope"), r.target_slope, "formula:-2s0/(2s0+1)");
    rep.cert(Certificate::upper(
        &format!("{tag}_slope"),
        Quantity::new((r.slope - r.target_slope).abs(), "formula:|slope - target|"),
        Quantity::new(cfg.tol("slope", 0.15), "tolerance:slope"),
        true,
    ));
    let mut t = Table::new(format!("rate_seed{seed}_{tag}"), &["n", "mean_mse", "se"]);
    for p in &r.per_n {
        t.push(vec![p.n, p.mean_mse, p.se]);
    }
    tables.push(t);
}
