//! `gauss-suite`: κ sandwich, Gaussian comparison and anti-concentration on random spectra.

use lapcert::gauss_compare::{anti_concentration_band, comparison_bound, eigen_l1_diff, kappa, mc_ball_sup_distance};
use lapcert::linalg::{PsdOperator, Vector};
use lapcert::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{basic_summary, check_positive, finish, per_seed, SeedOutput};
use crate::config::{config_err, ExperimentConfig};
use crate::error::Result;
use crate::report::{Certificate, Quantity, RunOutput, SeedReport, Table};

/// Stream families under the suite seed.
const SPECTRUM_STREAM: u64 = 0;
const COMPARISON_STREAM: u64 = 1 << 20;
const BAND_STREAM: u64 = 2 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussParams {
    pub n_spectra: usize,
    pub n_cases: usize,
    pub dim_min: usize,
    pub dim_max: usize,
    /// Draws per law in each comparison case.
    pub n_samples: usize,
    pub band_eps: Vec<f64>,
    pub band_samples: usize,
    /// Largest accepted ratio of empirical to analytic quantities.
    pub max_ratio: f64,
}

impl Default for GaussParams {
    fn default() -> Self {
        Self {
            n_spectra: 1000,
            n_cases: 50,
            dim_min: 3,
            dim_max: 40,
            n_samples: 40_000,
            band_eps: vec![0.1, 0.5, 1.0, 2.0],
            band_samples: 100_000,
            max_ratio: 5.0,
        }
    }
}

/// Spectrum of length `n`: flat, one spike, or two spikes.
fn random_spectrum(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut r = rng::stream(seed, stream);
    let shape = (3.0 * rng::uniform(&mut r)) as usize;
    (0..n)
        .map(|k| {
            let u = rng::uniform(&mut r);
            match (shape, k) {
                (1, 0) | (2, 0) | (2, 1) => 20.0 + 50.0 * u,
                _ => 0.01 + u,
            }
        })
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params: GaussParams = cfg.params()?;
    if params.dim_min < 2 || params.dim_max < params.dim_min {
        return Err(config_err("params.dim_min", "need 2 ≤ dim_min ≤ dim_max"));
    }
    check_positive(params.max_ratio, "params.max_ratio")?;
    if params.band_eps.is_empty() || params.band_eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(config_err("params.band_eps", "needs positive finite widths"));
    }
    if params.n_samples == 0 || params.band_samples == 0 {
        return Err(config_err("params", "sample counts must be positive"));
    }
    let outs = per_seed(cfg, |seed| run_seed(&params, seed))?;
    let summary = basic_summary(&outs);
    Ok(finish(cfg, outs, summary))
}

fn run_seed(params: &GaussParams, seed: u64) -> Result<SeedOutput> {
    let mut rep = SeedReport::new(seed);
    let mut out_tables = Vec::new();

    // κ sandwich.
    let kap: Vec<_> = (0..params.n_spectra)
        .into_par_iter()
        .map(|k| {
            let n = 2 + k % 30;
            kappa(&random_spectrum(seed, SPECTRUM_STREAM + k as u64, n))
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut t = Table::new(format!("kappa_seed{seed}"), &["case", "dim", "branch", "kappa", "product"]);
    let (mut lo, mut hi, mut bad) = (f64::INFINITY, 0.0_f64, 0usize);
    for (k, s) in kap.iter().enumerate() {
        let v = s.kappa * (s.lambda1 * s.lambda2).sqrt();
        lo = lo.min(v);
        hi = hi.max(v);
        if !(0.9..=1.8).contains(&v) {
            bad += 1;
        }
        t.push(vec![k as f64, s.lambdas.len() as f64, s.branch as u8 as f64, s.kappa, v]);
    }
    out_tables.push(t);
    rep.q("kappa_product_min", lo, "formula:kappa sqrt(Lambda1 Lambda2)");
    rep.q("kappa_product_max", hi, "formula:kappa sqrt(Lambda1 Lambda2)");
    rep.cert(Certificate::upper(
        "kappa_sandwich",
        Quantity::new(bad as f64, "formula:count outside [0.9, 1.8]"),
        Quantity::new(0.0, "formula:zero violations"),
        params.n_spectra > 0,
    ));

    // Comparison of two centered/shifted Gaussians.
    let span = params.dim_max - params.dim_min + 1;
    let cases: Vec<[f64; 5]> = (0..params.n_cases)
        .into_par_iter()
        .map(|c| -> Result<[f64; 5]> {
            let d = params.dim_min + (c * 7) % span;
            let mut r = rng::stream(seed, COMPARISON_STREAM + c as u64);
            let base: Vec<f64> = (0..d).map(|_| 0.2 + 2.0 * rng::uniform(&mut r)).collect();
            let pert: Vec<f64> = base.iter().map(|l| l * (0.7 + 0.6 * rng::uniform(&mut r))).collect();
            let a = Vector::from_fn(d, |_, _| 0.2 * rng::normal(&mut r));
            let sx = PsdOperator::diag(&base)?;
            let sy = PsdOperator::diag(&pert)?;
            let emp = mc_ball_sup_distance(&sx, &sy, &a, params.n_samples, seed ^ ((c as u64) << 32))?;
            let b = comparison_bound(&kappa(&base)?, &kappa(&pert)?, a.norm_squared(), eigen_l1_diff(&base, &pert));
            Ok([d as f64, emp.sup_distance, emp.envelope, b, emp.sup_distance / b])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        format!("comparison_seed{seed}"),
        &["case", "dim", "sup_distance", "envelope", "bound", "ratio"],
    );
    let mut worst = 0.0_f64;
    for (c, row) in cases.iter().enumerate() {
        worst = worst.max(row[4]);
        let mut v = vec![c as f64];
        v.extend(row);
        t.push(v);
    }
    out_tables.push(t);
    rep.q("comparison_ratio_max", worst, "oracle:monte-carlo/formula");
    rep.cert(Certificate::upper(
        "comparison_ratio",
        Quantity::new(worst, "oracle:monte-carlo/formula"),
        Quantity::new(params.max_ratio, "config:max_ratio"),
        params.n_cases > 0,
    ));

    // Anti-concentration of ‖ξ‖² in bands of width ε.
    let bands: Vec<[f64; 5]> = (0..params.n_cases)
        .into_par_iter()
        .map(|c| -> Result<[f64; 5]> {
            let d = params.dim_min + (c * 7) % span;
            let spec = kappa(&random_spectrum(seed, BAND_STREAM + c as u64, d))?;
            let eps = params.band_eps[c % params.band_eps.len()];
            let b = anti_concentration_band(&spec, &Vector::zeros(d), eps, params.band_samples, seed ^ ((c as u64) << 32))?;
            Ok([d as f64, eps, b.band_mass_sup, b.kappa_eps, b.band_mass_sup / b.kappa_eps])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        format!("band_seed{seed}"),
        &["case", "dim", "epsilon", "band_mass", "kappa_eps", "ratio"],
    );
    let mut worst = 0.0_f64;
    for (c, row) in bands.iter().enumerate() {
        worst = worst.max(row[4]);
        let mut v = vec![c as f64];
        v.extend(row);
        t.push(v);
    }
    out_tables.push(t);
    rep.q("band_ratio_max", worst, "oracle:monte-carlo/formula");
    rep.cert(Certificate::upper(
        "band_ratio",
        Quantity::new(worst, "oracle:monte-carlo/formula"),
        Quantity::new(params.max_ratio, "config:max_ratio"),
        params.n_cases > 0,
    ));

    let mut out = SeedOutput::new(rep);
    out.tables = out_tables;
    Ok(out)
}
