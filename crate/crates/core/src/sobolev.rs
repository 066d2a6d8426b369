//! Penalty calibration: effective dimension against penalty scale, the
//! bias-variance balance, Sobolev penalties and rate experiments in the
//! Gaussian sequence model.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, PsdOperator};
use crate::rng;

pub const BRACKET_LO: f64 = 1e-8;
pub const BRACKET_HI: f64 = 1e12;
pub const MAX_BISECTIONS: usize = 200;

/// `tr{D²(D² + wG₀²)⁻¹}`.
pub fn effective_dim_of_scale(d2: &PsdOperator, g02: &PsdOperator, w: f64) -> Result<f64> {
    if d2.dim() != g02.dim() {
        return Err(Error::DimensionMismatch {
            expected: d2.dim(),
            found: g02.dim(),
        });
    }
    let sum = d2.matrix() + g02.matrix() * w;
    let x = linalg::spd_solve_mat(&sum, d2.matrix()).ok_or(Error::Singular {
        eigenvalue: linalg::min_eigenvalue(&sum),
    })?;
    Ok(linalg::trace(&x))
}

/// Family `w ↦ p(w)` for `G² = wG₀²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyFamily {
    pub d2: PsdOperator,
    pub base: PsdOperator,
}

impl PenaltyFamily {
    pub fn effective(&self, w: f64) -> Result<f64> {
        if w == 0.0 {
            return Ok(self.d2.dim() as f64);
        }
        effective_dim_of_scale(&self.d2, &self.base, w)
    }

    pub fn penalty(&self, w: f64) -> Result<PsdOperator> {
        self.base.scale(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tradeoff {
    pub w_star: f64,
    pub p_at_w: f64,
    /// `C₀√w − √p(w) − √(2x)` at the solution.
    pub residual: f64,
    pub iterations: usize,
}

/// Unique `w` with `√p(w) + √(2x) = C₀√w`, by bisection in `log w`.
pub fn solve_tradeoff(d2: &PsdOperator, g02: &PsdOperator, x: f64, c0: f64) -> Result<Tradeoff> {
    if g02.min_eigenvalue() <= 0.0 {
        return Err(Error::Validation("G0² must be positive definite".into()));
    }
    if !(c0 > 0.0 && x >= 0.0) {
        return Err(Error::Validation("C0 must be positive and x nonnegative".into()));
    }
    let sx = libm::sqrt(2.0 * x);
    let gap = |w: f64| -> Result<f64> {
        Ok(c0 * libm::sqrt(w) - libm::sqrt(effective_dim_of_scale(d2, g02, w)?) - sx)
    };
    let (mut lo, mut hi) = (libm::log(BRACKET_LO), libm::log(BRACKET_HI));
    let (glo, ghi) = (gap(BRACKET_LO)?, gap(BRACKET_HI)?);
    if glo > 0.0 || ghi < 0.0 {
        return Err(Error::Bracketing { lo: BRACKET_LO, hi: BRACKET_HI });
    }
    let mut it = 0;
    while it < MAX_BISECTIONS {
        it += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(libm::exp(mid))? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick whichever end has the smaller residual.
    let (wl, wh) = (libm::exp(lo), libm::exp(hi));
    let (rl, rh) = (gap(wl)?, gap(wh)?);
    let (w, r) = if libm::fabs(rl) <= libm::fabs(rh) { (wl, rl) } else { (wh, rh) };
    Ok(Tradeoff {
        w_star: w,
        p_at_w: effective_dim_of_scale(d2, g02, w)?,
        residual: r,
        iterations: it,
    })
}

/// `m₀ = (C₀n)^{1/(2s₀+1)}`, the rate-optimal scale and cutoff index.
pub fn rate_optimal_scale(s0: f64, c0: f64, n: f64) -> f64 {
    libm::pow(c0 * n, 1.0 / (2.0 * s0 + 1.0))
}

/// `g_j² = w·C₀⁻¹·j^{2s₀}` for `j = 1..=p`.
pub fn sobolev_penalty(s0: f64, c0: f64, w: f64, p: usize) -> Vec<f64> {
    (1..=p).map(|j| w / c0 * libm::pow(j as f64, 2.0 * s0)).collect()
}

/// `g_j² = w⁻¹·j^{2s}`, the smoothness-mismatched penalty.
pub fn mismatch_penalty(s: f64, w: f64, p: usize) -> Vec<f64> {
    (1..=p).map(|j| libm::pow(j as f64, 2.0 * s) / w).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchScale {
    /// `n⁻¹(C₀n)^{2s/(2s₀+1)}`.
    pub w: f64,
    /// `m₀ = (C₀n)^{1/(2s₀+1)}`.
    pub cutoff: f64,
    /// `(wn)^{1/(2s)}`.
    pub induced_cutoff: f64,
}

pub fn mismatch_scale(s: f64, s0: f64, c0: f64, n: f64) -> Result<MismatchScale> {
    if s < s0 {
        return Err(Error::Precondition(alloc::format!(
            "penalty smoothness s = {s} below true smoothness s0 = {s0}"
        )));
    }
    if s <= 0.5 {
        return Err(Error::Precondition("penalty smoothness must exceed 1/2".into()));
    }
    let m0 = rate_optimal_scale(s0, c0, n);
    let w = libm::pow(c0 * n, 2.0 * s / (2.0 * s0 + 1.0)) / n;
    Ok(MismatchScale {
        w,
        cutoff: m0,
        induced_cutoff: libm::pow(w * n, 1.0 / (2.0 * s)),
    })
}

/// `υ*_j ∝ j^{-s₀-1/2-0.01}` scaled to `Σ j^{2s₀} υ_j² = C₀`.
pub fn ball_boundary_signal(s0: f64, c0: f64, p: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=p).map(|j| libm::pow(j as f64, -s0 - 0.51)).collect();
    let norm: f64 = raw
        .iter()
        .enumerate()
        .map(|(i, v)| libm::pow((i + 1) as f64, 2.0 * s0) * v * v)
        .sum();
    let k = libm::sqrt(c0 / norm);
    raw.iter().map(|v| v * k).collect()
}

/// Closed-form pMLE `ũ_j = n·y_j/(n + g_j²)` of the sequence model with `D² = nI`.
pub fn sequence_pmle(y: &[f64], g2: &[f64], n: f64) -> Vec<f64> {
    y.iter().zip(g2).map(|(y, g)| n * y / (n + g)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltyChoice {
    /// `g_j² = m₀C₀⁻¹j^{2s₀}`.
    Aware,
    /// `g_j² = w⁻¹j^{2s}` with `w` from [`mismatch_scale`].
    Mismatch { s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub s0: f64,
    pub n_list: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub c0: f64,
    pub penalty: PenaltyChoice,
    /// Truncation dimension; defaults to the largest `n`.
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: f64,
    pub mean_mse: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub target_slope: f64,
    pub per_n: Vec<RatePoint>,
}

/// Mean squared error of one replicate: stream `(seed, idx·reps + rep)`.
pub fn rate_replicate(cfg: &RateConfig, n_index: usize, rep: usize, signal: &[f64], g2: &[f64]) -> f64 {
    let n = cfg.n_list[n_index];
    let mut r = rng::stream(cfg.seed, (n_index * cfg.reps + rep) as u64);
    let sd = 1.0 / libm::sqrt(n);
    let mut mse = 0.0;
    for (u, g) in signal.iter().zip(g2) {
        let y = u + sd * rng::normal(&mut r);
        let est = n * y / (n + g);
        mse += (est - u) * (est - u);
    }
    mse
}

/// Penalty eigenvalues used at sample size `n`.
pub fn rate_penalty(cfg: &RateConfig, n: f64, p: usize) -> Result<Vec<f64>> {
    Ok(match cfg.penalty {
        PenaltyChoice::Aware => sobolev_penalty(cfg.s0, cfg.c0, rate_optimal_scale(cfg.s0, cfg.c0, n), p),
        PenaltyChoice::Mismatch { s } => mismatch_penalty(s, mismatch_scale(s, cfg.s0, cfg.c0, n)?.w, p),
    })
}

/// Slope of `log mean‖ũ − υ*‖²` against `log n`.
pub fn rate_experiment(cfg: &RateConfig) -> Result<RateResult> {
    rate_experiment_with(cfg, &|n_index, reps, f| (0..reps).map(|r| f(n_index, r)).collect())
}

/// [`rate_experiment`] with a caller-supplied replicate map, e.g. a parallel one.
pub fn rate_experiment_with(
    cfg: &RateConfig,
    map: &dyn Fn(usize, usize, &(dyn Fn(usize, usize) -> f64 + Sync)) -> Vec<f64>,
) -> Result<RateResult> {
    if cfg.n_list.len() < 4 {
        return Err(Error::Validation("need at least 4 sample sizes".into()));
    }
    if cfg.reps < 2 {
        return Err(Error::Validation("need at least 2 replicates".into()));
    }
    if cfg.n_list.iter().any(|n| !(*n > 0.0)) {
        return Err(Error::Validation("sample sizes must be positive".into()));
    }
    let p = cfg
        .dim
        .unwrap_or_else(|| cfg.n_list.iter().copied().fold(0.0, f64::max) as usize)
        .max(1);
    let signal = ball_boundary_signal(cfg.s0, cfg.c0, p);
    let mut per_n = Vec::with_capacity(cfg.n_list.len());
    for (idx, n) in cfg.n_list.iter().enumerate() {
        let g2 = rate_penalty(cfg, *n, p)?;
        let run = |i: usize, r: usize| rate_replicate(cfg, i, r, &signal, &g2);
        let mses = map(idx, cfg.reps, &run);
        let m = mses.iter().sum::<f64>() / mses.len() as f64;
        let var = mses.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (mses.len() - 1) as f64;
        per_n.push(RatePoint {
            n: *n,
            mean_mse: m,
            se: libm::sqrt(var / mses.len() as f64),
        });
    }
    let xs: Vec<f64> = per_n.iter().map(|p| libm::log(p.n)).collect();
    let ys: Vec<f64> = per_n.iter().map(|p| libm::log(p.mean_mse)).collect();
    let (slope, intercept, slope_se) = ols(&xs, &ys);
    Ok(RateResult {
        slope,
        slope_se,
        intercept,
        target_slope: -2.0 * cfg.s0 / (2.0 * cfg.s0 + 1.0),
        per_n,
    })
}

/// Least squares line: `(slope, intercept, se(slope))`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - intercept - slope * a;
            e * e
        })
        .sum();
    let se = if x.len() > 2 {
        libm::sqrt(ssr / (m - 2.0) / sxx)
    } else {
        0.0
    };
    (slope, intercept, se)
}
