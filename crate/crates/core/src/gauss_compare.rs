//! Comparison of Gaussian ball probabilities through spectral tails.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, PsdOperator, Vector};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumBranch {
    /// `3λ₁² ≤ Λ₁²`: three or more comparable eigenvalues.
    Many,
    /// One dominant eigenvalue over a heavy remaining tail.
    Spike,
    /// Two dominant eigenvalues.
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumProfile {
    /// Eigenvalues, descending and nonnegative.
    pub lambdas: Vec<f64>,
    /// `√Σ_{j≥1} λ_j²`.
    pub lambda1: f64,
    /// `√Σ_{j≥2} λ_j²`.
    pub lambda2: f64,
    pub kappa: f64,
    pub branch: SpectrumBranch,
}

/// `κ(Σ)` from the covariance eigenvalues.
///
/// Ties `3λ₁² = Λ₁²` go to [`SpectrumBranch::Many`].
pub fn kappa(lambdas: &[f64]) -> Result<SpectrumProfile> {
    let mut l: Vec<f64> = lambdas.to_vec();
    if l.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Validation("eigenvalues must be finite and nonnegative".into()));
    }
    l.sort_by(|a, b| b.total_cmp(a));
    let positive = l.iter().filter(|v| **v > 0.0).count();
    if positive < 2 {
        return Err(Error::DegenerateSpectrum { positive });
    }
    let ss1: f64 = l.iter().map(|v| v * v).sum();
    let ss2 = ss1 - l[0] * l[0];
    let lambda1 = libm::sqrt(ss1);
    let lambda2 = libm::sqrt(ss2.max(0.0));
    let (kappa, branch) = if 3.0 * l[0] * l[0] <= ss1 {
        (1.0 / lambda1, SpectrumBranch::Many)
    } else if 3.0 * l[1] * l[1] <= ss2 {
        (1.0 / libm::sqrt(l[0] * lambda2), SpectrumBranch::Spike)
    } else {
        (1.0 / libm::sqrt(l[0] * l[1]), SpectrumBranch::Two)
    };
    Ok(SpectrumProfile {
        lambdas: l,
        lambda1,
        lambda2,
        kappa,
        branch,
    })
}

pub fn spectrum_of(sigma: &PsdOperator) -> Result<SpectrumProfile> {
    kappa(&sigma.eigenvalues().iter().map(|v| v.max(0.0)).collect::<Vec<_>>())
}

/// `‖λ_ξ − λ_η‖₁` of descending spectra, the shorter padded with zeros.
pub fn eigen_l1_diff(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| libm::fabs(a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)))
        .sum()
}

/// `‖Σ_ξ − Σ_η‖₁`, an upper bound for [`eigen_l1_diff`].
pub fn nuclear_diff(sigma_xi: &PsdOperator, sigma_eta: &PsdOperator) -> f64 {
    linalg::sym_norms(&(sigma_xi.matrix() - sigma_eta.matrix())).nuclear
}

/// `(κ_ξ + κ_η)(‖λ_ξ−λ_η‖₁ + ‖a‖²)`, before the absolute constant.
pub fn comparison_bound(xi: &SpectrumProfile, eta: &SpectrumProfile, a_norm_sq: f64, lambda_l1_diff: f64) -> f64 {
    (xi.kappa + eta.kappa) * (lambda_l1_diff + a_norm_sq)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSupDistance {
    pub sup_distance: f64,
    /// Sum of the DKW envelopes of both samples.
    pub envelope: f64,
    pub n_samples: usize,
}

const ETA_STREAM_BASE: u64 = 1 << 32;

/// Empirical `sup_x |P(‖ξ−a‖ ≤ x) − P(‖η‖ ≤ x)|` from `n_samples` draws of each law.
pub fn mc_ball_sup_distance(
    sigma_xi: &PsdOperator,
    sigma_eta: &PsdOperator,
    a: &Vector,
    n_samples: usize,
    seed: u64,
) -> Result<BallSupDistance> {
    let d = sigma_xi.dim();
    if sigma_eta.dim() != d || a.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if a.len() != d { a.len() } else { sigma_eta.dim() },
        });
    }
    let zero = Vector::zeros(d);
    let rx: Vec<f64> = oracle::sample_gaussian_stream(&zero, sigma_xi, n_samples, seed, 0)?
        .iter()
        .map(|x| (x - a).norm())
        .collect();
    let ry: Vec<f64> = oracle::sample_gaussian_stream(&zero, sigma_eta, n_samples, seed, ETA_STREAM_BASE)?
        .iter()
        .map(|x| x.norm())
        .collect();
    let grid = oracle::pooled_radius_grid(&rx, None, &ry, None);
    let fx = oracle::ecdf_on_grid(&rx, None, &grid);
    let fy = oracle::ecdf_on_grid(&ry, None, &grid);
    let sup = fx.iter().zip(&fy).map(|(p, q)| libm::fabs(p - q)).fold(0.0, f64::max);
    Ok(BallSupDistance {
        sup_distance: sup,
        envelope: 2.0 * oracle::dkw_envelope(n_samples),
        n_samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntiConcentration {
    pub band_mass_sup: f64,
    /// `κ·ε`.
    pub kappa_eps: f64,
    /// Left end `x` of the heaviest band.
    pub argmax: f64,
}

/// Empirical `sup_x P(x < ‖ξ−a‖² < x+ε)` for `ξ ~ N(0, Σ)` given by its spectrum.
///
/// Draws are taken in the eigenbasis, so `a` is expressed in that basis.
pub fn anti_concentration_band(
    spectrum: &SpectrumProfile,
    a: &Vector,
    epsilon: f64,
    n_samples: usize,
    seed: u64,
) -> Result<AntiConcentration> {
    if !(epsilon >= 0.0) {
        return Err(Error::Validation("epsilon must be nonnegative".into()));
    }
    let d = spectrum.lambdas.len();
    if a.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: a.len(),
        });
    }
    let kappa_eps = spectrum.kappa * epsilon;
    if epsilon == 0.0 || n_samples == 0 {
        return Ok(AntiConcentration {
            band_mass_sup: 0.0,
            kappa_eps,
            argmax: 0.0,
        });
    }
    let sigma = PsdOperator::diag(&spectrum.lambdas)?;
    let zero = Vector::zeros(d);
    let mut sq: Vec<f64> = oracle::sample_gaussian_stream(&zero, &sigma, n_samples, seed, 0)?
        .iter()
        .map(|x| (x - a).norm_squared())
        .collect();
    sq.sort_by(f64::total_cmp);
    // Heaviest window [s_i, s_i + ε): open on the left by starting just below s_i.
    let mut best = 0usize;
    let mut arg = sq[0];
    let mut j = 0usize;
    for i in 0..sq.len() {
        if j < i {
            j = i;
        }
        while j < sq.len() && sq[j] < sq[i] + epsilon {
            j += 1;
        }
        if j - i > best {
            best = j - i;
            arg = sq[i];
        }
    }
    Ok(AntiConcentration {
        band_mass_sup: best as f64 / n_samples as f64,
        kappa_eps,
        argmax: arg,
    })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

pub const BALL_MC_SAMPLES: usize = 100_000;

/// `P(‖Q(shift + γ)‖ ≤ r)` for each `r`, `γ ~ N(0, Σ)`.
///
/// Exact via the error function when `QΣQᵀ` has rank one, otherwise by
/// Monte Carlo with `n_mc` draws from `seed`.
pub fn ball_cdf(
    q: &Mat,
    shift: &Vector,
    sigma: &PsdOperator,
    radii: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if q.ncols() != shift.len() || sigma.dim() != shift.len() {
        return Err(Error::DimensionMismatch {
            expected: shift.len(),
            found: q.ncols(),
        });
    }
    let m = q * shift;
    let cov = PsdOperator::from_sym(&linalg::symmetrize(&(q * sigma.matrix() * q.transpose())))?;
    let (vals, vecs) = cov.spectral();
    let top = vals.first().copied().unwrap_or(0.0);
    let rank = vals.iter().filter(|v| **v > 1e-12 * top.max(f64::MIN_POSITIVE)).count();
    if rank <= 1 {
        let s = libm::sqrt(top.max(0.0));
        let v = vecs.column(0).into_owned();
        let mv = v.dot(&m);
        let perp_sq = (m.norm_squared() - mv * mv).max(0.0);
        return Ok(radii
            .iter()
            .map(|r| {
                let room = r * r - perp_sq;
                if room < 0.0 {
                    return 0.0;
                }
                let h = libm::sqrt(room);
                if s == 0.0 {
                    return if libm::fabs(mv) <= h { 1.0 } else { 0.0 };
                }
                normal_cdf((h - mv) / s) - normal_cdf((-h - mv) / s)
            })
            .collect());
    }
    let norms = oracle::gaussian_norms(&Mat::identity(m.len(), m.len()), &m, &cov, n_mc, seed)?;
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|a, b| radii[*a].total_cmp(&radii[*b]));
    let sorted: Vec<f64> = order.iter().map(|i| radii[*i]).collect();
    let cdf = oracle::ecdf_on_grid(&norms, None, &sorted);
    let mut out = alloc::vec![0.0; radii.len()];
    for (k, i) in order.iter().enumerate() {
        out[*i] = cdf[k];
    }
    Ok(out)
}
