//! Full-dimensional Laplace approximation and its error certificates.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, PsdOperator, Vector};
use crate::oracle::GridPosterior;
use crate::sls::{estimate_omega, estimate_self_concordance, estimate_tau_vicinity, ProbeConfig, SlsModel};

pub const DEFAULT_X: f64 = 3.0;
pub const DEFAULT_NU: f64 = 2.0 / 3.0;
/// Calibration constant for the `≲` comparisons.
pub const DEFAULT_CALIBRATION: f64 = 2.0;

/// `0.75·ω·dimA/(1−ω)`.
pub fn diamond2(omega: f64, dim_a: f64) -> f64 {
    if omega >= 1.0 {
        return f64::INFINITY;
    }
    0.75 * omega * dim_a / (1.0 - omega)
}

/// `τ₃(dimA+α)^{3/2} / (4(1−ω_τ)^{3/2})`.
pub fn diamond3(tau3: f64, dim_a: f64, alpha: f64, omega_tau: f64) -> f64 {
    if omega_tau >= 1.0 {
        return f64::INFINITY;
    }
    tau3 * libm::pow(dim_a + alpha, 1.5) / (4.0 * libm::pow(1.0 - omega_tau, 1.5))
}

/// `(τ₃²(dimA+2α)³ + 2τ₄(dimA+α)²) / (16(1−ω_τ)²)`.
pub fn diamond4(tau3: f64, tau4: f64, dim_a: f64, alpha: f64, omega_tau: f64) -> f64 {
    if omega_tau >= 1.0 {
        return f64::INFINITY;
    }
    let a = dim_a + 2.0 * alpha;
    let b = dim_a + alpha;
    (tau3 * tau3 * a * a * a + 2.0 * tau4 * b * b) / (16.0 * (1.0 - omega_tau) * (1.0 - omega_tau))
}

/// `2√dimA + √(2x)`.
pub fn laplace_radius(dim_a: f64, x: f64) -> f64 {
    2.0 * libm::sqrt(dim_a) + libm::sqrt(2.0 * x)
}

/// Which certificate families have their preconditions met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaplaceConditions {
    /// `ω ≤ 1/3` (concentration).
    pub omega_ok: bool,
    /// `ω·dimA ≤ 2/3` (the `◊₂` bound).
    pub prod_ok: bool,
    /// `τ₃ν⁻¹r ≤ 3/4` (concentration under the third-order condition).
    pub tau_ok: bool,
    /// `τ₃ν⁻¹r·dimA ≤ 2` (the `◊₃`, `◊₄` bounds).
    pub taylor_ok: bool,
}

impl LaplaceConditions {
    pub fn diamond2_applies(&self) -> bool {
        self.omega_ok && self.prod_ok
    }

    pub fn diamond3_applies(&self) -> bool {
        self.tau_ok && self.taylor_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceReport {
    pub center: Vec<f64>,
    /// `F = −∇²f(x*)`.
    pub f: PsdOperator,
    /// `D² = F − G²`.
    pub d2: PsdOperator,
    pub g2: PsdOperator,
    /// `tr(D² F⁻¹)`.
    pub dim_a: f64,
    /// `‖D F⁻¹ D‖`.
    pub alpha: f64,
    pub x: f64,
    pub r: f64,
    pub nu: f64,
    /// Sampled `ω` over the vicinity `‖Du‖ ≤ ν⁻¹r`.
    pub omega: f64,
    /// `τ₃ν⁻¹r/3`.
    pub omega_tau: f64,
    pub tau3: f64,
    pub tau4: f64,
    pub diamond2: f64,
    pub diamond3: f64,
    pub diamond4: f64,
    pub conditions: LaplaceConditions,
    pub n_directions: usize,
    pub seed: u64,
}

impl LaplaceReport {
    /// Assemble a report from precomputed ingredients.
    pub fn from_parts(
        center: &Vector,
        f: PsdOperator,
        g2: PsdOperator,
        x: f64,
        nu: f64,
        omega: f64,
        tau3: f64,
        tau4: f64,
    ) -> Result<Self> {
        let d2 = PsdOperator::from_sym(&(f.matrix() - g2.matrix()))?;
        let f_inv = f.inverse()?;
        let dim_a = linalg::trace(&(d2.matrix() * f_inv.matrix()));
        let f_inv_half = f.inv_sqrt()?;
        let alpha = d2.congruence(f_inv_half.matrix())?.max_eigenvalue();
        let r = laplace_radius(dim_a, x);
        let omega_tau = tau3 * r / (3.0 * nu);
        let conditions = LaplaceConditions {
            omega_ok: omega <= 1.0 / 3.0,
            prod_ok: omega * dim_a <= 2.0 / 3.0,
            tau_ok: tau3 * r / nu <= 0.75,
            taylor_ok: tau3 * r / nu * dim_a <= 2.0,
        };
        Ok(Self {
            center: center.iter().copied().collect(),
            diamond2: diamond2(omega, dim_a),
            diamond3: diamond3(tau3, dim_a, alpha, omega_tau),
            diamond4: diamond4(tau3, tau4, dim_a, alpha, omega_tau),
            f,
            d2,
            g2,
            dim_a,
            alpha,
            x,
            r,
            nu,
            omega,
            omega_tau,
            tau3,
            tau4,
            conditions,
            n_directions: 0,
            seed: 0,
        })
    }

    /// `ν⁻¹r`, the radius of the vicinity in the `D`-norm.
    pub fn vicinity_radius(&self) -> f64 {
        self.r / self.nu
    }

    pub fn tv_bound2(&self) -> f64 {
        4.0 * (self.diamond2 + libm::exp(-self.x))
    }

    pub fn tv_bound3(&self) -> f64 {
        4.0 * (self.diamond3 + libm::exp(-self.x))
    }

    pub fn tv_bound4(&self) -> f64 {
        4.0 * (self.diamond4 + libm::exp(-self.x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceOptions {
    pub x: f64,
    pub nu: f64,
    pub probe: ProbeConfig,
    /// Take `τ₃`, `τ₄` as sups over the vicinity rather than at the center.
    pub tau_over_vicinity: bool,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        Self {
            x: DEFAULT_X,
            nu: DEFAULT_NU,
            probe: ProbeConfig::default(),
            tau_over_vicinity: true,
        }
    }
}

/// Build the Laplace report for `model` around the stationary point `center`.
pub fn laplace_report<M: SlsModel + ?Sized>(
    model: &M,
    center: &Vector,
    opts: &LaplaceOptions,
) -> Result<LaplaceReport> {
    let f = PsdOperator::from_sym(&model.hess(center))?;
    let g = model.grad(center);
    let decrement = f.inv_sqrt()?.apply(&g).norm();
    if decrement > 1e-6 {
        return Err(Error::NotStationary { grad_norm: g.norm() });
    }
    let g2 = model.penalty().clone();
    // Provisional report fixes D², dimA and the vicinity radius.
    let base = LaplaceReport::from_parts(center, f.clone(), g2.clone(), opts.x, opts.nu, 0.0, 0.0, 0.0)?;
    let radius = base.vicinity_radius();
    let d2 = base.d2_for_probes()?;
    let omega = estimate_omega(model, center, &d2, radius, &opts.probe)?.omega_hat;
    let sc = if opts.tau_over_vicinity {
        estimate_tau_vicinity(model, center, &d2, radius, 1.0, &opts.probe)?
    } else {
        estimate_self_concordance(model, center, &d2, 1.0, &opts.probe)?
    };
    let mut report = LaplaceReport::from_parts(center, f, g2, opts.x, opts.nu, omega, sc.tau3_hat, sc.tau4_hat)?;
    report.n_directions = opts.probe.n_directions;
    report.seed = opts.probe.seed;
    Ok(report)
}

impl LaplaceReport {
    /// `D²`, which must be invertible to shape the probe vicinity.
    fn d2_for_probes(&self) -> Result<PsdOperator> {
        if self.d2.is_invertible() {
            Ok(self.d2.clone())
        } else {
            Err(Error::Singular {
                eigenvalue: self.d2.min_eigenvalue(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvCertificate {
    pub tv_observed: f64,
    pub bound2: f64,
    pub bound3: f64,
    pub diamond2_applies: bool,
    pub diamond3_applies: bool,
    /// Observed TV within every bound whose preconditions are met.
    pub holds: bool,
}

/// Compare the grid posterior against `N(x*, F⁻¹)` in total variation.
pub fn tv_certificate(report: &LaplaceReport, grid: &GridPosterior) -> Result<TvCertificate> {
    let mean = Vector::from_column_slice(&report.center);
    let sigma = report.f.inverse()?;
    let tv = crate::oracle::total_variation(grid, &mean, &sigma)?;
    Ok(tv_certificate_from_observed(report, tv))
}

pub fn tv_certificate_from_observed(report: &LaplaceReport, tv: f64) -> TvCertificate {
    let c = report.conditions;
    let b2 = report.tv_bound2();
    let b3 = report.tv_bound3();
    let holds = (!c.diamond2_applies() || tv <= b2) && (!c.diamond3_applies() || tv <= b3);
    TvCertificate {
        tv_observed: tv,
        bound2: b2,
        bound3: b3,
        diamond2_applies: c.diamond2_applies(),
        diamond3_applies: c.diamond3_applies(),
        holds,
    }
}

/// `2c₃√((dimA+α)³/n) + 4e^{-x}`.
pub fn kl_bound(c3: f64, dim_a: f64, alpha: f64, n: f64, x: f64) -> f64 {
    let b = dim_a + alpha;
    2.0 * c3 * libm::sqrt(b * b * b / n) + 4.0 * libm::exp(-x)
}

/// `2.4·c₃·‖QF⁻¹Qᵀ‖^{1/2}·√((dimA+α)³/n) + 4e^{-x}`.
pub fn posterior_mean_bound(c3: f64, dim_a: f64, alpha: f64, n: f64, x: f64, qfq_norm: f64) -> f64 {
    let b = dim_a + alpha;
    2.4 * c3 * libm::sqrt(qfq_norm) * libm::sqrt(b * b * b / n) + 4.0 * libm::exp(-x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InexactBound {
    pub extra_term: f64,
    pub total_bound: f64,
    pub calibration: f64,
}

/// TV bound on elliptic sets when `N(center_used, F_used⁻¹)` replaces `N(x*, F⁻¹)`.
///
/// Requires `3‖QF⁻¹Qᵀ‖² ≤ ‖QF⁻¹Qᵀ‖²_Fr`.
pub fn inexact_tv_bound(
    report: &LaplaceReport,
    center_used: &Vector,
    f_used: &PsdOperator,
    q: &Mat,
    calibration: f64,
) -> Result<InexactBound> {
    let f_inv = report.f.inverse()?;
    let b = q * f_inv.matrix() * q.transpose();
    let nb = linalg::sym_norms(&b);
    if 3.0 * nb.operator_norm * nb.operator_norm > nb.frobenius * nb.frobenius * (1.0 + 1e-12) {
        return Err(Error::Precondition(alloc::format!(
            "3‖QF⁻¹Qᵀ‖² = {} exceeds ‖QF⁻¹Qᵀ‖²_Fr = {}",
            3.0 * nb.operator_norm * nb.operator_norm,
            nb.frobenius * nb.frobenius
        )));
    }
    let used_inv = f_used.inverse()?;
    let diff = q * (f_inv.matrix() - used_inv.matrix()) * q.transpose();
    let shift = q * (center_used - Vector::from_column_slice(&report.center));
    let extra = calibration * (linalg::sym_norms(&diff).nuclear + shift.norm_squared()) / nb.frobenius;
    Ok(InexactBound {
        extra_term: extra,
        total_bound: report.tv_bound3() + extra,
        calibration,
    })
}
