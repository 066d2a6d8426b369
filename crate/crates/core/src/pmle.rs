//! Penalized MLE fitting and its finite-sample certificates.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, PsdOperator, Vector};
use crate::sls::{probe_directions, ProbeConfig, SlsModel};
use crate::rng;

/// Damped Newton settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative gradient tolerance: stop once `‖∇f‖ ≤ tol·(1 + ‖υ‖)`.
    pub grad_tol: f64,
    pub backtrack: f64,
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-8,
            backtrack: 0.5,
            armijo: 0.1,
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmleResult {
    pub maximizer: Vector,
    pub objective_at_max: f64,
    pub grad_norm: f64,
    /// `−∇²f` at the maximizer.
    pub fg_at_max: PsdOperator,
    pub iterations: usize,
    pub converged: bool,
    /// Gradient norms per iteration.
    pub trace: Vec<f64>,
}

fn armijo_search<M: SlsModel + ?Sized>(
    model: &M,
    u: &Vector,
    f0: f64,
    dir: &Vector,
    slope: f64,
    step0: f64,
    opts: &FitOptions,
    feasible: &dyn Fn(&Vector) -> bool,
    blocked: &mut bool,
) -> Option<(Vector, f64)> {
    let mut step = step0;
    for _ in 0..=opts.max_halvings {
        let cand = u + dir * step;
        *blocked = !feasible(&cand);
        if !*blocked {
            let fc = model.eval(&cand);
            if fc.is_finite() && fc >= f0 + opts.armijo * step * slope {
                return Some((cand, fc));
            }
        }
        step *= opts.backtrack;
    }
    None
}

/// Maximize a concave penalized objective by damped Newton.
///
/// Falls back to gradient ascent when `−∇²f` is not positive definite. Close
/// to the optimum, where function differences drown in rounding, full Newton
/// steps are taken without the sufficient-increase test; convergence is
/// declared either by the gradient test or once Newton steps fall below
/// machine resolution.
pub fn fit<M: SlsModel + ?Sized>(model: &M, init: &Vector, opts: &FitOptions) -> Result<PmleResult> {
    fit_within(model, init, opts, &|_| true)
}

/// [`fit`] restricted to the region where `feasible` holds.
///
/// Steps leaving the region are halved; if even the smallest step leaves it,
/// the fit fails with [`Error::WarmStart`].
pub fn fit_within<M: SlsModel + ?Sized>(
    model: &M,
    init: &Vector,
    opts: &FitOptions,
    feasible: &dyn Fn(&Vector) -> bool,
) -> Result<PmleResult> {
    if !feasible(init) {
        return Err(Error::WarmStart("initial point outside the region".into()));
    }
    if init.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: init.len(),
        });
    }
    let mut u = init.clone();
    let mut f = model.eval(&u);
    if !f.is_finite() {
        return Err(Error::Validation("objective is not finite at the initial point".into()));
    }
    let mut trace = Vec::new();
    let mut blocked = false;
    for it in 0..opts.max_iter {
        let g = model.grad(&u);
        let gn = g.norm();
        trace.push(gn);
        let h = model.hess(&u);
        if gn <= opts.grad_tol * (1.0 + u.norm()) {
            return finish(model, u, f, gn, it, trace);
        }
        let newton = linalg::spd_solve(&h, &g).filter(|d| d.dot(&g) > 0.0);
        let tiny = 4.0 * f64::EPSILON * (1.0 + u.norm());
        if let Some(d) = &newton {
            let slope = g.dot(&d);
            if d.norm() <= tiny {
                return finish(model, u, f, gn, it, trace);
            }
            // Near the optimum the predicted increase is below rounding.
            let floor = 64.0 * f64::EPSILON * (1.0 + libm::fabs(f));
            if slope <= 1e-6 * (1.0 + libm::fabs(f)) {
                let cand = &u + d;
                let fc = model.eval(&cand);
                if feasible(&cand) && fc.is_finite() && fc >= f - floor {
                    u = cand;
                    f = fc;
                    continue;
                }
            }
            if let Some((cand, fc)) = armijo_search(model, &u, f, &d, slope, 1.0, opts, feasible, &mut blocked) {
                u = cand;
                f = fc;
                continue;
            }
        }
        let scale = linalg::sym_norms(&h).frobenius.max(1e-300);
        let step0 = if newton.is_some() { 1.0 / scale } else { 1.0 / scale.max(gn) };
        let newton_blocked = blocked;
        match armijo_search(model, &u, f, &g, gn * gn, step0, opts, feasible, &mut blocked) {
            Some((cand, fc)) => {
                u = cand;
                f = fc;
            }
            None => {
                if blocked && (newton.is_none() || newton_blocked) {
                    return Err(Error::WarmStart(alloc::format!(
                        "iterate {it} cannot move without leaving the region"
                    )));
                }
                if newton.is_some() {
                    // Neither direction makes resolvable progress: rounding floor.
                    return finish(model, u, f, gn, it, trace);
                }
                return Err(Error::NonConcave {
                    eigenvalue: linalg::min_eigenvalue(&h),
                });
            }
        }
    }
    let last = trace.last().copied().unwrap_or(f64::NAN);
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last,
        trace,
    })
}

fn finish<M: SlsModel + ?Sized>(
    model: &M,
    u: Vector,
    f: f64,
    gn: f64,
    iterations: usize,
    trace: Vec<f64>,
) -> Result<PmleResult> {
    let h = model.hess(&u);
    let fg = PsdOperator::from_sym(&h).map_err(|e| match e {
        Error::NotPsd { eigenvalue } => Error::NonConcave { eigenvalue },
        other => other,
    })?;
    Ok(PmleResult {
        maximizer: u,
        objective_at_max: f,
        grad_norm: gn,
        fg_at_max: fg,
        iterations,
        converged: true,
        trace,
    })
}

/// Effective dimension, radius and effective sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSpec {
    /// `tr(D_G⁻² V²)`.
    pub p_g: f64,
    /// `‖D_G⁻¹ V² D_G⁻¹‖`.
    pub lambda_g: f64,
    pub x: f64,
    /// `√p_G + √(2x·λ_G)`.
    pub r_g: f64,
    pub nu: f64,
    /// `1/‖D_G⁻²‖`.
    pub n_eff: f64,
}

impl ConcentrationSpec {
    /// Radius of the concentration set `ν⁻¹·r_G`.
    pub fn radius(&self) -> f64 {
        self.r_g / self.nu
    }
}

pub fn concentration_radius(p_g: f64, lambda_g: f64, x: f64) -> f64 {
    libm::sqrt(p_g) + libm::sqrt(2.0 * x * lambda_g)
}

pub fn concentration_spec(dg2: &PsdOperator, v2: &PsdOperator, x: f64, nu: f64) -> Result<ConcentrationSpec> {
    if dg2.dim() != v2.dim() {
        return Err(Error::DimensionMismatch {
            expected: dg2.dim(),
            found: v2.dim(),
        });
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Validation("nu must lie in (0, 1]".into()));
    }
    if !(x >= 0.0) {
        return Err(Error::Validation("x must be nonnegative".into()));
    }
    let sol = linalg::spd_solve_mat(dg2.matrix(), v2.matrix()).ok_or(Error::Singular {
        eigenvalue: dg2.min_eigenvalue(),
    })?;
    let p_g = linalg::trace(&sol);
    let inv_half = dg2.inv_sqrt()?;
    let lambda_g = v2.congruence(inv_half.matrix())?.max_eigenvalue();
    Ok(ConcentrationSpec {
        p_g,
        lambda_g,
        x,
        r_g: concentration_radius(p_g, lambda_g, x),
        nu,
        n_eff: dg2.min_eigenvalue(),
    })
}

/// Fisher and Wilks expansions at a fitted maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherWilksReport {
    pub omega: f64,
    pub xi_norm_sq: f64,
    /// `2L_G(ũ) − 2L_G(υ*_G) − ‖ξ‖²`.
    pub wilks_residual: f64,
    pub wilks_lower: f64,
    pub wilks_upper: f64,
    pub wilks_holds: bool,
    /// `‖D_G(ũ − υ*_G) − ξ‖²`.
    pub fisher_residual: f64,
    pub fisher_bound: f64,
    pub fisher_holds: bool,
}

/// Wilks interval `[−ω‖ξ‖², ω‖ξ‖²/(1−ω)]`.
pub fn wilks_bounds(omega: f64, xi_norm_sq: f64) -> (f64, f64) {
    (-omega * xi_norm_sq, omega * xi_norm_sq / (1.0 - omega))
}

/// Fisher bound `3ω‖ξ‖²/(1−ω)²`.
pub fn fisher_bound(omega: f64, xi_norm_sq: f64) -> f64 {
    3.0 * omega * xi_norm_sq / ((1.0 - omega) * (1.0 - omega))
}

/// Check the Fisher and Wilks expansions of `result` around `population_max`.
///
/// `grad_noise` is the score noise `∇ζ`. A slack of `1e-9·(1 + ‖ξ‖²)` absorbs
/// rounding in the holds flags.
pub fn fisher_wilks_certificate<M: SlsModel + ?Sized>(
    model: &M,
    result: &PmleResult,
    population_max: &Vector,
    grad_noise: &Vector,
    omega: f64,
) -> Result<FisherWilksReport> {
    if !(omega >= 0.0 && omega < 1.0) {
        return Err(Error::InvalidRegime(alloc::format!("omega = {omega} must lie in [0, 1)")));
    }
    let dg2 = PsdOperator::from_sym(&model.hess(population_max))?;
    let (dg, dg_inv) = dg2.sqrt_inv_sqrt()?;
    let xi = dg_inv.apply(grad_noise);
    let xi2 = xi.norm_squared();
    let wilks = 2.0 * (model.eval(&result.maximizer) - model.eval(population_max)) - xi2;
    let fisher = (dg.apply(&(&result.maximizer - population_max)) - &xi).norm_squared();
    let (lo, hi) = wilks_bounds(omega, xi2);
    let fb = fisher_bound(omega, xi2);
    let slack = 1e-9 * (1.0 + xi2);
    Ok(FisherWilksReport {
        omega,
        xi_norm_sq: xi2,
        wilks_residual: wilks,
        wilks_lower: lo,
        wilks_upper: hi,
        wilks_holds: wilks >= lo - slack && wilks <= hi + slack,
        fisher_residual: fisher,
        fisher_bound: fb,
        fisher_holds: fisher <= fb + slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianStability {
    /// `‖D_G⁻¹ 𝔽̂_G D_G⁻¹ − I‖`.
    pub delta_plus: f64,
    pub sandwich_ok: bool,
    pub n_probes: usize,
}

/// Relative deviation of `fg_hat` from `fg_star`, checked on random probes.
pub fn hessian_stability(
    fg_star: &PsdOperator,
    fg_hat: &PsdOperator,
    n_probes: usize,
    seed: u64,
) -> Result<HessianStability> {
    if fg_star.dim() != fg_hat.dim() {
        return Err(Error::DimensionMismatch {
            expected: fg_star.dim(),
            found: fg_hat.dim(),
        });
    }
    let inv_half = fg_star.inv_sqrt()?;
    let n = fg_star.dim();
    let rel = inv_half.matrix() * fg_hat.matrix() * inv_half.matrix() - Mat::identity(n, n);
    let delta_plus = linalg::sym_norms(&linalg::symmetrize(&rel)).operator_norm;
    let mut ok = true;
    for k in 0..n_probes {
        let mut r = rng::stream(seed, k as u64);
        let u = rng::normal_vector(&mut r, n);
        let base = fg_star.quad_form(&u);
        let hat = fg_hat.quad_form(&u);
        let slack = 1e-12 * base;
        if hat < (1.0 - delta_plus) * base - slack || hat > (1.0 + delta_plus) * base + slack {
            ok = false;
        }
    }
    Ok(HessianStability {
        delta_plus,
        sandwich_ok: ok,
        n_probes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCertificate {
    pub q: PsdOperator,
    /// `‖Q 𝔽_G(υ*)⁻¹ G² υ*‖` with `𝔽_G = F + G²`.
    pub b_g: f64,
    pub delta_star: f64,
    /// `b_G/(1−δ*)`.
    pub bound: f64,
    /// `δ*·b_G/(1−δ*)`, bounding `‖Q(b_G + 𝔽_G⁻¹G²υ*)‖`.
    pub refined_residual_bound: f64,
}

/// Bias certificate; `f_at_star` is the unpenalized information `F(υ*)`.
pub fn bias_certificate(
    q: &PsdOperator,
    ups_star: &Vector,
    g2: &PsdOperator,
    f_at_star: &PsdOperator,
    delta_star: f64,
) -> Result<BiasCertificate> {
    if !(delta_star >= 0.0 && delta_star < 1.0) {
        return Err(Error::InvalidRegime(alloc::format!(
            "delta_star = {delta_star} must lie in [0, 1)"
        )));
    }
    let fg = f_at_star.add(g2)?;
    let shift = fg.solve(&g2.apply(ups_star))?;
    let b_g = q.apply(&shift).norm();
    Ok(BiasCertificate {
        q: q.clone(),
        b_g,
        delta_star,
        bound: b_g / (1.0 - delta_star),
        refined_residual_bound: delta_star * b_g / (1.0 - delta_star),
    })
}

/// Sampled estimate of `δ*_G = sup_{‖Qu‖≤radius} ‖𝔻⁻¹ 𝔽_G(υ*+u) 𝔻⁻¹ − I‖`,
/// with `𝔻² = 𝔽_G(υ*)` taken from the model's penalized Hessian.
pub fn estimate_delta_star<M: SlsModel + ?Sized>(
    model: &M,
    ups_star: &Vector,
    q: &PsdOperator,
    radius: f64,
    cfg: &ProbeConfig,
) -> Result<f64> {
    let d2 = PsdOperator::from_sym(&model.hess(ups_star))?;
    let inv_half = d2.inv_sqrt()?;
    let metric = PsdOperator::from_sym(&(q.matrix() * q.matrix()))?;
    let dirs = probe_directions(&metric, cfg.n_directions, cfg.seed)?;
    let n = ups_star.len();
    let shells = cfg.shells.max(1);
    let mut best = 0.0_f64;
    for w in &dirs {
        for j in 1..=shells {
            let u = w * (radius * j as f64 / shells as f64);
            let h = model.hess(&(ups_star + u));
            let rel = inv_half.matrix() * h * inv_half.matrix() - Mat::identity(n, n);
            best = best.max(linalg::sym_norms(&linalg::symmetrize(&rel)).operator_norm);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskCertificate {
    pub loss_bound: f64,
    pub risk_bound: f64,
    pub bias_variance_sum: f64,
}

/// Loss and risk bounds; `bias_norm = ‖D_G⁻¹ G² υ*‖` and `c1` multiplies the
/// `e^{-x}` tail term of the risk bound.
pub fn risk_certificate(
    spec: &ConcentrationSpec,
    omega: f64,
    delta_star: f64,
    bias_norm: f64,
    x: f64,
    c1: f64,
) -> Result<RiskCertificate> {
    if !(omega >= 0.0 && omega < 1.0) {
        return Err(Error::InvalidRegime(alloc::format!("omega = {omega} must lie in [0, 1)")));
    }
    if !(delta_star >= 0.0 && delta_star < 1.0) {
        return Err(Error::InvalidRegime(alloc::format!(
            "delta_star = {delta_star} must lie in [0, 1)"
        )));
    }
    let s2 = libm::sqrt(2.0 * omega);
    let bias_term = bias_norm / (1.0 - delta_star);
    let loss_bound = (1.0 + s2) / (1.0 - omega) * spec.r_g + bias_term;
    let var_factor = 1.0 + s2 / (1.0 - omega);
    let mean_term =
        bias_term + libm::sqrt(3.0 * omega) / (1.0 - omega) * libm::sqrt(spec.p_g) + c1 * libm::exp(-x);
    Ok(RiskCertificate {
        loss_bound,
        risk_bound: var_factor * var_factor * spec.p_g + mean_term * mean_term,
        bias_variance_sum: spec.p_g + bias_norm * bias_norm,
    })
}
