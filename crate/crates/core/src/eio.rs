//! Error-in-operator model
//!
//! `f(θ,A) = −½‖z − Aθ‖² − (μ²/2)‖Â − A‖²_Fr − ½‖Gθ‖² − ½Σ_m‖𝒦_m A_m‖²`
//!
//! with target `θ ∈ ℝᵖ` and nuisance operator `A ∈ ℝ^{q×p}` whose rows are
//! `A_m`. The stacked parameter is `(θ, A_1, …, A_q)` of length `p + pq`.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, BlockOperator, Mat, PsdOperator, Vector, LOEWNER_TOL};
use crate::marginal::{self, MarginalTvBound, MarginalTvInputs, Separability};
use crate::pmle::{fit_within, FitOptions, PmleResult};
use crate::sls::{estimate_self_concordance, ProbeConfig, SelfConcordance, SlsModel};

pub const DEFAULT_RHO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EioProblemJson", into = "EioProblemJson")]
pub struct EioProblem {
    z: Vector,
    a_hat: Mat,
    mu: f64,
    g2: PsdOperator,
    g02: PsdOperator,
    k2: Vec<PsdOperator>,
    rho: f64,
}

/// Wire form: `{z, A_hat, mu, G2, G02, K2, rho}` with `A_hat` as rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EioProblemJson {
    pub z: Vec<f64>,
    #[serde(rename = "A_hat")]
    pub a_hat: Vec<Vec<f64>>,
    pub mu: f64,
    #[serde(rename = "G2")]
    pub g2: PsdOperator,
    #[serde(rename = "G02", default)]
    pub g02: Option<PsdOperator>,
    #[serde(rename = "K2", default)]
    pub k2: Option<Vec<PsdOperator>>,
    #[serde(default)]
    pub rho: Option<f64>,
}

impl TryFrom<EioProblemJson> for EioProblem {
    type Error = Error;

    fn try_from(j: EioProblemJson) -> Result<Self> {
        let q = j.a_hat.len();
        let p = j.a_hat.first().map_or(0, Vec::len);
        if j.a_hat.iter().any(|r| r.len() != p) {
            return Err(Error::Validation("A_hat rows have unequal length".into()));
        }
        let a_hat = Mat::from_fn(q, p, |i, k| j.a_hat[i][k]);
        let g02 = j.g02.unwrap_or_else(|| j.g2.clone());
        let k2 = j.k2.unwrap_or_else(|| (0..q).map(|_| PsdOperator::zeros(p)).collect());
        EioProblem::new(
            Vector::from_vec(j.z),
            a_hat,
            j.mu,
            j.g2,
            Some(g02),
            Some(k2),
            j.rho.unwrap_or(DEFAULT_RHO),
        )
    }
}

impl From<EioProblem> for EioProblemJson {
    fn from(p: EioProblem) -> Self {
        Self {
            z: p.z.iter().copied().collect(),
            a_hat: (0..p.a_hat.nrows()).map(|i| p.a_hat.row(i).iter().copied().collect()).collect(),
            mu: p.mu,
            g2: p.g2,
            g02: Some(p.g02),
            k2: Some(p.k2),
            rho: Some(p.rho),
        }
    }
}

impl EioProblem {
    /// `g02` defaults to `g2`, `k2` to zero blocks.
    pub fn new(
        z: Vector,
        a_hat: Mat,
        mu: f64,
        g2: PsdOperator,
        g02: Option<PsdOperator>,
        k2: Option<Vec<PsdOperator>>,
        rho: f64,
    ) -> Result<Self> {
        let (q, p) = a_hat.shape();
        if p == 0 || q == 0 {
            return Err(Error::Validation("empty operator".into()));
        }
        if z.len() != q {
            return Err(Error::DimensionMismatch { expected: q, found: z.len() });
        }
        if g2.dim() != p {
            return Err(Error::DimensionMismatch { expected: p, found: g2.dim() });
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Validation("mu must be positive".into()));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Validation("rho must lie in (0, 1)".into()));
        }
        if z.iter().chain(a_hat.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite entries".into()));
        }
        let g02 = g02.unwrap_or_else(|| g2.clone());
        if g02.dim() != p {
            return Err(Error::DimensionMismatch { expected: p, found: g02.dim() });
        }
        if !g02.leq(&g2) {
            return Err(Error::Validation("G02 must satisfy G02 ⪯ G2".into()));
        }
        let k2 = k2.unwrap_or_else(|| (0..q).map(|_| PsdOperator::zeros(p)).collect());
        if k2.len() != q || k2.iter().any(|k| k.dim() != p) {
            return Err(Error::DimensionMismatch { expected: q, found: k2.len() });
        }
        Ok(Self { z, a_hat, mu, g2, g02, k2, rho })
    }

    pub fn p(&self) -> usize {
        self.a_hat.ncols()
    }

    pub fn q(&self) -> usize {
        self.a_hat.nrows()
    }

    pub fn z(&self) -> &Vector {
        &self.z
    }

    pub fn a_hat(&self) -> &Mat {
        &self.a_hat
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn g2(&self) -> &PsdOperator {
        &self.g2
    }

    pub fn g02(&self) -> &PsdOperator {
        &self.g02
    }

    pub fn k2(&self) -> &[PsdOperator] {
        &self.k2
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(
            self.z.clone(),
            self.a_hat.clone(),
            mu,
            self.g2.clone(),
            Some(self.g02.clone()),
            Some(self.k2.clone()),
            self.rho,
        )
    }

    fn check_state(&self, s: &EioState) -> Result<()> {
        if s.theta.len() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), found: s.theta.len() });
        }
        if s.a.shape() != self.a_hat.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.q() * self.p(),
                found: s.a.nrows() * s.a.ncols(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EioState {
    pub theta: Vector,
    pub a: Mat,
}

impl EioState {
    /// `(θ, A_1, …, A_q)`.
    pub fn stack(&self) -> Vector {
        let (q, p) = self.a.shape();
        let mut v = Vector::zeros(p + p * q);
        v.rows_mut(0, p).copy_from(&self.theta);
        for m in 0..q {
            for k in 0..p {
                v[p + m * p + k] = self.a[(m, k)];
            }
        }
        v
    }

    pub fn unstack(v: &Vector, p: usize, q: usize) -> Result<Self> {
        if v.len() != p + p * q {
            return Err(Error::DimensionMismatch { expected: p + p * q, found: v.len() });
        }
        Ok(Self {
            theta: v.rows(0, p).into_owned(),
            a: Mat::from_fn(q, p, |m, k| v[p + m * p + k]),
        })
    }
}

/// Objective value and derivatives at a state.
#[derive(Debug, Clone, PartialEq)]
pub struct EioDerivatives {
    pub f: f64,
    pub grad: Vector,
    /// `−∇²f` on the stacked parameter.
    pub hess: Mat,
}

impl EioDerivatives {
    pub fn blocks(&self, p: usize) -> Result<BlockOperator> {
        BlockOperator::from_full(&self.hess, p)
    }
}

pub fn objective(problem: &EioProblem, s: &EioState) -> Result<f64> {
    problem.check_state(s)?;
    Ok(value(problem, s))
}

fn value(pr: &EioProblem, s: &EioState) -> f64 {
    let r = &pr.z - &s.a * &s.theta;
    let da = &pr.a_hat - &s.a;
    let mut k = 0.0;
    for (m, k2) in pr.k2.iter().enumerate() {
        k += k2.quad_form(&s.a.row(m).transpose());
    }
    -0.5 * r.norm_squared() - 0.5 * pr.mu * pr.mu * da.norm_squared() - 0.5 * pr.g2.quad_form(&s.theta) - 0.5 * k
}

pub fn objective_grad_hess(problem: &EioProblem, s: &EioState) -> Result<EioDerivatives> {
    problem.check_state(s)?;
    let (p, q) = (problem.p(), problem.q());
    let mu2 = problem.mu * problem.mu;
    let r = &problem.z - &s.a * &s.theta;
    let mut grad = Vector::zeros(p + p * q);
    let gt = s.a.transpose() * &r - problem.g2.apply(&s.theta);
    grad.rows_mut(0, p).copy_from(&gt);
    let mut hess = Mat::zeros(p + p * q, p + p * q);
    let ftt = s.a.transpose() * &s.a + problem.g2.matrix();
    hess.view_mut((0, 0), (p, p)).copy_from(&ftt);
    let ttt = &s.theta * s.theta.transpose();
    let eye = Mat::identity(p, p);
    for m in 0..q {
        let am = s.a.row(m).transpose();
        let ahm = problem.a_hat.row(m).transpose();
        let off = p + m * p;
        let gm = &s.theta * r[m] - (&am - &ahm) * mu2 - problem.k2[m].apply(&am);
        grad.rows_mut(off, p).copy_from(&gm);
        let fmm = &ttt + &eye * mu2 + problem.k2[m].matrix();
        hess.view_mut((off, off), (p, p)).copy_from(&fmm);
        // F_{θA_m} = (A_mᵀθ − z_m)I + A_m θᵀ
        let ftm = &eye * (-r[m]) + &am * s.theta.transpose();
        hess.view_mut((0, off), (p, p)).copy_from(&ftm);
        hess.view_mut((off, 0), (p, p)).copy_from(&ftm.transpose());
    }
    Ok(EioDerivatives {
        f: value(problem, s),
        grad,
        hess,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmStart {
    pub in_region: bool,
    /// `ρμ² − 4‖θ‖²`.
    pub theta_margin: f64,
    /// `λmin(ρμ²(AᵀA + 2G₀²)) − 4‖Aθ − z‖²`.
    pub residual_margin: f64,
}

pub fn warm_start_check(problem: &EioProblem, s: &EioState) -> Result<WarmStart> {
    problem.check_state(s)?;
    let rm2 = problem.rho * problem.mu * problem.mu;
    let theta_margin = rm2 - 4.0 * s.theta.norm_squared();
    let m = (s.a.transpose() * &s.a + problem.g02.matrix() * 2.0) * rm2;
    let res = (&s.a * &s.theta - &problem.z).norm_squared();
    let residual_margin = linalg::min_eigenvalue(&m) - 4.0 * res;
    let scale = linalg::sym_norms(&m).operator_norm.max(rm2);
    Ok(WarmStart {
        in_region: theta_margin >= -1e-12 * rm2 && residual_margin >= -LOEWNER_TOL * scale,
        theta_margin,
        residual_margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EioDims {
    /// `tr{(AᵀA+G₀²)(AᵀA+G²)⁻¹}`.
    pub p_target: f64,
    /// `Σ_m μ² tr(μ²I + 𝒦_m²)⁻¹`.
    pub q_nuis: f64,
    /// `p_target/(1−ρ) + (1+ρ/4) q_nuis/(1−ρ)`.
    pub p_full_bound: f64,
}

pub fn dims(problem: &EioProblem, s: &EioState) -> Result<EioDims> {
    problem.check_state(s)?;
    let ata = s.a.transpose() * &s.a;
    let f = PsdOperator::from_sym(&(&ata + problem.g2.matrix()))?;
    let num = &ata + problem.g02.matrix();
    let p_target = linalg::trace(&(num * f.inverse()?.matrix()));
    let mu2 = problem.mu * problem.mu;
    let mut q_nuis = 0.0;
    for k in &problem.k2 {
        let blk = k.add(&PsdOperator::scaled_identity(problem.p(), mu2))?;
        q_nuis += mu2 * blk.inverse()?.trace();
    }
    let rho = problem.rho;
    Ok(EioDims {
        p_target,
        q_nuis,
        p_full_bound: p_target / (1.0 - rho) + (1.0 + rho / 4.0) * q_nuis / (1.0 - rho),
    })
}

/// `(ÂᵀÂ + G²)⁻¹Âᵀz`.
pub fn plug_in(problem: &EioProblem) -> Result<Vector> {
    let a = &problem.a_hat;
    let m = a.transpose() * a + problem.g2.matrix();
    linalg::spd_solve(&m, &(a.transpose() * &problem.z)).ok_or(Error::Singular {
        eigenvalue: linalg::min_eigenvalue(&m),
    })
}

/// The problem as a model on the stacked parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct EioModel {
    problem: EioProblem,
    penalty: PsdOperator,
}

impl EioModel {
    pub fn new(problem: EioProblem) -> Result<Self> {
        let (p, q) = (problem.p(), problem.q());
        let mut g = Mat::zeros(p + p * q, p + p * q);
        g.view_mut((0, 0), (p, p)).copy_from(problem.g2.matrix());
        for (m, k) in problem.k2.iter().enumerate() {
            g.view_mut((p + m * p, p + m * p), (p, p)).copy_from(k.matrix());
        }
        Ok(Self {
            penalty: PsdOperator::from_sym(&g)?,
            problem,
        })
    }

    pub fn problem(&self) -> &EioProblem {
        &self.problem
    }

    fn state(&self, u: &Vector) -> EioState {
        EioState {
            theta: u.rows(0, self.problem.p()).into_owned(),
            a: Mat::from_fn(self.problem.q(), self.problem.p(), |m, k| u[self.problem.p() + m * self.problem.p() + k]),
        }
    }

    /// `a_m = ω_mᵀθ + A_mᵀξ` and `b_m = ω_mᵀξ` along `w = (ξ, Ω)`.
    fn directional_terms(&self, at: &Vector, w: &Vector) -> (Vec<f64>, Vec<f64>) {
        let s = self.state(at);
        let d = self.state(w);
        let q = self.problem.q();
        let mut a = Vec::with_capacity(q);
        let mut b = Vec::with_capacity(q);
        for m in 0..q {
            let om = d.a.row(m);
            let am = s.a.row(m);
            a.push(om.dot(&s.theta.transpose()) + am.dot(&d.theta.transpose()));
            b.push(om.dot(&d.theta.transpose()));
        }
        (a, b)
    }
}

impl SlsModel for EioModel {
    fn dim(&self) -> usize {
        self.problem.p() * (1 + self.problem.q())
    }

    fn eval(&self, u: &Vector) -> f64 {
        value(&self.problem, &self.state(u))
    }

    fn grad(&self, u: &Vector) -> Vector {
        let s = self.state(u);
        objective_grad_hess(&self.problem, &s).map(|d| d.grad).unwrap_or_else(|_| Vector::zeros(u.len()))
    }

    fn hess(&self, u: &Vector) -> Mat {
        let s = self.state(u);
        objective_grad_hess(&self.problem, &s)
            .map(|d| d.hess)
            .unwrap_or_else(|_| Mat::zeros(u.len(), u.len()))
    }

    fn penalty(&self) -> &PsdOperator {
        &self.penalty
    }

    fn smooth_part(&self, u: &Vector) -> f64 {
        self.eval(u) + 0.5 * self.penalty.quad_form(u)
    }

    fn third(&self, at: &Vector, w: &Vector) -> f64 {
        let (a, b) = self.directional_terms(at, w);
        -6.0 * a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>()
    }

    fn fourth(&self, _at: &Vector, w: &Vector) -> f64 {
        let (_, b) = self.directional_terms(w, w);
        -12.0 * b.iter().map(|y| y * y).sum::<f64>()
    }

    fn remainder3(&self, at: &Vector, u: &Vector) -> f64 {
        let (a, b) = self.directional_terms(at, u);
        a.iter().zip(&b).map(|(x, y)| -x * y - 0.5 * y * y).sum()
    }
}

/// Joint maximizer over `(θ, A)` by Newton on the stacked parameter, kept
/// inside the warm-start region.
pub fn fit_joint(problem: &EioProblem, init: &EioState) -> Result<(EioState, PmleResult)> {
    problem.check_state(init)?;
    let model = EioModel::new(problem.clone())?;
    let (p, q) = (problem.p(), problem.q());
    let feasible = |v: &Vector| {
        EioState::unstack(v, p, q)
            .and_then(|s| warm_start_check(problem, &s))
            .map(|w| w.in_region)
            .unwrap_or(false)
    };
    if !feasible(&init.stack()) {
        return Err(Error::WarmStart("initial state outside the warm-start region".into()));
    }
    let res = fit_within(&model, &init.stack(), &FitOptions::default(), &feasible)?;
    Ok((EioState::unstack(&res.maximizer, p, q)?, res))
}

/// Plug-in state `(θ_Â, Â)`.
pub fn plug_in_state(problem: &EioProblem) -> Result<EioState> {
    Ok(EioState {
        theta: plug_in(problem)?,
        a: problem.a_hat.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EioConstants {
    pub c3: f64,
    pub c4: f64,
}

/// `c₃ = 6/μ`, `c₄ = 3/μ²`.
pub fn self_concordance_constants(problem: &EioProblem) -> EioConstants {
    let mu = problem.mu;
    EioConstants {
        c3: 6.0 / mu,
        c4: 3.0 / (mu * mu),
    }
}

/// `n = 1/‖(AᵀA + G₀²)⁻¹‖`.
pub fn effective_sample_size(problem: &EioProblem, a: &Mat) -> Result<f64> {
    let m = PsdOperator::from_sym(&(a.transpose() * a + problem.g02.matrix()))?;
    let l = m.min_eigenvalue();
    if !(l > 0.0) {
        return Err(Error::Singular { eigenvalue: l });
    }
    Ok(l)
}

/// `n·m² = block{AᵀA + G₀², μ²I, …, μ²I}`.
pub fn local_metric(problem: &EioProblem, a: &Mat) -> Result<PsdOperator> {
    let (p, q) = (problem.p(), problem.q());
    let mut d = Mat::identity(p + p * q, p + p * q) * (problem.mu * problem.mu);
    d.view_mut((0, 0), (p, p)).copy_from(&(a.transpose() * a + problem.g02.matrix()));
    PsdOperator::from_sym(&d)
}

/// Sampled `c₃`, `c₄` at `state` in the metric of [`local_metric`].
pub fn empirical_self_concordance(problem: &EioProblem, state: &EioState, cfg: &ProbeConfig) -> Result<SelfConcordance> {
    let model = EioModel::new(problem.clone())?;
    let n = effective_sample_size(problem, &state.a)?;
    let d2 = local_metric(problem, &state.a)?;
    estimate_self_concordance(&model, &state.stack(), &d2, n, cfg)
}

/// Regression data turned into an error-in-operator problem.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedRegression {
    /// `Σᵢ Φ(Xᵢ)Ψ(Xᵢ)ᵀ`.
    pub a_hat_raw: Mat,
    /// `Z_k = Σᵢ Yᵢ φ_k(Xᵢ)`.
    pub z_raw: Vector,
    pub n: usize,
    pub sigma: f64,
    pub sigma_x: f64,
    /// `n/σ_X²`.
    pub mu_sq_raw: f64,
    /// Factor `1/(√2σ)` applied to `z` and `Â` in `problem`.
    pub scale: f64,
    pub problem: EioProblem,
}

pub struct RegressionPriors {
    pub g2: PsdOperator,
    pub g02: Option<PsdOperator>,
    pub k2: Option<Vec<PsdOperator>>,
    pub rho: f64,
}

/// Build `Â`, `Z` from features `Ψ` (length `p`) and `Φ` (length `q`).
///
/// With `λ = 1` the Lagrange form profiles over `η` to
/// `−‖Z − Aθ‖²/(4σ²) − (n/2σ_X²)‖Â − A‖²`; rescaling `z`, `A` by `1/(√2σ)`
/// gives the standard objective with `μ² = 2σ²n/σ_X²`.
pub fn ingest_regression(
    x: &[Vec<f64>],
    y: &[f64],
    psi: &dyn Fn(&[f64]) -> Vec<f64>,
    phi: &dyn Fn(&[f64]) -> Vec<f64>,
    sigma: f64,
    sigma_x: f64,
    priors: RegressionPriors,
) -> Result<IngestedRegression> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Validation("no observations".into()));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.len() });
    }
    if !(sigma > 0.0 && sigma_x > 0.0) {
        return Err(Error::Validation("sigma and sigma_X must be positive".into()));
    }
    let p = psi(&x[0]).len();
    let q = phi(&x[0]).len();
    let mut a = Mat::zeros(q, p);
    let mut z = Vector::zeros(q);
    for (xi, yi) in x.iter().zip(y) {
        let ps = Vector::from_vec(psi(xi));
        let ph = Vector::from_vec(phi(xi));
        if ps.len() != p || ph.len() != q || ps.iter().chain(ph.iter()).any(|v| !v.is_finite()) || !yi.is_finite() {
            return Err(Error::Validation("feature evaluation failed".into()));
        }
        a += &ph * ps.transpose();
        z += &ph * *yi;
    }
    let scale = 1.0 / (core::f64::consts::SQRT_2 * sigma);
    let mu_sq_raw = n as f64 / (sigma_x * sigma_x);
    let problem = EioProblem::new(
        &z * scale,
        &a * scale,
        libm::sqrt(2.0 * sigma * sigma * mu_sq_raw),
        priors.g2,
        priors.g02,
        priors.k2,
        priors.rho,
    )?;
    Ok(IngestedRegression {
        a_hat_raw: a,
        z_raw: z,
        n,
        sigma,
        sigma_x,
        mu_sq_raw,
        scale,
        problem,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EioCertificate {
    pub n_eff: f64,
    pub dims: EioDims,
    /// `2√p̄ + √(2x)` with `p̄` the full-dimension bound.
    pub r_bar: f64,
    /// `2√p_target + √(2x)`.
    pub r_star: f64,
    pub c3: f64,
    /// `c₃ r̄ n^{-1/2}`.
    pub condition_value: f64,
    /// `c₃ r̄ n^{-1/2} ≤ 1/3`.
    pub applicable: bool,
    pub warm_start: WarmStart,
    pub rho_sep: f64,
    pub efficient: PsdOperator,
    pub dim_q: f64,
    pub dominance_ok: bool,
    pub bound: MarginalTvBound,
    pub notes: Vec<String>,
}

/// Marginal certificate for `θ` at the joint fit.
pub fn eio_laplace_certificate(
    problem: &EioProblem,
    fit: &EioState,
    q: &Mat,
    x: f64,
    c0: f64,
    calibration: f64,
) -> Result<EioCertificate> {
    let ws = warm_start_check(problem, fit)?;
    let mut notes = Vec::new();
    if !ws.in_region {
        notes.push(String::from("fit outside the warm-start region"));
    }
    let d = dims(problem, fit)?;
    let n = effective_sample_size(problem, &fit.a)?;
    let sx = libm::sqrt(2.0 * x);
    let r_bar = 2.0 * libm::sqrt(d.p_full_bound) + sx;
    let r_star = 2.0 * libm::sqrt(d.p_target) + sx;
    let c3 = self_concordance_constants(problem).c3;
    let cond = c3 * r_bar / libm::sqrt(n);
    let der = objective_grad_hess(problem, fit)?;
    let sep: Separability = marginal::separability(&der.blocks(problem.p())?)?;
    let f_tt = PsdOperator::from_sym(&(fit.a.transpose() * &fit.a + problem.g2.matrix()))?;
    let t = marginal::target_dimension(q, &f_tt, c0)?;
    if !t.dominance_ok {
        notes.push(String::from("Frobenius dominance for Q fails"));
    }
    let applicable = cond <= 1.0 / 3.0 && ws.in_region && t.dominance_ok;
    if cond > 1.0 / 3.0 {
        notes.push(String::from("c3·r̄·n^{-1/2} exceeds 1/3"));
    }
    let bound = marginal::marginal_tv_bound(&MarginalTvInputs {
        c3: 1.0 / problem.mu,
        r_eta_star: r_star,
        dim_a_eta_star: d.p_target,
        r_bar,
        dim_q: t.dim_q,
        n,
        x,
        calibration,
    })?;
    Ok(EioCertificate {
        n_eff: n,
        dims: d,
        r_bar,
        r_star,
        c3,
        condition_value: cond,
        applicable,
        warm_start: ws,
        rho_sep: sep.rho,
        efficient: sep.efficient,
        dim_q: t.dim_q,
        dominance_ok: t.dominance_ok,
        bound,
        notes,
    })
}
