//! Marginal posteriors of a target `θ` under a nuisance `η`: profiles,
//! separability, orthogonalization and the mixture-of-normals approximation.
//!
//! The full parameter is `υ = (θ, η)` with `θ` in the first `p` coordinates.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss_compare::{ball_cdf, BALL_MC_SAMPLES};
use crate::linalg::{self, BlockOperator, Mat, PsdOperator, Vector};
use crate::pmle::{fit, FitOptions};
use crate::sls::SlsModel;

pub const DEFAULT_NUISANCE_RESOLUTION: usize = 21;

fn join(theta: &Vector, eta: &Vector) -> Vector {
    let mut v = Vector::zeros(theta.len() + eta.len());
    v.rows_mut(0, theta.len()).copy_from(theta);
    v.rows_mut(theta.len(), eta.len()).copy_from(eta);
    v
}

fn split(u: &Vector, p: usize) -> (Vector, Vector) {
    (u.rows(0, p).into_owned(), u.rows(p, u.len() - p).into_owned())
}

/// `θ ↦ f(θ, η)` for a fixed nuisance value.
pub struct Slice<'a, M: SlsModel + ?Sized> {
    model: &'a M,
    eta: Vector,
    penalty: PsdOperator,
}

impl<'a, M: SlsModel + ?Sized> Slice<'a, M> {
    pub fn new(model: &'a M, p: usize, eta: &Vector) -> Result<Self> {
        if p == 0 || p + eta.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: p + eta.len(),
            });
        }
        let g = model.penalty().matrix().view((0, 0), (p, p)).into_owned();
        Ok(Self {
            model,
            eta: eta.clone(),
            penalty: PsdOperator::from_sym(&g)?,
        })
    }

    fn lift(&self, w: &Vector) -> Vector {
        join(w, &Vector::zeros(self.eta.len()))
    }

    fn p(&self) -> usize {
        self.penalty.dim()
    }
}

impl<M: SlsModel + ?Sized> SlsModel for Slice<'_, M> {
    fn dim(&self) -> usize {
        self.p()
    }

    fn eval(&self, u: &Vector) -> f64 {
        self.model.eval(&join(u, &self.eta))
    }

    fn grad(&self, u: &Vector) -> Vector {
        self.model.grad(&join(u, &self.eta)).rows(0, self.p()).into_owned()
    }

    fn hess(&self, u: &Vector) -> Mat {
        let p = self.p();
        self.model.hess(&join(u, &self.eta)).view((0, 0), (p, p)).into_owned()
    }

    fn penalty(&self) -> &PsdOperator {
        &self.penalty
    }

    fn smooth_part(&self, u: &Vector) -> f64 {
        self.eval(u) + 0.5 * self.penalty.quad_form(u)
    }

    fn third(&self, at: &Vector, w: &Vector) -> f64 {
        self.model.third(&join(at, &self.eta), &self.lift(w))
    }

    fn fourth(&self, at: &Vector, w: &Vector) -> f64 {
        self.model.fourth(&join(at, &self.eta), &self.lift(w))
    }

    fn remainder3(&self, at: &Vector, u: &Vector) -> f64 {
        self.model.remainder3(&join(at, &self.eta), &self.lift(u))
    }
}

/// Quantities of the global maximizer that every profile is measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReference {
    pub ups_star: Vector,
    pub f_star: f64,
    /// `F = −∇²_θθ f(υ*)`.
    pub f_tt: PsdOperator,
    pub p: usize,
}

impl ProfileReference {
    pub fn new<M: SlsModel + ?Sized>(model: &M, ups_star: &Vector, p: usize) -> Result<Self> {
        let h = model.hess(ups_star);
        let f_tt = PsdOperator::from_sym(&h.view((0, 0), (p, p)).into_owned())?;
        Ok(Self {
            ups_star: ups_star.clone(),
            f_star: model.eval(ups_star),
            f_tt,
            p,
        })
    }

    pub fn theta_star(&self) -> Vector {
        split(&self.ups_star, self.p).0
    }

    pub fn eta_star(&self) -> Vector {
        split(&self.ups_star, self.p).1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceProfile {
    pub eta: Vec<f64>,
    pub theta_eta: Vec<f64>,
    /// `F_η = −∇²_θθ f(θ_η, η)`.
    pub f_eta: PsdOperator,
    /// `f(θ_η, η) − f(υ*)`.
    pub phi_eta: f64,
    /// `½ log det(F_η⁻¹ F)`.
    pub delta_eta: f64,
    /// `exp(φ_η + δ_η)`.
    pub weight: f64,
}

/// `½ log det(F_η⁻¹F)` from the spectrum of `F_η^{-1/2} F F_η^{-1/2}`.
pub fn half_logdet_ratio(f_eta: &PsdOperator, f: &PsdOperator) -> Result<f64> {
    let m = f.congruence(f_eta.inv_sqrt()?.matrix())?;
    let mut s = 0.0;
    for l in m.eigenvalues() {
        if *l <= 0.0 {
            return Err(Error::Singular { eigenvalue: *l });
        }
        s += libm::log(*l);
    }
    Ok(0.5 * s)
}

/// Maximize `f(·, η)` starting from `warm`.
pub fn profile<M: SlsModel + ?Sized>(
    model: &M,
    eta: &Vector,
    warm: &Vector,
    reference: &ProfileReference,
) -> Result<NuisanceProfile> {
    let slice = Slice::new(model, reference.p, eta)?;
    let divergence = || Error::ProfileDivergence {
        eta: eta.iter().copied().collect(),
    };
    let res = fit(&slice, warm, &FitOptions::default()).map_err(|_| divergence())?;
    if !res.converged {
        return Err(divergence());
    }
    let theta = res.maximizer;
    let f_eta = PsdOperator::from_sym(&slice.hess(&theta)).map_err(|_| divergence())?;
    let phi = res.objective_at_max - reference.f_star;
    let delta = half_logdet_ratio(&f_eta, &reference.f_tt)?;
    Ok(NuisanceProfile {
        eta: eta.iter().copied().collect(),
        theta_eta: theta.iter().copied().collect(),
        f_eta,
        phi_eta: phi,
        delta_eta: delta,
        weight: libm::exp(phi + delta),
    })
}

/// `θ* − F_θθ⁻¹F_θη(η − η*)`, the linear prediction of `θ_η` used as warm start.
pub fn linear_warm_start(f: &BlockOperator, reference: &ProfileReference, eta: &Vector) -> Result<Vector> {
    let shift = f.te() * (eta - reference.eta_star());
    let step = linalg::spd_solve(f.tt(), &shift).ok_or(Error::Singular {
        eigenvalue: linalg::min_eigenvalue(f.tt()),
    })?;
    Ok(reference.theta_star() - step)
}

/// Tensor grid of cell centres with their volumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceGrid {
    pub points: Vec<Vec<f64>>,
    pub volumes: Vec<f64>,
}

/// `resolution` midpoint cells per axis over `center ± half_widths`.
pub fn nuisance_grid(center: &Vector, half_widths: &[f64], resolution: usize) -> Result<NuisanceGrid> {
    let q = center.len();
    if q == 0 || half_widths.len() != q {
        return Err(Error::EmptyGrid);
    }
    if resolution == 0 || half_widths.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Validation("nuisance grid needs positive widths and resolution".into()));
    }
    let h: Vec<f64> = half_widths.iter().map(|w| 2.0 * w / resolution as f64).collect();
    let vol: f64 = h.iter().product();
    let total = resolution.pow(q as u32);
    let mut points = Vec::with_capacity(total);
    for mut flat in 0..total {
        let mut pt = vec![0.0; q];
        for k in (0..q).rev() {
            let i = flat % resolution;
            flat /= resolution;
            pt[k] = center[k] - half_widths[k] + (i as f64 + 0.5) * h[k];
        }
        points.push(pt);
    }
    Ok(NuisanceGrid {
        volumes: vec![vol; points.len()],
        points,
    })
}

/// Grid over the nuisance projection of `{‖D(υ−υ*)‖ ≤ ν⁻¹r}`: half-width
/// `ν⁻¹r·√(D⁻²)_kk` on nuisance axis `k`.
pub fn concentration_nuisance_grid(
    d2: &PsdOperator,
    reference: &ProfileReference,
    radius: f64,
    resolution: usize,
) -> Result<NuisanceGrid> {
    let inv = d2.inverse()?;
    let p = reference.p;
    let eta_star = reference.eta_star();
    let hw: Vec<f64> = (0..eta_star.len())
        .map(|k| radius * libm::sqrt(inv.matrix()[(p + k, p + k)]))
        .collect();
    nuisance_grid(&eta_star, &hw, resolution)
}

/// Profiles over every point of `grid`, warm-started from the linear prediction.
pub fn profile_grid<M: SlsModel + ?Sized>(
    model: &M,
    reference: &ProfileReference,
    grid: &NuisanceGrid,
) -> Result<Vec<NuisanceProfile>> {
    let f = BlockOperator::from_full(&model.hess(&reference.ups_star), reference.p)?;
    grid.points
        .iter()
        .map(|pt| {
            let eta = Vector::from_column_slice(pt);
            let warm = linear_warm_start(&f, reference, &eta)?;
            profile(model, &eta, &warm, reference)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separability {
    /// `‖F_θθ^{-1/2} F_θη F_ηη⁻¹ F_ηθ F_θθ^{-1/2}‖`.
    pub rho: f64,
    /// `F̆ = F_θθ − F_θη F_ηη⁻¹ F_ηθ`.
    pub efficient: PsdOperator,
    /// `(1−ρ)F_θθ ⪯ F̆ ⪯ F_θθ`.
    pub sandwich_ok: bool,
}

pub fn separability(f: &BlockOperator) -> Result<Separability> {
    let tt = PsdOperator::from_sym(f.tt())?;
    let c = f.nuisance_coupling()?;
    let inner = PsdOperator::from_sym(&linalg::symmetrize(&(f.te() * &c)))?;
    let rho = inner.congruence(tt.inv_sqrt()?.matrix())?.max_eigenvalue();
    let efficient = PsdOperator::from_sym(&linalg::symmetrize(&(f.tt() - inner.matrix())))?;
    let lower = tt.matrix() * (1.0 - rho);
    let sandwich_ok = linalg::psd_leq(&lower, efficient.matrix()) && linalg::psd_leq(efficient.matrix(), tt.matrix());
    Ok(Separability {
        rho,
        efficient,
        sandwich_ok,
    })
}

/// `f̆(θ, ν) = f(θ, ν − C(θ−θ*))`, with `C = F_ηη⁻¹F_ηθ`.
///
/// Implemented as the linear reparametrization `υ = L·u + b`.
pub struct Orthogonalized<'a, M: SlsModel + ?Sized> {
    model: &'a M,
    l: Mat,
    b: Vector,
    coupling: Mat,
    penalty: PsdOperator,
}

pub fn orthogonalize<'a, M: SlsModel + ?Sized>(
    model: &'a M,
    ups_star: &Vector,
    f: &BlockOperator,
) -> Result<Orthogonalized<'a, M>> {
    let (p, q) = f.dims();
    if p + q != model.dim() || ups_star.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: p + q,
        });
    }
    let c = f.nuisance_coupling()?;
    let mut l = Mat::identity(p + q, p + q);
    l.view_mut((p, 0), (q, p)).copy_from(&(-&c));
    let theta_star = ups_star.rows(0, p).into_owned();
    let mut b = Vector::zeros(p + q);
    b.rows_mut(p, q).copy_from(&(&c * theta_star));
    let penalty = model.penalty().congruence(&l.transpose())?;
    Ok(Orthogonalized {
        model,
        l,
        b,
        coupling: c,
        penalty,
    })
}

impl<M: SlsModel + ?Sized> Orthogonalized<'_, M> {
    /// `C = F_ηη⁻¹F_ηθ`.
    pub fn coupling(&self) -> &Mat {
        &self.coupling
    }

    /// Original coordinates of the transformed point `u`.
    pub fn to_original(&self, u: &Vector) -> Vector {
        &self.l * u + &self.b
    }

    /// Transformed coordinates `(θ, η + C(θ−θ*))` of an original point.
    pub fn from_original(&self, ups: &Vector) -> Vector {
        let p = ups.len() - self.coupling.nrows();
        let mut u = ups.clone();
        let shift = &self.coupling * ups.rows(0, p) - self.b.rows(p, self.coupling.nrows());
        let mut tail = u.rows_mut(p, self.coupling.nrows());
        tail += shift;
        u
    }
}

impl<M: SlsModel + ?Sized> SlsModel for Orthogonalized<'_, M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn eval(&self, u: &Vector) -> f64 {
        self.model.eval(&self.to_original(u))
    }

    fn grad(&self, u: &Vector) -> Vector {
        self.l.transpose() * self.model.grad(&self.to_original(u))
    }

    fn hess(&self, u: &Vector) -> Mat {
        self.l.transpose() * self.model.hess(&self.to_original(u)) * &self.l
    }

    fn penalty(&self) -> &PsdOperator {
        &self.penalty
    }

    fn smooth_part(&self, u: &Vector) -> f64 {
        self.eval(u) + 0.5 * self.penalty.quad_form(u)
    }

    fn third(&self, at: &Vector, w: &Vector) -> f64 {
        self.model.third(&self.to_original(at), &(&self.l * w))
    }

    fn fourth(&self, at: &Vector, w: &Vector) -> f64 {
        self.model.fourth(&self.to_original(at), &(&self.l * w))
    }

    fn remainder3(&self, at: &Vector, u: &Vector) -> f64 {
        self.model.remainder3(&self.to_original(at), &(&self.l * u))
    }
}

/// Profiles with quadrature weights and the target projection `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureMarginal {
    pub profiles: Vec<NuisanceProfile>,
    /// Row-major `k × p`.
    pub q: Vec<Vec<f64>>,
    /// Homogenized precision, usually `F̆`.
    pub f_ref: PsdOperator,
    pub quadrature_weights: Vec<f64>,
    pub theta_star: Vec<f64>,
}

impl MixtureMarginal {
    pub fn new(
        profiles: Vec<NuisanceProfile>,
        q: &Mat,
        f_ref: PsdOperator,
        quadrature_weights: Vec<f64>,
        theta_star: &Vector,
    ) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if quadrature_weights.len() != profiles.len() {
            return Err(Error::DimensionMismatch {
                expected: profiles.len(),
                found: quadrature_weights.len(),
            });
        }
        Ok(Self {
            profiles,
            q: (0..q.nrows()).map(|i| q.row(i).iter().copied().collect()).collect(),
            f_ref,
            quadrature_weights,
            theta_star: theta_star.iter().copied().collect(),
        })
    }

    pub fn q_matrix(&self) -> Mat {
        let k = self.q.len();
        let p = self.theta_star.len();
        Mat::from_fn(k, p, |i, j| self.q[i][j])
    }

    /// Normalized mixture weights `w_η·vol_η / Σ`.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let raw: Vec<f64> = self
            .profiles
            .iter()
            .zip(&self.quadrature_weights)
            .map(|(p, v)| p.weight * v)
            .collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|w| w / s).collect()
    }

    /// Mixture probabilities `P(‖Q(X − θ*)‖ ≤ r)` at each radius.
    pub fn cdf(&self, radii: &[f64], n_mc: usize, seed: u64) -> Result<Vec<f64>> {
        let q = self.q_matrix();
        let theta_star = Vector::from_column_slice(&self.theta_star);
        let mut out = vec![0.0; radii.len()];
        for (prof, w) in self.profiles.iter().zip(self.normalized_weights()) {
            let shift = Vector::from_column_slice(&prof.theta_eta) - &theta_star;
            let probs = ball_cdf(&q, &shift, &prof.f_eta.inverse()?, radii, n_mc, seed)?;
            for (o, p) in out.iter_mut().zip(probs) {
                *o += w * p;
            }
        }
        Ok(out)
    }

    /// `P(‖Qγ‖ ≤ r)` for `γ ~ N(0, F_ref⁻¹)`.
    pub fn reference_cdf(&self, radii: &[f64], n_mc: usize, seed: u64) -> Result<Vec<f64>> {
        let q = self.q_matrix();
        let zero = Vector::zeros(self.theta_star.len());
        ball_cdf(&q, &zero, &self.f_ref.inverse()?, radii, n_mc, seed)
    }

    /// Mean and covariance of the mixture law of `θ`.
    pub fn moments(&self) -> Result<(Vector, Mat)> {
        let p = self.theta_star.len();
        let w = self.normalized_weights();
        let mut mean = Vector::zeros(p);
        for (prof, wi) in self.profiles.iter().zip(&w) {
            mean += Vector::from_column_slice(&prof.theta_eta) * *wi;
        }
        let mut cov = Mat::zeros(p, p);
        for (prof, wi) in self.profiles.iter().zip(&w) {
            let e = Vector::from_column_slice(&prof.theta_eta) - &mean;
            cov += (prof.f_eta.inverse()?.matrix() + &e * e.transpose()) * *wi;
        }
        Ok((mean, cov))
    }
}

/// Mixture `P(‖Q(θ_η − θ* + F_η^{-1/2}γ)‖ ≤ r)` at a single radius.
pub fn mixture_marginal(mixture: &MixtureMarginal, r: f64, seed: u64) -> Result<f64> {
    Ok(mixture.cdf(&[r], BALL_MC_SAMPLES, seed)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Homogenization {
    pub delta_f: f64,
    /// `δ⁺/(1−δ⁺)·tr(QF⁻¹Qᵀ)/‖QF⁻¹Qᵀ‖_Fr` with the measured `δ⁺`.
    pub bound: f64,
    /// `max_η ‖F^{-1/2}F_ηF^{-1/2} − I‖`.
    pub delta_plus: f64,
}

pub fn homogenization_error(mixture: &MixtureMarginal) -> Result<Homogenization> {
    let q = mixture.q_matrix();
    let f_inv = mixture.f_ref.inverse()?;
    let base = &q * f_inv.matrix() * q.transpose();
    let nb = linalg::sym_norms(&base);
    let root = mixture.f_ref.inv_sqrt()?;
    let mut delta_f = 0.0;
    let mut delta_plus = 0.0_f64;
    for (prof, w) in mixture.profiles.iter().zip(mixture.normalized_weights()) {
        let diff = &q * (f_inv.matrix() - prof.f_eta.inverse()?.matrix()) * q.transpose();
        delta_f += w * linalg::sym_norms(&diff).nuclear;
        let rel = prof.f_eta.congruence(root.matrix())?.matrix() - Mat::identity(f_inv.dim(), f_inv.dim());
        delta_plus = delta_plus.max(linalg::sym_norms(&rel).operator_norm);
    }
    let bound = if delta_plus < 1.0 {
        delta_plus / (1.0 - delta_plus) * linalg::trace(&base) / nb.frobenius
    } else {
        f64::INFINITY
    };
    Ok(Homogenization {
        delta_f: delta_f / nb.frobenius,
        bound,
        delta_plus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTargetDim {
    /// `tr B_Q`, `B_Q = QF̆⁻¹Qᵀ/‖QF̆⁻¹Qᵀ‖`.
    pub dim_q: f64,
    pub frobenius_sq: f64,
    pub dominance_ok: bool,
}

/// `dimQ` and the dominance check `tr B_Q² ≥ C₀² tr B_Q`.
pub fn target_dimension(q: &Mat, f_breve: &PsdOperator, c0: f64) -> Result<EffectiveTargetDim> {
    let m = q * f_breve.inverse()?.matrix() * q.transpose();
    let n = linalg::sym_norms(&m);
    if !(n.operator_norm > 0.0) {
        return Err(Error::Precondition("QF̆⁻¹Qᵀ vanishes".into()));
    }
    let b = m / n.operator_norm;
    let dim_q = linalg::trace(&b);
    let fr2 = libm::pow(linalg::sym_norms(&b).frobenius, 2.0);
    Ok(EffectiveTargetDim {
        dim_q,
        frobenius_sq: fr2,
        dominance_ok: fr2 >= c0 * c0 * dim_q * (1.0 - 1e-12),
    })
}

pub const DEFAULT_DOMINANCE_C0: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalTvBound {
    /// `c₃ r_{η*} dimA_{η*}/√n`.
    pub profile_term: f64,
    /// `c₃ r̄ √dimQ/√n`.
    pub target_term: f64,
    /// `c₃² r̄⁴/(n√dimQ)`.
    pub quadratic_term: f64,
    /// `e^{-x}`.
    pub tail_term: f64,
    /// Sum of the four terms.
    pub pre_constant: f64,
    /// `C·(first three) + e^{-x}`.
    pub total: f64,
    pub calibration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalTvInputs {
    pub c3: f64,
    pub r_eta_star: f64,
    pub dim_a_eta_star: f64,
    pub r_bar: f64,
    pub dim_q: f64,
    pub n: f64,
    pub x: f64,
    pub calibration: f64,
}

pub fn marginal_tv_bound(i: &MarginalTvInputs) -> Result<MarginalTvBound> {
    if !(i.n > 0.0 && i.dim_q > 0.0) {
        return Err(Error::Validation("n and dimQ must be positive".into()));
    }
    let sn = libm::sqrt(i.n);
    let sq = libm::sqrt(i.dim_q);
    let t1 = i.c3 * i.r_eta_star * i.dim_a_eta_star / sn;
    let t2 = i.c3 * i.r_bar * sq / sn;
    let t3 = i.c3 * i.c3 * libm::pow(i.r_bar, 4.0) / (i.n * sq);
    let t4 = libm::exp(-i.x);
    Ok(MarginalTvBound {
        profile_term: t1,
        target_term: t2,
        quadratic_term: t3,
        tail_term: t4,
        pre_constant: t1 + t2 + t3 + t4,
        total: i.calibration * (t1 + t2 + t3) + t4,
        calibration: i.calibration,
    })
}

/// Checked variant: fails when `tr B_Q² < C₀² tr B_Q`.
pub fn marginal_tv_bound_checked(
    i: &MarginalTvInputs,
    q: &Mat,
    f_breve: &PsdOperator,
    c0: f64,
) -> Result<MarginalTvBound> {
    let t = target_dimension(q, f_breve, c0)?;
    if !t.dominance_ok {
        return Err(Error::Precondition(alloc::format!(
            "tr B² = {} below C₀²·tr B = {}",
            t.frobenius_sq,
            c0 * c0 * t.dim_q
        )));
    }
    marginal_tv_bound(&MarginalTvInputs { dim_q: t.dim_q, ..*i })
}

/// `C₀²ν⁻¹r_{η*} + 𝕓`.
pub fn marginal_concentration(r_eta_star: f64, nu: f64, c0: f64, bias_sup: f64) -> f64 {
    c0 * c0 * r_eta_star / nu + bias_sup
}

/// `max_η ‖D(θ_η − θ*)‖` over the profiles, with `d2 = D²` on the target block.
pub fn bias_sup(profiles: &[NuisanceProfile], d2: &PsdOperator, theta_star: &Vector) -> f64 {
    profiles
        .iter()
        .map(|p| libm::sqrt(d2.quad_form(&(Vector::from_column_slice(&p.theta_eta) - theta_star))))
        .fold(0.0, f64::max)
}

/// `½(‖F^{1/2}(θ_η−θ*)‖ + √tr B²)`, `B = F_η^{-1/2} F F_η^{-1/2} − I`.
///
/// Display only; `None` when `‖B‖ > 2/3`.
pub fn pinsker_display_bound(f: &PsdOperator, f_eta: &PsdOperator, shift: &Vector) -> Result<Option<f64>> {
    let b = f.congruence(f_eta.inv_sqrt()?.matrix())?.matrix() - Mat::identity(f.dim(), f.dim());
    let n = linalg::sym_norms(&b);
    if n.operator_norm > 2.0 / 3.0 {
        return Ok(None);
    }
    Ok(Some(0.5 * (libm::sqrt(f.quad_form(shift)) + n.frobenius)))
}
