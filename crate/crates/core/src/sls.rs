//! Penalized objectives `f = ℓ − ½‖Gυ‖²` and their smoothness probes.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, PsdOperator, Vector};
use crate::rng;

/// A smooth penalized log-density.
///
/// `hess` returns `−∇²f`, which is positive definite for concave objectives
/// but is not required to be so away from the maximizer.
pub trait SlsModel {
    fn dim(&self) -> usize;
    fn eval(&self, u: &Vector) -> f64;
    fn grad(&self, u: &Vector) -> Vector;
    fn hess(&self, u: &Vector) -> Mat;
    /// Quadratic penalty `G²`.
    fn penalty(&self) -> &PsdOperator;
    /// Unpenalized part `ℓ`, computed independently of `eval`.
    fn smooth_part(&self, u: &Vector) -> f64;

    /// `⟨∇³f(at), w⊗3⟩`. Defaults to central differences.
    fn third(&self, at: &Vector, w: &Vector) -> f64 {
        fd_third(self, at, w)
    }

    /// `⟨∇⁴f(at), w⊗4⟩`. Defaults to central differences.
    fn fourth(&self, at: &Vector, w: &Vector) -> f64 {
        fd_fourth(self, at, w)
    }

    /// Third-order Taylor remainder `δ₃(at, u)`.
    fn remainder3(&self, at: &Vector, u: &Vector) -> f64 {
        bregman3(self, at, u)
    }
}

impl<M: SlsModel + ?Sized> SlsModel for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, u: &Vector) -> f64 {
        (**self).eval(u)
    }
    fn grad(&self, u: &Vector) -> Vector {
        (**self).grad(u)
    }
    fn hess(&self, u: &Vector) -> Mat {
        (**self).hess(u)
    }
    fn penalty(&self) -> &PsdOperator {
        (**self).penalty()
    }
    fn smooth_part(&self, u: &Vector) -> f64 {
        (**self).smooth_part(u)
    }
    fn third(&self, at: &Vector, w: &Vector) -> f64 {
        (**self).third(at, w)
    }
    fn fourth(&self, at: &Vector, w: &Vector) -> f64 {
        (**self).fourth(at, w)
    }
    fn remainder3(&self, at: &Vector, u: &Vector) -> f64 {
        (**self).remainder3(at, u)
    }
}

/// `f(x+u) − f(x) − ⟨∇f(x),u⟩ − ½⟨∇²f(x),u⊗2⟩`.
pub fn bregman3<M: SlsModel + ?Sized>(m: &M, at: &Vector, u: &Vector) -> f64 {
    let h = m.hess(at);
    m.eval(&(at + u)) - m.eval(at) - m.grad(at).dot(u) + 0.5 * u.dot(&(h * u))
}

/// Step used by the directional stencils: `ε^{1/5}·(1 + scale)`.
pub fn fd_step(scale: f64) -> f64 {
    libm::pow(f64::EPSILON, 0.2) * (1.0 + scale)
}

/// Unit direction, length of `w` and stencil step.
fn unit_direction(at: &Vector, w: &Vector) -> (Vector, f64, f64) {
    let s = w.norm();
    let e = if s > 0.0 { w / s } else { w.clone() };
    (e, s, fd_step(at.amax()))
}

/// Third directional derivative by the 4-point central stencil.
pub fn fd_third<M: SlsModel + ?Sized>(m: &M, at: &Vector, w: &Vector) -> f64 {
    let (e, s, h) = unit_direction(at, w);
    if s == 0.0 {
        return 0.0;
    }
    let g = |t: f64| m.eval(&(at + &e * t));
    let d = (g(2.0 * h) - 2.0 * g(h) + 2.0 * g(-h) - g(-2.0 * h)) / (2.0 * h * h * h);
    d * s * s * s
}

/// Fourth directional derivative by the 5-point central stencil.
pub fn fd_fourth<M: SlsModel + ?Sized>(m: &M, at: &Vector, w: &Vector) -> f64 {
    let (e, s, h) = unit_direction(at, w);
    if s == 0.0 {
        return 0.0;
    }
    let g = |t: f64| m.eval(&(at + &e * t));
    let d = (g(2.0 * h) - 4.0 * g(h) + 6.0 * g(0.0) - 4.0 * g(-h) + g(-2.0 * h)) / (h * h * h * h);
    d * s * s * s * s
}

/// Central-difference gradient, used by consistency checks.
pub fn fd_grad<M: SlsModel + ?Sized>(m: &M, at: &Vector) -> Vector {
    let n = at.len();
    let mut g = Vector::zeros(n);
    for i in 0..n {
        let h = libm::cbrt(f64::EPSILON) * (1.0 + libm::fabs(at[i]));
        let mut up = at.clone();
        up[i] += h;
        let mut dn = at.clone();
        dn[i] -= h;
        g[i] = (m.eval(&up) - m.eval(&dn)) / (2.0 * h);
    }
    g
}

/// Central differences of the gradient, returned as `−∇²f`.
pub fn fd_neg_hess<M: SlsModel + ?Sized>(m: &M, at: &Vector) -> Mat {
    let n = at.len();
    let mut h = Mat::zeros(n, n);
    for j in 0..n {
        let step = libm::cbrt(f64::EPSILON) * (1.0 + libm::fabs(at[j]));
        let mut up = at.clone();
        up[j] += step;
        let mut dn = at.clone();
        dn[j] -= step;
        let col = (m.grad(&up) - m.grad(&dn)) / (2.0 * step);
        for i in 0..n {
            h[(i, j)] = -col[i];
        }
    }
    crate::linalg::symmetrize(&h)
}

fn check_penalty(dim: usize, g2: &PsdOperator) -> Result<()> {
    if g2.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: g2.dim(),
        });
    }
    Ok(())
}

/// Linear regression with Gaussian noise and a quadratic penalty.
#[derive(Debug, Clone)]
pub struct LinearGaussian {
    design: Mat,
    y: Vector,
    noise_sd: f64,
    g2: PsdOperator,
    info: PsdOperator,
}

impl LinearGaussian {
    pub fn new(design: Mat, y: Vector, noise_sd: f64, g2: PsdOperator) -> Result<Self> {
        if !(noise_sd > 0.0) {
            return Err(Error::Validation("noise_sd must be positive".into()));
        }
        if y.len() != design.nrows() {
            return Err(Error::DimensionMismatch {
                expected: design.nrows(),
                found: y.len(),
            });
        }
        check_penalty(design.ncols(), &g2)?;
        let info = PsdOperator::from_sym(&(design.transpose() * &design / (noise_sd * noise_sd)))?;
        let total = info.add(&g2)?;
        if !total.is_invertible() {
            return Err(Error::IllPosed(
                "design is rank deficient and the penalty does not regularize it".into(),
            ));
        }
        Ok(Self {
            design,
            y,
            noise_sd,
            g2,
            info,
        })
    }

    pub fn design(&self) -> &Mat {
        &self.design
    }

    pub fn response(&self) -> &Vector {
        &self.y
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    /// `XᵀX/σ²`, the unpenalized information (also the score variance).
    pub fn info(&self) -> &PsdOperator {
        &self.info
    }

    /// `XᵀX/σ² + G²`.
    pub fn penalized_info(&self) -> PsdOperator {
        self.info.add(&self.g2).expect("dimensions checked at construction")
    }

    pub fn with_response(&self, y: Vector) -> Result<Self> {
        if y.len() != self.design.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.design.nrows(),
                found: y.len(),
            });
        }
        Ok(Self { y, ..self.clone() })
    }

    /// Closed-form maximizer `(XᵀX/σ² + G²)⁻¹ Xᵀy/σ²`.
    pub fn maximizer(&self) -> Vector {
        let rhs = self.design.transpose() * &self.y / (self.noise_sd * self.noise_sd);
        self.penalized_info().solve(&rhs).expect("invertibility checked at construction")
    }
}

impl SlsModel for LinearGaussian {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn eval(&self, u: &Vector) -> f64 {
        let r = &self.y - &self.design * u;
        -0.5 * r.norm_squared() / (self.noise_sd * self.noise_sd) - 0.5 * self.g2.quad_form(u)
    }

    fn grad(&self, u: &Vector) -> Vector {
        let r = &self.y - &self.design * u;
        self.design.transpose() * r / (self.noise_sd * self.noise_sd) - self.g2.apply(u)
    }

    fn hess(&self, _u: &Vector) -> Mat {
        self.info.matrix() + self.g2.matrix()
    }

    fn penalty(&self) -> &PsdOperator {
        &self.g2
    }

    fn smooth_part(&self, u: &Vector) -> f64 {
        let mut s = 0.0;
        for i in 0..self.y.len() {
            let r = self.y[i] - self.design.row(i).transpose().dot(u);
            s += r * r;
        }
        -0.5 * s / (self.noise_sd * self.noise_sd)
    }

    fn third(&self, _at: &Vector, _w: &Vector) -> f64 {
        0.0
    }

    fn fourth(&self, _at: &Vector, _w: &Vector) -> f64 {
        0.0
    }

    fn remainder3(&self, _at: &Vector, _u: &Vector) -> f64 {
        0.0
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// Penalized logistic regression.
#[derive(Debug, Clone)]
pub struct Logistic {
    design: Mat,
    labels: Vector,
    g2: PsdOperator,
}

impl Logistic {
    pub fn new(design: Mat, labels: Vector, g2: PsdOperator) -> Result<Self> {
        if labels.len() != design.nrows() {
            return Err(Error::DimensionMismatch {
                expected: design.nrows(),
                found: labels.len(),
            });
        }
        if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::Validation("labels must be 0 or 1".into()));
        }
        check_penalty(design.ncols(), &g2)?;
        Ok(Self { design, labels, g2 })
    }

    pub fn design(&self) -> &Mat {
        &self.design
    }

    pub fn labels(&self) -> &Vector {
        &self.labels
    }

    fn linear(&self, u: &Vector) -> Vector {
        &self.design * u
    }

    /// Expected negative Hessian of `ℓ` at `u` (the Fisher information).
    pub fn fisher(&self, u: &Vector) -> Mat {
        let eta = self.linear(u);
        let mut x = self.design.clone();
        for i in 0..x.nrows() {
            let s = sigmoid(eta[i]);
            x.row_mut(i).scale_mut(libm::sqrt(s * (1.0 - s)));
        }
        x.transpose() * x
    }
}

impl SlsModel for Logistic {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn eval(&self, u: &Vector) -> f64 {
        let eta = self.linear(u);
        let mut s = 0.0;
        for i in 0..eta.len() {
            s += self.labels[i] * eta[i] - softplus(eta[i]);
        }
        s - 0.5 * self.g2.quad_form(u)
    }

    fn grad(&self, u: &Vector) -> Vector {
        let eta = self.linear(u);
        let resid = Vector::from_fn(eta.len(), |i, _| self.labels[i] - sigmoid(eta[i]));
        self.design.transpose() * resid - self.g2.apply(u)
    }

    fn hess(&self, u: &Vector) -> Mat {
        self.fisher(u) + self.g2.matrix()
    }

    fn penalty(&self) -> &PsdOperator {
        &self.g2
    }

    fn smooth_part(&self, u: &Vector) -> f64 {
        let mut s = 0.0;
        for i in 0..self.design.nrows() {
            let eta = self.design.row(i).transpose().dot(u);
            // log σ(η) if y = 1, log(1 − σ(η)) otherwise
            s -= if self.labels[i] == 1.0 {
                softplus(-eta)
            } else {
                softplus(eta)
            };
        }
        s
    }

    fn third(&self, at: &Vector, w: &Vector) -> f64 {
        let eta = self.linear(at);
        let xw = &self.design * w;
        let mut s = 0.0;
        for i in 0..eta.len() {
            let p = sigmoid(eta[i]);
            s -= p * (1.0 - p) * (1.0 - 2.0 * p) * xw[i] * xw[i] * xw[i];
        }
        s
    }

    fn fourth(&self, at: &Vector, w: &Vector) -> f64 {
        let eta = self.linear(at);
        let xw = &self.design * w;
        let mut s = 0.0;
        for i in 0..eta.len() {
            let p = sigmoid(eta[i]);
            let a = xw[i] * xw[i];
            s -= p * (1.0 - p) * (1.0 - 6.0 * p + 6.0 * p * p) * a * a;
        }
        s
    }
}

/// One term `coef · Π u_i^{powers_i}` of a polynomial log-density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Polynomial smooth part with a quadratic penalty.
///
/// Mostly useful for fixtures: Taylor remainders and directional derivatives
/// are exact.
#[derive(Debug, Clone)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
    g2: PsdOperator,
}

fn powi(x: f64, k: u32) -> f64 {
    let mut r = 1.0;
    for _ in 0..k {
        r *= x;
    }
    r
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>, g2: PsdOperator) -> Result<Self> {
        let dim = g2.dim();
        for t in &terms {
            if t.powers.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.powers.len(),
                });
            }
        }
        Ok(Self { dim, terms, g2 })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    fn partial(&self, u: &Vector, idx: &[usize]) -> f64 {
        let mut total = 0.0;
        for t in &self.terms {
            let mut v = t.coef;
            for i in 0..self.dim {
                let m = idx.iter().filter(|&&k| k == i).count() as u32;
                let p = t.powers[i];
                if m > p {
                    v = 0.0;
                    break;
                }
                let mut ff = 1.0;
                for k in 0..m {
                    ff *= (p - k) as f64;
                }
                v *= ff * powi(u[i], p - m);
            }
            total += v;
        }
        total
    }

    /// Taylor coefficients of `t ↦ ℓ(at + t·w)`.
    pub fn directional_coeffs(&self, at: &Vector, w: &Vector) -> Vec<f64> {
        let deg = self
            .terms
            .iter()
            .map(|t| t.powers.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0);
        let mut out = alloc::vec![0.0; deg + 1];
        for t in &self.terms {
            let mut poly = alloc::vec![t.coef];
            for i in 0..self.dim {
                for _ in 0..t.powers[i] {
                    let mut next = alloc::vec![0.0; poly.len() + 1];
                    for (k, &c) in poly.iter().enumerate() {
                        next[k] += c * at[i];
                        next[k + 1] += c * w[i];
                    }
                    poly = next;
                }
            }
            for (k, c) in poly.into_iter().enumerate() {
                out[k] += c;
            }
        }
        out
    }
}

impl SlsModel for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, u: &Vector) -> f64 {
        self.partial(u, &[]) - 0.5 * self.g2.quad_form(u)
    }

    fn grad(&self, u: &Vector) -> Vector {
        Vector::from_fn(self.dim, |i, _| self.partial(u, &[i])) - self.g2.apply(u)
    }

    fn hess(&self, u: &Vector) -> Mat {
        let d2 = Mat::from_fn(self.dim, self.dim, |i, j| -self.partial(u, &[i, j]));
        d2 + self.g2.matrix()
    }

    fn penalty(&self) -> &PsdOperator {
        &self.g2
    }

    fn smooth_part(&self, u: &Vector) -> f64 {
        let mut s = 0.0;
        for t in &self.terms {
            let mut v = t.coef;
            for (i, &p) in t.powers.iter().enumerate() {
                v *= libm::pow(u[i], p as f64);
            }
            s += v;
        }
        s
    }

    fn third(&self, at: &Vector, w: &Vector) -> f64 {
        self.directional_coeffs(at, w).get(3).copied().unwrap_or(0.0) * 6.0
    }

    fn fourth(&self, at: &Vector, w: &Vector) -> f64 {
        self.directional_coeffs(at, w).get(4).copied().unwrap_or(0.0) * 24.0
    }

    fn remainder3(&self, at: &Vector, u: &Vector) -> f64 {
        self.directional_coeffs(at, u).iter().skip(3).sum()
    }
}

/// Sampling policy for sup-type smoothness estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub n_directions: usize,
    pub shells: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            n_directions: 512,
            shells: 8,
            seed: 0,
        }
    }
}

/// Directions `w` with `‖Dw‖ = 1`, where `d2 = D²`.
///
/// The first `2·dim` are `±` the principal axes of `D`; the rest are
/// Gaussian directions drawn from independent streams `(seed, k)`.
pub fn probe_directions(d2: &PsdOperator, n_directions: usize, seed: u64) -> Result<Vec<Vector>> {
    let dinv = d2.inv_sqrt()?;
    let n = d2.dim();
    let mut out = Vec::with_capacity(n_directions);
    let (vals, vecs) = d2.spectral();
    'axes: for sign in [1.0, -1.0] {
        for k in 0..n {
            if out.len() == n_directions {
                break 'axes;
            }
            let v = vecs.column(k) * (sign / libm::sqrt(vals[k]));
            out.push(v);
        }
    }
    let mut k = out.len() as u64;
    while out.len() < n_directions {
        let mut r = rng::stream(seed, k);
        let s = rng::normal_vector(&mut r, n);
        let norm = s.norm();
        if norm > 0.0 {
            out.push(dinv.apply(&(s / norm)));
        }
        k += 1;
    }
    Ok(out)
}

/// Result of [`estimate_omega`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaEstimate {
    pub omega_hat: f64,
    pub argmax: Vec<f64>,
    pub n_directions: usize,
    pub shells: usize,
}

fn check_center<M: SlsModel + ?Sized>(model: &M, center: &Vector, d2: &PsdOperator) -> Result<()> {
    if center.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: center.len(),
        });
    }
    if d2.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: d2.dim(),
        });
    }
    Ok(())
}

/// Lower estimate of `ω = sup_{‖Du‖≤r} 2|δ₃(center,u)|/‖Du‖²`.
///
/// Each direction is probed on `shells` equally spaced radii up to `radius`.
pub fn estimate_omega<M: SlsModel + ?Sized>(
    model: &M,
    center: &Vector,
    d2: &PsdOperator,
    radius: f64,
    cfg: &ProbeConfig,
) -> Result<OmegaEstimate> {
    check_center(model, center, d2)?;
    if !(radius > 0.0) {
        return Err(Error::Validation("probe radius must be positive".into()));
    }
    let dirs = probe_directions(d2, cfg.n_directions, cfg.seed)?;
    let shells = cfg.shells.max(1);
    let mut best = 0.0_f64;
    let mut argmax = Vector::zeros(center.len());
    for (k, w) in dirs.iter().enumerate() {
        for j in 1..=shells {
            let t = radius * j as f64 / shells as f64;
            let u = w * t;
            let d3 = model.remainder3(center, &u);
            if !d3.is_finite() {
                return Err(Error::ProbeFailure {
                    index: k,
                    direction: w.iter().copied().collect(),
                });
            }
            let v = 2.0 * libm::fabs(d3) / (t * t);
            if v > best {
                best = v;
                argmax = u;
            }
        }
    }
    Ok(OmegaEstimate {
        omega_hat: best,
        argmax: argmax.iter().copied().collect(),
        n_directions: dirs.len(),
        shells,
    })
}

/// Estimated third/fourth order smoothness constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfConcordance {
    /// `max |∇³f[w⊗3]|` over `‖Dw‖ = 1`.
    pub tau3_hat: f64,
    /// `max |∇⁴f[w⊗4]|` over `‖Dw‖ = 1`.
    pub tau4_hat: f64,
    /// `τ₃·n^{1/2}`.
    pub c3_hat: f64,
    /// `τ₄·n`.
    pub c4_hat: f64,
}

fn finite_or_instability(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Instability(alloc::format!(
            "non-finite {what} directional derivative"
        )))
    }
}

/// Third/fourth directional derivatives at `center` over the probe directions.
pub fn estimate_self_concordance<M: SlsModel + ?Sized>(
    model: &M,
    center: &Vector,
    d2: &PsdOperator,
    n: f64,
    cfg: &ProbeConfig,
) -> Result<SelfConcordance> {
    check_center(model, center, d2)?;
    if !(n > 0.0) {
        return Err(Error::Validation("n must be positive".into()));
    }
    if !(fd_step(center.amax()) > f64::MIN_POSITIVE) {
        return Err(Error::Instability("finite-difference step underflow".into()));
    }
    let dirs = probe_directions(d2, cfg.n_directions, cfg.seed)?;
    let mut t3 = 0.0_f64;
    let mut t4 = 0.0_f64;
    for w in &dirs {
        t3 = t3.max(libm::fabs(finite_or_instability(model.third(center, w), "third")?));
        t4 = t4.max(libm::fabs(finite_or_instability(model.fourth(center, w), "fourth")?));
    }
    Ok(SelfConcordance {
        tau3_hat: t3,
        tau4_hat: t4,
        c3_hat: t3 * libm::sqrt(n),
        c4_hat: t4 * n,
    })
}

/// Like [`estimate_self_concordance`] but taking the sup over base points in
/// the whole vicinity `{center + u : ‖Du‖ ≤ radius}`.
///
/// Base points sit on the probe shells; at each one the derivative is taken
/// along the shell direction and along the next direction in the list.
pub fn estimate_tau_vicinity<M: SlsModel + ?Sized>(
    model: &M,
    center: &Vector,
    d2: &PsdOperator,
    radius: f64,
    n: f64,
    cfg: &ProbeConfig,
) -> Result<SelfConcordance> {
    let at_center = estimate_self_concordance(model, center, d2, n, cfg)?;
    let dirs = probe_directions(d2, cfg.n_directions, cfg.seed)?;
    let shells = cfg.shells.max(1);
    let mut t3 = at_center.tau3_hat;
    let mut t4 = at_center.tau4_hat;
    for (k, w) in dirs.iter().enumerate() {
        let other = &dirs[(k + 1) % dirs.len()];
        for j in 1..=shells {
            let base = center + w * (radius * j as f64 / shells as f64);
            for v in [w, other] {
                t3 = t3.max(libm::fabs(finite_or_instability(model.third(&base, v), "third")?));
                t4 = t4.max(libm::fabs(finite_or_instability(model.fourth(&base, v), "fourth")?));
            }
        }
    }
    Ok(SelfConcordance {
        tau3_hat: t3,
        tau4_hat: t4,
        c3_hat: t3 * libm::sqrt(n),
        c4_hat: t4 * n,
    })
}

/// All smoothness estimates for one center, metric and radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessProbe {
    pub center: Vec<f64>,
    /// `D²`, the shaping matrix of the vicinity.
    pub local_metric: PsdOperator,
    pub radius: f64,
    pub n_directions: usize,
    pub seed: u64,
    pub omega_hat: f64,
    pub tau3_hat: f64,
    pub tau4_hat: f64,
    pub c3_hat: f64,
    pub c4_hat: f64,
}

impl SmoothnessProbe {
    pub fn run<M: SlsModel + ?Sized>(
        model: &M,
        center: &Vector,
        d2: &PsdOperator,
        radius: f64,
        n: f64,
        cfg: &ProbeConfig,
    ) -> Result<Self> {
        let omega = estimate_omega(model, center, d2, radius, cfg)?;
        let sc = estimate_self_concordance(model, center, d2, n, cfg)?;
        Ok(Self {
            center: center.iter().copied().collect(),
            local_metric: d2.clone(),
            radius,
            n_directions: omega.n_directions,
            seed: cfg.seed,
            omega_hat: omega.omega_hat,
            tau3_hat: sc.tau3_hat,
            tau4_hat: sc.tau4_hat,
            c3_hat: sc.c3_hat,
            c4_hat: sc.c4_hat,
        })
    }
}
