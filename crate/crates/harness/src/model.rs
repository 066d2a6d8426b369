//! Model specifications `{kind, payload}` and their instantiation per seed.

use std::path::{Path, PathBuf};

use lapcert::eio::{self, EioModel, EioProblem, RegressionPriors};
use lapcert::linalg::{Mat, PsdOperator, Vector};
use lapcert::rng;
use lapcert::sls::{Logistic, LinearGaussian, Monomial, Polynomial, SlsModel};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::ingest;

/// Penalty given either as a multiple of the identity or as a full operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PenaltySpec {
    Scalar(f64),
    Operator(PsdOperator),
}

impl PenaltySpec {
    pub fn operator(&self, dim: usize) -> Result<PsdOperator> {
        match self {
            PenaltySpec::Scalar(v) => Ok(PsdOperator::scaled_identity(dim, *v)),
            PenaltySpec::Operator(op) if op.dim() == dim => Ok(op.clone()),
            PenaltySpec::Operator(op) => Err(HarnessError::Model(format!(
                "penalty has dimension {}, model has {dim}",
                op.dim()
            ))),
        }
    }
}

fn default_one() -> f64 {
    1.0
}

fn default_rho() -> f64 {
    eio::DEFAULT_RHO
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSpec {
    /// Design rows.
    pub design: Vec<Vec<f64>>,
    /// Responses; simulated from `truth` when absent.
    #[serde(default)]
    pub y: Option<Vec<f64>>,
    #[serde(default = "default_one")]
    pub noise_sd: f64,
    pub g2: PenaltySpec,
    #[serde(default)]
    pub truth: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeSpec {
    pub n: usize,
    pub p: usize,
    #[serde(default = "default_one")]
    pub noise_sd: f64,
    #[serde(default = "default_one")]
    pub ridge: f64,
    /// Defaults to `υ*_j = 1/j`.
    #[serde(default)]
    pub truth: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogisticSpec {
    pub design: Vec<Vec<f64>>,
    /// 0/1 labels; simulated from `truth` when absent.
    #[serde(default)]
    pub labels: Option<Vec<f64>>,
    pub g2: PenaltySpec,
    #[serde(default)]
    pub truth: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogisticSyntheticSpec {
    pub n: usize,
    pub p: usize,
    #[serde(default = "default_one")]
    pub ridge: f64,
    /// Defaults to `υ*_j = 1/j`.
    #[serde(default)]
    pub truth: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    pub terms: Vec<Monomial>,
    pub g2: PsdOperator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EioSyntheticSpec {
    pub p: usize,
    pub q: usize,
    pub mu: f64,
    /// Scale of the true operator `A = scale·(I + 0.3·N(0,1))`.
    #[serde(default = "default_eio_scale")]
    pub scale: f64,
    #[serde(default = "default_one")]
    pub ridge: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Defaults to `θ_j = 0.5/j`.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
}

fn default_eio_scale() -> f64 {
    5.0
}

/// Feature map applied to every selected `X` column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Basis {
    /// `x`.
    Identity,
    /// `x, x², …, x^degree`.
    Monomial { degree: u32 },
    /// `cos(πx), …, cos(count·πx)`.
    Cosine { count: u32 },
}

impl Basis {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        for &v in x {
            match *self {
                Basis::Identity => out.push(v),
                Basis::Monomial { degree } => out.extend((1..=degree).map(|k| v.powi(k as i32))),
                Basis::Cosine { count } => {
                    out.extend((1..=count).map(|k| (k as f64 * std::f64::consts::PI * v).cos()))
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EioRegressionSpec {
    pub csv: PathBuf,
    pub x_columns: Vec<String>,
    pub y_column: String,
    pub psi: Basis,
    pub phi: Basis,
    pub sigma: f64,
    pub sigma_x: f64,
    #[serde(default = "default_one")]
    pub ridge: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum ModelSpec {
    LinearGaussian(LinearSpec),
    Ridge(RidgeSpec),
    Logistic(LogisticSpec),
    LogisticSynthetic(LogisticSyntheticSpec),
    Polynomial(PolynomialSpec),
    Eio(EioProblem),
    EioSynthetic(EioSyntheticSpec),
    EioRegression(EioRegressionSpec),
}

/// Stream ids under the run seed.
const DESIGN_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const OPERATOR_STREAM: u64 = 3;

pub struct LinearInstance {
    pub model: LinearGaussian,
    pub truth: Option<Vector>,
}

pub struct LogisticInstance {
    pub model: Logistic,
    pub truth: Option<Vector>,
}

pub struct EioInstance {
    pub problem: EioProblem,
    pub model: EioModel,
    /// Regression metadata when the problem came from a CSV file.
    pub ingest: Option<eio::IngestedRegression>,
}

pub enum Instance {
    Linear(LinearInstance),
    Logistic(LogisticInstance),
    Polynomial(Polynomial),
    Eio(Box<EioInstance>),
}

impl Instance {
    pub fn sls(&self) -> &(dyn SlsModel + Sync) {
        match self {
            Instance::Linear(l) => &l.model,
            Instance::Logistic(l) => &l.model,
            Instance::Polynomial(p) => p,
            Instance::Eio(e) => &e.model,
        }
    }
}

fn rows_to_mat(rows: &[Vec<f64>], what: &str) -> Result<Mat> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n == 0 || p == 0 || rows.iter().any(|r| r.len() != p) {
        return Err(HarnessError::Model(format!("{what} must be a nonempty rectangular array")));
    }
    Ok(Mat::from_fn(n, p, |i, j| rows[i][j]))
}

fn default_truth(p: usize, scale: f64) -> Vector {
    Vector::from_fn(p, |j, _| scale / (j + 1) as f64)
}

fn vector_of(v: &[f64], dim: usize, what: &str) -> Result<Vector> {
    if v.len() != dim {
        return Err(HarnessError::Model(format!("{what} has length {}, expected {dim}", v.len())));
    }
    Ok(Vector::from_column_slice(v))
}

fn gaussian_design(seed: u64, n: usize, p: usize) -> Mat {
    let mut r = rng::stream(seed, DESIGN_STREAM);
    let mut m = Mat::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            m[(i, j)] = rng::normal(&mut r);
        }
    }
    m
}

fn simulate_linear(x: &Mat, truth: &Vector, sd: f64, seed: u64) -> Vector {
    let mut r = rng::stream(seed, NOISE_STREAM);
    let mean = x * truth;
    Vector::from_fn(mean.len(), |i, _| mean[i] + sd * rng::normal(&mut r))
}

fn simulate_labels(x: &Mat, truth: &Vector, seed: u64) -> Vector {
    let mut r = rng::stream(seed, NOISE_STREAM);
    let eta = x * truth;
    Vector::from_fn(eta.len(), |i, _| {
        let p = 1.0 / (1.0 + (-eta[i]).exp());
        if rng::uniform(&mut r) < p {
            1.0
        } else {
            0.0
        }
    })
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::LinearGaussian(_) => "linear_gaussian",
            ModelSpec::Ridge(_) => "ridge",
            ModelSpec::Logistic(_) => "logistic",
            ModelSpec::LogisticSynthetic(_) => "logistic_synthetic",
            ModelSpec::Polynomial(_) => "polynomial",
            ModelSpec::Eio(_) => "eio",
            ModelSpec::EioSynthetic(_) => "eio_synthetic",
            ModelSpec::EioRegression(_) => "eio_regression",
        }
    }

    pub(crate) fn resolve_paths(&mut self, base: &Path) {
        if let ModelSpec::EioRegression(r) = self {
            if r.csv.is_relative() {
                r.csv = base.join(&r.csv);
            }
        }
    }

    /// Build the model for one run seed. Synthetic data is drawn from
    /// independent streams of `seed`.
    pub fn instantiate(&self, seed: u64) -> Result<Instance> {
        match self {
            ModelSpec::LinearGaussian(s) => {
                let x = rows_to_mat(&s.design, "design")?;
                let truth = s.truth.as_deref().map(|t| vector_of(t, x.ncols(), "truth")).transpose()?;
                let y = match (&s.y, &truth) {
                    (Some(y), _) => vector_of(y, x.nrows(), "y")?,
                    (None, Some(t)) => simulate_linear(&x, t, s.noise_sd, seed),
                    (None, None) => return Err(HarnessError::Model("linear_gaussian needs y or truth".into())),
                };
                let g2 = s.g2.operator(x.ncols())?;
                Ok(Instance::Linear(LinearInstance {
                    model: LinearGaussian::new(x, y, s.noise_sd, g2)?,
                    truth,
                }))
            }
            ModelSpec::Ridge(s) => {
                let x = gaussian_design(seed, s.n, s.p);
                let truth = match &s.truth {
                    Some(t) => vector_of(t, s.p, "truth")?,
                    None => default_truth(s.p, 1.0),
                };
                let y = simulate_linear(&x, &truth, s.noise_sd, seed);
                Ok(Instance::Linear(LinearInstance {
                    model: LinearGaussian::new(x, y, s.noise_sd, PsdOperator::scaled_identity(s.p, s.ridge))?,
                    truth: Some(truth),
                }))
            }
            ModelSpec::Logistic(s) => {
                let x = rows_to_mat(&s.design, "design")?;
                let truth = s.truth.as_deref().map(|t| vector_of(t, x.ncols(), "truth")).transpose()?;
                let labels = match (&s.labels, &truth) {
                    (Some(l), _) => vector_of(l, x.nrows(), "labels")?,
                    (None, Some(t)) => simulate_labels(&x, t, seed),
                    (None, None) => return Err(HarnessError::Model("logistic needs labels or truth".into())),
                };
                let g2 = s.g2.operator(x.ncols())?;
                Ok(Instance::Logistic(LogisticInstance {
                    model: Logistic::new(x, labels, g2)?,
                    truth,
                }))
            }
            ModelSpec::LogisticSynthetic(s) => {
                let x = gaussian_design(seed, s.n, s.p);
                let truth = match &s.truth {
                    Some(t) => vector_of(t, s.p, "truth")?,
                    None => default_truth(s.p, 1.0),
                };
                let labels = simulate_labels(&x, &truth, seed);
                Ok(Instance::Logistic(LogisticInstance {
                    model: Logistic::new(x, labels, PsdOperator::scaled_identity(s.p, s.ridge))?,
                    truth: Some(truth),
                }))
            }
            ModelSpec::Polynomial(s) => Ok(Instance::Polynomial(Polynomial::new(s.terms.clone(), s.g2.clone())?)),
            ModelSpec::Eio(p) => eio_instance(p.clone(), None),
            ModelSpec::EioSynthetic(s) => eio_instance(synthetic_eio(s, seed)?, None),
            ModelSpec::EioRegression(s) => {
                let data = ingest::read_regression_csv(&s.csv, &s.x_columns, &s.y_column)?;
                let p = s.psi.eval(&data.x[0]).len();
                let psi = |x: &[f64]| s.psi.eval(x);
                let phi = |x: &[f64]| s.phi.eval(x);
                let ing = eio::ingest_regression(
                    &data.x,
                    &data.y,
                    &psi,
                    &phi,
                    s.sigma,
                    s.sigma_x,
                    RegressionPriors {
                        g2: PsdOperator::scaled_identity(p, s.ridge),
                        g02: None,
                        k2: None,
                        rho: s.rho,
                    },
                )?;
                eio_instance(ing.problem.clone(), Some(ing))
            }
        }
    }
}

fn eio_instance(problem: EioProblem, ingest: Option<eio::IngestedRegression>) -> Result<Instance> {
    Ok(Instance::Eio(Box::new(EioInstance {
        model: EioModel::new(problem.clone())?,
        problem,
        ingest,
    })))
}

fn synthetic_eio(s: &EioSyntheticSpec, seed: u64) -> Result<EioProblem> {
    let (p, q) = (s.p, s.q);
    if p == 0 || q == 0 {
        return Err(HarnessError::Model("eio_synthetic needs p, q > 0".into()));
    }
    let theta = match &s.theta {
        Some(t) => vector_of(t, p, "theta")?,
        None => default_truth(p, 0.5),
    };
    let mut r = rng::stream(seed, DESIGN_STREAM);
    let a = Mat::from_fn(q, p, |i, j| {
        let e = rng::normal(&mut r);
        s.scale * (if i == j { 1.0 } else { 0.0 } + 0.3 * e)
    });
    let mut rn = rng::stream(seed, NOISE_STREAM);
    let z = &a * &theta + Vector::from_fn(q, |_, _| rng::normal(&mut rn));
    let mut ro = rng::stream(seed, OPERATOR_STREAM);
    let a_hat = &a + Mat::from_fn(q, p, |_, _| rng::normal(&mut ro) / s.mu);
    Ok(EioProblem::new(
        z,
        a_hat,
        s.mu,
        PsdOperator::scaled_identity(p, s.ridge),
        None,
        None,
        s.rho,
    )?)
}
