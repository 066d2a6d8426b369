//! Dense symmetric operator algebra.
//!
//! Everything here works on small dense matrices: spectral decompositions,
//! square roots, Schur complements and the usual matrix norms.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative eigenvalue floor below which eigenvalues are clamped to zero.
pub const PSD_TOL: f64 = 1e-12;
/// Relative tolerance of the Loewner order test `A ⪯ B`.
pub const LOEWNER_TOL: f64 = 1e-9;
/// Relative asymmetry accepted by [`PsdOperator::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Operator norm, Frobenius norm and nuclear norm of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub operator_norm: f64,
    pub frobenius: f64,
    pub nuclear: f64,
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |a, &x| a.max(libm::fabs(x)))
}

/// Relative asymmetry `max |a_ij - a_ji| / max |a_ij|`.
pub fn asymmetry(m: &Mat) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max(libm::fabs(m[(i, j)] - m[(j, i)]));
        }
    }
    worst / scale
}

/// `(M + Mᵀ)/2`.
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending.
///
/// The eigenvectors are the columns of the returned matrix. Only the lower
/// triangle is trusted, so callers should symmetrize first if in doubt.
pub fn sym_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let eig = symmetrize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Norms of a symmetric (possibly indefinite) matrix from its spectrum.
pub fn sym_norms(m: &Mat) -> Norms {
    let (values, _) = sym_eigen(m);
    norms_of_spectrum(&values)
}

fn norms_of_spectrum(values: &[f64]) -> Norms {
    let mut op = 0.0_f64;
    let mut fr = 0.0;
    let mut nuc = 0.0;
    for &l in values {
        op = op.max(libm::fabs(l));
        fr += l * l;
        nuc += libm::fabs(l);
    }
    Norms {
        operator_norm: op,
        frobenius: libm::sqrt(fr),
        nuclear: nuc,
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &Mat) -> f64 {
    sym_eigen(m).0.last().copied().unwrap_or(0.0)
}

/// Slack of the Loewner comparison `A ⪯ B`: `λ_min(B - A) + tol·‖B‖`.
///
/// Nonnegative slack means the comparison holds.
pub fn loewner_slack(a: &Mat, b: &Mat) -> f64 {
    let scale = sym_norms(b).operator_norm;
    min_eigenvalue(&(b - a)) + LOEWNER_TOL * scale
}

/// `A ⪯ B` as quadratic forms, up to `1e-9·‖B‖`.
pub fn psd_leq(a: &Mat, b: &Mat) -> bool {
    loewner_slack(a, b) >= 0.0
}

/// Solve `M x = b` for symmetric positive definite `M` via Cholesky.
pub fn spd_solve(m: &Mat, b: &Vector) -> Option<Vector> {
    m.clone().cholesky().map(|c| c.solve(b))
}

/// Solve `M X = B` for symmetric positive definite `M` via Cholesky.
pub fn spd_solve_mat(m: &Mat, b: &Mat) -> Option<Mat> {
    m.clone().cholesky().map(|c| c.solve(b))
}

/// Trace of a square matrix.
pub fn trace(m: &Mat) -> f64 {
    m.diagonal().sum()
}

/// Symmetric positive semidefinite operator with cached spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorJson", try_from = "OperatorJson")]
pub struct PsdOperator {
    matrix: Mat,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat,
    psd_tol: f64,
}

impl PsdOperator {
    /// Validate and decompose a symmetric PSD matrix.
    ///
    /// The stored matrix is kept exactly as given; the decomposition is taken
    /// of its symmetric part.
    pub fn new(matrix: Mat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::Validation("operator must have positive dimension".into()));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("operator has non-finite entries".into()));
        }
        let asym = asymmetry(&matrix);
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let (mut values, vectors) = sym_eigen(&matrix);
        let top = values[0].max(0.0);
        let floor = PSD_TOL * top;
        for v in values.iter_mut() {
            if *v < 0.0 {
                if *v < -floor {
                    return Err(Error::NotPsd { eigenvalue: *v });
                }
                *v = 0.0;
            }
        }
        Ok(Self {
            matrix,
            eigenvalues: values,
            eigenvectors: vectors,
            psd_tol: floor,
        })
    }

    /// Like [`PsdOperator::new`] but symmetrizes first; for internally computed products.
    pub fn from_sym(matrix: &Mat) -> Result<Self> {
        Self::new(symmetrize(matrix))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        Self::new(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        Self::new(Mat::from_diagonal(&Vector::from_column_slice(d)))
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let s = s.max(0.0);
        Self {
            matrix: Mat::identity(n, n) * s,
            eigenvalues: alloc::vec![s; n],
            eigenvectors: Mat::identity(n, n),
            psd_tol: PSD_TOL * s,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::scaled_identity(n, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// Eigenvalues in descending order (clamped at zero).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors, one per column, matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &Mat {
        &self.eigenvectors
    }

    pub fn psd_tol(&self) -> f64 {
        self.psd_tol
    }

    pub fn spectral(&self) -> (&[f64], &Mat) {
        (&self.eigenvalues, &self.eigenvectors)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// `Q f(Λ) Qᵀ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Mat {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let s = f(l);
            scaled.column_mut(k).scale_mut(s);
        }
        symmetrize(&(scaled * q.transpose()))
    }

    /// Reassemble `QΛQᵀ` from the cached spectrum.
    pub fn reconstruct(&self) -> Mat {
        self.map_spectrum(|l| l)
    }

    fn check_invertible(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min <= self.psd_tol || min <= 0.0 {
            return Err(Error::Singular { eigenvalue: min });
        }
        Ok(())
    }

    pub fn is_invertible(&self) -> bool {
        self.check_invertible().is_ok()
    }

    pub fn sqrt(&self) -> PsdOperator {
        self.derived(|l| libm::sqrt(l))
    }

    pub fn inv_sqrt(&self) -> Result<PsdOperator> {
        self.check_invertible()?;
        Ok(self.derived(|l| 1.0 / libm::sqrt(l)))
    }

    pub fn sqrt_inv_sqrt(&self) -> Result<(PsdOperator, PsdOperator)> {
        Ok((self.sqrt(), self.inv_sqrt()?))
    }

    pub fn inverse(&self) -> Result<PsdOperator> {
        self.check_invertible()?;
        Ok(self.derived(|l| 1.0 / l))
    }

    /// Operator sharing the eigenvectors, with eigenvalues `f(λ)`.
    fn derived(&self, f: impl Fn(f64) -> f64) -> PsdOperator {
        let mut pairs: Vec<(f64, usize)> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| (f(l), k))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let n = self.dim();
        let mut vectors = Mat::zeros(n, n);
        for (k, &(_, i)) in pairs.iter().enumerate() {
            vectors.set_column(k, &self.eigenvectors.column(i));
        }
        let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let matrix = self.map_spectrum(&f);
        Self {
            matrix,
            psd_tol: PSD_TOL * values[0].max(0.0),
            eigenvalues: values,
            eigenvectors: vectors,
        }
    }

    /// `M⁻¹ v` through the spectral decomposition.
    pub fn solve(&self, v: &Vector) -> Result<Vector> {
        self.check_invertible()?;
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let q = &self.eigenvectors;
        let mut c = q.transpose() * v;
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            c[k] /= l;
        }
        Ok(q * c)
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        &self.matrix * v
    }

    /// `vᵀ M v`.
    pub fn quad_form(&self, v: &Vector) -> f64 {
        v.dot(&(&self.matrix * v))
    }

    pub fn norms(&self) -> Norms {
        norms_of_spectrum(&self.eigenvalues)
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn logdet(&self) -> Result<f64> {
        self.check_invertible()?;
        Ok(self.eigenvalues.iter().map(|&l| libm::log(l)).sum())
    }

    /// `T M Tᵀ` for a (possibly rectangular) `T`.
    pub fn congruence(&self, t: &Mat) -> Result<PsdOperator> {
        if t.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: t.ncols(),
            });
        }
        PsdOperator::from_sym(&(t * &self.matrix * t.transpose()))
    }

    pub fn add(&self, other: &PsdOperator) -> Result<PsdOperator> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        PsdOperator::from_sym(&(&self.matrix + &other.matrix))
    }

    pub fn scale(&self, s: f64) -> Result<PsdOperator> {
        PsdOperator::new(&self.matrix * s)
    }

    /// `self ⪯ other` as quadratic forms.
    pub fn leq(&self, other: &PsdOperator) -> bool {
        psd_leq(&self.matrix, &other.matrix)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }
}

/// Wire format `{dim, rows}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
}

impl From<PsdOperator> for OperatorJson {
    fn from(op: PsdOperator) -> Self {
        Self {
            dim: op.dim(),
            rows: op.rows(),
        }
    }
}

impl TryFrom<OperatorJson> for PsdOperator {
    type Error = Error;

    fn try_from(j: OperatorJson) -> Result<Self> {
        if j.rows.len() != j.dim {
            return Err(Error::DimensionMismatch {
                expected: j.dim,
                found: j.rows.len(),
            });
        }
        PsdOperator::from_rows(&j.rows)
    }
}

/// A symmetric matrix split into `θθ`, `θη`, `ηθ`, `ηη` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    tt: Mat,
    te: Mat,
    et: Mat,
    ee: Mat,
}

impl BlockOperator {
    pub fn new(tt: Mat, te: Mat, ee: Mat) -> Result<Self> {
        let p = tt.nrows();
        let q = ee.nrows();
        if tt.ncols() != p || ee.ncols() != q {
            return Err(Error::Validation("diagonal blocks must be square".into()));
        }
        if te.nrows() != p || te.ncols() != q {
            return Err(Error::DimensionMismatch {
                expected: p * q,
                found: te.nrows() * te.ncols(),
            });
        }
        let et = te.transpose();
        Ok(Self { tt, te, et, ee })
    }

    /// Split a full `(p+q)×(p+q)` matrix after the first `p` coordinates.
    pub fn from_full(m: &Mat, p: usize) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || p == 0 || p >= n {
            return Err(Error::Validation("invalid block split".into()));
        }
        let q = n - p;
        Self::new(
            m.view((0, 0), (p, p)).into_owned(),
            m.view((0, p), (p, q)).into_owned(),
            m.view((p, p), (q, q)).into_owned(),
        )
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.tt.nrows(), self.ee.nrows())
    }

    pub fn tt(&self) -> &Mat {
        &self.tt
    }

    pub fn te(&self) -> &Mat {
        &self.te
    }

    pub fn et(&self) -> &Mat {
        &self.et
    }

    pub fn ee(&self) -> &Mat {
        &self.ee
    }

    pub fn full(&self) -> Mat {
        let (p, q) = self.dims();
        let mut m = Mat::zeros(p + q, p + q);
        m.view_mut((0, 0), (p, p)).copy_from(&self.tt);
        m.view_mut((0, p), (p, q)).copy_from(&self.te);
        m.view_mut((p, 0), (q, p)).copy_from(&self.et);
        m.view_mut((p, p), (q, q)).copy_from(&self.ee);
        m
    }

    /// `ηη⁻¹ ηθ`, the coefficient of the orthogonalizing nuisance shift.
    pub fn nuisance_coupling(&self) -> Result<Mat> {
        spd_solve_mat(&self.ee, &self.et).ok_or_else(|| Error::Singular {
            eigenvalue: min_eigenvalue(&self.ee),
        })
    }

    /// Efficient block `θθ − θη ηη⁻¹ ηθ`.
    pub fn schur_efficient(&self) -> Result<PsdOperator> {
        let c = self.nuisance_coupling()?;
        PsdOperator::from_sym(&(&self.tt - &self.te * c))
    }
}
