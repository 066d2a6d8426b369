//! Brute-force references: grid quadrature, adaptive Metropolis sampling and
//! empirical distances to Gaussian laws.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, PsdOperator, Vector};
use crate::rng;

pub const MAX_GRID_DIM: usize = 4;
pub const MAX_GRID_CELLS: usize = 50_000_000;
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-6;

/// Posterior tabulated on a midpoint grid over a box.
///
/// Grid coordinates `z` map to parameter coordinates through
/// `x = offset + transform·z`; the identity map is used when none is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPosterior {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: Vec<usize>,
    pub log_density: Vec<f64>,
    pub cell_mass: Vec<f64>,
    pub boundary_mass_estimate: f64,
    pub offset: Vec<f64>,
    /// Row-major `dim × dim`.
    pub transform: Vec<f64>,
}

fn check_box(lo: &[f64], hi: &[f64], resolution: &[usize]) -> Result<usize> {
    let d = lo.len();
    if d == 0 || d > MAX_GRID_DIM {
        return Err(Error::Validation(alloc::format!(
            "grid dimension {d} outside 1..={MAX_GRID_DIM}"
        )));
    }
    if hi.len() != d || resolution.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if hi.len() != d { hi.len() } else { resolution.len() },
        });
    }
    let mut total: usize = 1;
    for k in 0..d {
        if !(lo[k].is_finite() && hi[k].is_finite() && hi[k] > lo[k]) {
            return Err(Error::Validation(alloc::format!("bad box on axis {k}")));
        }
        if resolution[k] < 3 {
            return Err(Error::Validation("resolution must be at least 3 per axis".into()));
        }
        total = total
            .checked_mul(resolution[k])
            .filter(|t| *t <= MAX_GRID_CELLS)
            .ok_or_else(|| Error::Validation("grid too large".into()))?;
    }
    Ok(total)
}

fn unflatten(mut idx: usize, resolution: &[usize], out: &mut [usize]) {
    for k in (0..resolution.len()).rev() {
        out[k] = idx % resolution[k];
        idx /= resolution[k];
    }
}

/// Tabulate `exp(log_f)` on the box `[lo, hi]` with `resolution` cells per axis.
pub fn grid_posterior(
    log_f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    resolution: &[usize],
) -> Result<GridPosterior> {
    let d = lo.len();
    let offset = vec![0.0; d];
    let transform = Mat::identity(d, d);
    grid_posterior_affine(log_f, lo, hi, resolution, &offset, &transform)
}

/// Like [`grid_posterior`] with `log_f` evaluated at `offset + transform·z`.
pub fn grid_posterior_affine(
    log_f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    resolution: &[usize],
    offset: &[f64],
    transform: &Mat,
) -> Result<GridPosterior> {
    let total = check_box(lo, hi, resolution)?;
    let d = lo.len();
    if offset.len() != d || transform.nrows() != d || transform.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: offset.len(),
        });
    }
    let h: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / resolution[k] as f64).collect();
    let mut idx = vec![0usize; d];
    let mut z = Vector::zeros(d);
    let off = Vector::from_column_slice(offset);
    let mut log_density = Vec::with_capacity(total);
    for flat in 0..total {
        unflatten(flat, resolution, &mut idx);
        for k in 0..d {
            z[k] = lo[k] + (idx[k] as f64 + 0.5) * h[k];
        }
        let x = &off + transform * &z;
        let v = log_f(x.as_slice());
        if v.is_nan() || v == f64::INFINITY {
            return Err(Error::Instability(alloc::format!("log density {v} at grid cell {flat}")));
        }
        log_density.push(v);
    }
    let max = log_density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::EmptyGrid);
    }
    let mut cell_mass: Vec<f64> = log_density.iter().map(|l| libm::exp(l - max)).collect();
    let sum: f64 = cell_mass.iter().sum();
    for m in &mut cell_mass {
        *m /= sum;
    }
    let boundary = boundary_mass(&log_density, &cell_mass, resolution, &h);
    let grid = GridPosterior {
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        resolution: resolution.to_vec(),
        log_density,
        cell_mass,
        boundary_mass_estimate: boundary,
        offset: offset.to_vec(),
        transform: transform.transpose().as_slice().to_vec(),
    };
    if !(boundary <= BOUNDARY_MASS_LIMIT) {
        return Err(Error::BoundaryMass {
            mass: boundary,
            limit: BOUNDARY_MASS_LIMIT,
        });
    }
    Ok(grid)
}

/// Mass outside the box, extrapolating an exponential tail from each face
/// cell and its inward neighbour.
fn boundary_mass(log_density: &[f64], mass: &[f64], resolution: &[usize], h: &[f64]) -> f64 {
    let d = resolution.len();
    let mut strides = vec![1usize; d];
    for k in (0..d.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * resolution[k + 1];
    }
    let mut idx = vec![0usize; d];
    let mut tail = 0.0;
    for flat in 0..mass.len() {
        unflatten(flat, resolution, &mut idx);
        for k in 0..d {
            let inward = if idx[k] == 0 {
                flat + strides[k]
            } else if idx[k] == resolution[k] - 1 {
                flat - strides[k]
            } else {
                continue;
            };
            let m = mass[flat];
            if m == 0.0 {
                continue;
            }
            let decay = (log_density[inward] - log_density[flat]) / h[k];
            tail += if decay > 0.0 {
                m / (h[k] * decay)
            } else {
                m * resolution[k] as f64
            };
        }
    }
    tail
}

impl GridPosterior {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.cell_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_mass.is_empty()
    }

    pub fn spacing(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| (self.hi[k] - self.lo[k]) / self.resolution[k] as f64)
            .collect()
    }

    pub fn transform_matrix(&self) -> Mat {
        let d = self.dim();
        Mat::from_row_slice(d, d, &self.transform)
    }

    /// Grid coordinates of cell `flat`.
    pub fn cell_z(&self, flat: usize) -> Vector {
        let d = self.dim();
        let h = self.spacing();
        let mut idx = vec![0usize; d];
        unflatten(flat, &self.resolution, &mut idx);
        Vector::from_fn(d, |k, _| self.lo[k] + (idx[k] as f64 + 0.5) * h[k])
    }

    /// Parameter coordinates of every cell centre.
    pub fn points(&self) -> Vec<Vector> {
        let t = self.transform_matrix();
        let off = Vector::from_column_slice(&self.offset);
        (0..self.len()).map(|i| &off + &t * self.cell_z(i)).collect()
    }

    pub fn mean(&self) -> Vector {
        let mut m = Vector::zeros(self.dim());
        for (p, w) in self.points().iter().zip(&self.cell_mass) {
            m += p * *w;
        }
        m
    }

    pub fn covariance(&self) -> Mat {
        let pts = self.points();
        let m = self.mean();
        let d = self.dim();
        let mut c = Mat::zeros(d, d);
        for (p, w) in pts.iter().zip(&self.cell_mass) {
            let e = p - &m;
            c += &e * e.transpose() * *w;
        }
        c
    }

    /// Mass of the cells whose centres satisfy `event`.
    pub fn probability(&self, event: impl Fn(&Vector) -> bool) -> f64 {
        self.points()
            .iter()
            .zip(&self.cell_mass)
            .filter(|(p, _)| event(p))
            .map(|(_, w)| *w)
            .sum()
    }

    /// Per-cell masses of `N(mean, sigma)` by midpoint density × volume,
    /// optionally subdividing each cell `refine` times per axis.
    pub fn gaussian_masses(&self, mean: &Vector, sigma: &PsdOperator, refine: usize) -> Result<Vec<f64>> {
        let d = self.dim();
        if mean.len() != d || sigma.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: mean.len(),
            });
        }
        let t = self.transform_matrix();
        let t_inv = t
            .clone()
            .try_inverse()
            .ok_or(Error::Singular { eigenvalue: 0.0 })?;
        let mean_z = &t_inv * (mean - Vector::from_column_slice(&self.offset));
        let sigma_z = PsdOperator::from_sym(&(&t_inv * sigma.matrix() * t_inv.transpose()))?;
        let prec = sigma_z.inverse()?;
        let log_norm = -0.5 * (d as f64 * libm::log(2.0 * PI) + sigma_z.logdet()?);
        let h = self.spacing();
        let vol: f64 = h.iter().product();
        let refine = refine.max(1);
        let subs = refine.pow(d as u32);
        let mut sub_idx = vec![0usize; d];
        let sub_res = vec![refine; d];
        let mut out = Vec::with_capacity(self.len());
        for flat in 0..self.len() {
            let c = self.cell_z(flat);
            let mut acc = 0.0;
            for s in 0..subs {
                unflatten(s, &sub_res, &mut sub_idx);
                let z = Vector::from_fn(d, |k, _| {
                    c[k] - 0.5 * h[k] + (sub_idx[k] as f64 + 0.5) * h[k] / refine as f64
                });
                let e = z - &mean_z;
                acc += libm::exp(log_norm - 0.5 * prec.quad_form(&e));
            }
            out.push(acc * vol / subs as f64);
        }
        Ok(out)
    }
}

/// `½Σ|p_i − q_i|` plus half the Gaussian mass falling outside the box.
pub fn total_variation(grid: &GridPosterior, mean: &Vector, sigma: &PsdOperator) -> Result<f64> {
    let q = grid.gaussian_masses(mean, sigma, 1)?;
    Ok(tv_from_masses(&grid.cell_mass, &q))
}

fn tv_from_masses(p: &[f64], q: &[f64]) -> f64 {
    let inside: f64 = q.iter().sum();
    let diff: f64 = p.iter().zip(q).map(|(a, b)| libm::fabs(a - b)).sum();
    0.5 * diff + 0.5 * (1.0 - inside).max(0.0)
}

/// Total variation with the Gaussian side on a 2×-refined midpoint rule.
///
/// Returns `(tv, |tv − tv_refined|)`.
pub fn total_variation_checked(grid: &GridPosterior, mean: &Vector, sigma: &PsdOperator) -> Result<(f64, f64)> {
    let tv = total_variation(grid, mean, sigma)?;
    let fine = tv_from_masses(&grid.cell_mass, &grid.gaussian_masses(mean, sigma, 2)?);
    Ok((tv, libm::fabs(tv - fine)))
}

/// Total variation between two grid laws on the same cells.
pub fn total_variation_grids(a: &GridPosterior, b: &GridPosterior) -> Result<f64> {
    if a.resolution != b.resolution || a.lo != b.lo || a.hi != b.hi {
        return Err(Error::Validation("grids do not share cells".into()));
    }
    Ok(tv_from_masses(&a.cell_mass, &b.cell_mass))
}

/// `KL(grid ‖ N(mean, sigma))` on the grid cells.
pub fn kl_divergence(grid: &GridPosterior, mean: &Vector, sigma: &PsdOperator) -> Result<f64> {
    let q = grid.gaussian_masses(mean, sigma, 1)?;
    Ok(grid
        .cell_mass
        .iter()
        .zip(&q)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, q)| p * (libm::log(*p) - libm::log(q.max(f64::MIN_POSITIVE))))
        .sum())
}

/// Draws from an adaptive random-walk Metropolis chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub draws: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
    pub ess_per_dim: Vec<f64>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl SampleSet {
    pub fn accepted(&self) -> bool {
        self.warnings.is_empty()
    }

    pub fn min_ess(&self) -> f64 {
        self.ess_per_dim.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn vectors(&self) -> Vec<Vector> {
        self.draws.iter().map(|d| Vector::from_column_slice(d)).collect()
    }

    pub fn mean(&self) -> Vector {
        let d = self.draws.first().map_or(0, Vec::len);
        let mut m = Vector::zeros(d);
        for x in &self.draws {
            m += Vector::from_column_slice(x);
        }
        m / self.draws.len().max(1) as f64
    }

    pub fn covariance(&self) -> Mat {
        let m = self.mean();
        let d = m.len();
        let mut c = Mat::zeros(d, d);
        for x in &self.draws {
            let e = Vector::from_column_slice(x) - &m;
            c += &e * e.transpose();
        }
        c / (self.draws.len().max(2) - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcOptions {
    /// Adaptation iterations before the proposal is frozen.
    pub n_adapt: usize,
    pub target_acceptance: f64,
    /// Starting proposal covariance; identity when absent.
    pub init_cov: Option<Vec<Vec<f64>>>,
}

impl Default for McmcOptions {
    fn default() -> Self {
        Self {
            n_adapt: 5000,
            target_acceptance: 0.234,
            init_cov: None,
        }
    }
}

/// Adaptive random-walk Metropolis with default options.
pub fn mcmc_sample(log_f: &dyn Fn(&Vector) -> f64, init: &Vector, n_draws: usize, seed: u64) -> Result<SampleSet> {
    mcmc_sample_with(log_f, init, n_draws, seed, &McmcOptions::default())
}

pub fn mcmc_sample_with(
    log_f: &dyn Fn(&Vector) -> f64,
    init: &Vector,
    n_draws: usize,
    seed: u64,
    opts: &McmcOptions,
) -> Result<SampleSet> {
    let d = init.len();
    if d == 0 || n_draws == 0 {
        return Err(Error::Validation("empty chain request".into()));
    }
    let mut lp = log_f(init);
    if !lp.is_finite() {
        return Err(Error::Validation("log density not finite at the initial point".into()));
    }
    let mut cov = match &opts.init_cov {
        Some(rows) => PsdOperator::from_rows(rows)?.matrix().clone(),
        None => Mat::identity(d, d),
    };
    let mut log_scale = libm::log(2.38 / libm::sqrt(d as f64));
    let mut rng = rng::stream(seed, 0);
    let mut x = init.clone();
    let mut run_mean = x.clone();
    let mut run_cov = cov.clone();
    let mut chol = cholesky_factor(&cov, d);

    for t in 0..opts.n_adapt {
        let step = &chol * rng::normal_vector(&mut rng, d) * libm::exp(log_scale);
        let y = &x + step;
        let ly = log_f(&y);
        let a = if ly.is_finite() { libm::exp((ly - lp).min(0.0)) } else { 0.0 };
        if rng::uniform(&mut rng) < a {
            x = y;
            lp = ly;
        }
        let gamma = 1.0 / libm::pow(t as f64 + 2.0, 0.6);
        log_scale += gamma * (a - opts.target_acceptance);
        let e = &x - &run_mean;
        run_mean += &e * gamma;
        run_cov = &run_cov * (1.0 - gamma) + &e * e.transpose() * gamma;
        if t % 50 == 49 {
            cov = run_cov.clone();
            chol = cholesky_factor(&cov, d);
        }
    }
    if opts.n_adapt > 0 {
        cov = run_cov;
        chol = cholesky_factor(&cov, d);
    }
    let scale = libm::exp(log_scale);
    let mut draws = Vec::with_capacity(n_draws);
    let mut accepted = 0usize;
    for _ in 0..n_draws {
        let y = &x + &chol * rng::normal_vector(&mut rng, d) * scale;
        let ly = log_f(&y);
        if ly.is_finite() && rng::uniform(&mut rng) < libm::exp((ly - lp).min(0.0)) {
            x = y;
            lp = ly;
            accepted += 1;
        }
        draws.push(x.iter().copied().collect::<Vec<f64>>());
    }
    if accepted == 0 {
        return Err(Error::ZeroAcceptance);
    }
    let acceptance_rate = accepted as f64 / n_draws as f64;
    let ess_per_dim: Vec<f64> = (0..d)
        .map(|k| effective_sample_size(&draws.iter().map(|v| v[k]).collect::<Vec<_>>()))
        .collect();
    let mut warnings = Vec::new();
    if !(0.1..=0.6).contains(&acceptance_rate) {
        warnings.push(alloc::format!("acceptance rate {acceptance_rate:.3} outside [0.1, 0.6]"));
    }
    let min_ess = ess_per_dim.iter().copied().fold(f64::INFINITY, f64::min);
    if min_ess < 100.0 {
        warnings.push(alloc::format!("minimum ESS {min_ess:.1} below 100"));
    }
    Ok(SampleSet {
        draws,
        acceptance_rate,
        ess_per_dim,
        seed,
        warnings,
    })
}

fn cholesky_factor(cov: &Mat, d: usize) -> Mat {
    let scale = (0..d).map(|i| cov[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let jitter = cov + Mat::identity(d, d) * (1e-10 * scale);
    match jitter.cholesky() {
        Some(c) => c.l(),
        None => Mat::identity(d, d) * libm::sqrt(scale),
    }
}

/// Effective sample size with Geyer's initial monotone sequence estimator.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return n as f64;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let c0 = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return n as f64;
    }
    let acf = |lag: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..n - lag {
            s += (x[i] - mean) * (x[i + lag] - mean);
        }
        s / (n as f64 * c0)
    };
    let mut sum = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = acf(2 * m) + acf(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        sum += pair;
        prev_pair = pair;
        m += 1;
    }
    let tau = (2.0 * sum - 1.0).max(1.0 / n as f64);
    n as f64 / tau
}

/// `n` draws from `N(mean, sigma)`; draw `i` uses stream `(seed, i / 1024)`.
pub fn sample_gaussian(mean: &Vector, sigma: &PsdOperator, n: usize, seed: u64) -> Result<Vec<Vector>> {
    sample_gaussian_stream(mean, sigma, n, seed, 0)
}

/// Like [`sample_gaussian`] with chunk streams starting at `stream_base`.
pub fn sample_gaussian_stream(
    mean: &Vector,
    sigma: &PsdOperator,
    n: usize,
    seed: u64,
    stream_base: u64,
) -> Result<Vec<Vector>> {
    if mean.len() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: mean.len(),
        });
    }
    let root = sigma.sqrt();
    let d = mean.len();
    let mut out = Vec::with_capacity(n);
    let mut chunk = 0u64;
    while out.len() < n {
        let mut r = rng::stream(seed, stream_base + chunk);
        for _ in 0..(n - out.len()).min(1024) {
            out.push(mean + root.apply(&rng::normal_vector(&mut r, d)));
        }
        chunk += 1;
    }
    Ok(out)
}

/// `‖shift + Qξ‖` for `n` draws `ξ ~ N(0, Σ)`, using the streams of [`sample_gaussian`].
pub fn gaussian_norms(q: &Mat, shift: &Vector, sigma: &PsdOperator, n: usize, seed: u64) -> Result<Vec<f64>> {
    if q.ncols() != sigma.dim() || q.nrows() != shift.len() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: q.ncols(),
        });
    }
    let m = q * sigma.sqrt().matrix();
    let (k, d) = m.shape();
    let mut z = vec![0.0; d];
    let mut out = Vec::with_capacity(n);
    let mut chunk = 0u64;
    while out.len() < n {
        let mut r = rng::stream(seed, chunk);
        for _ in 0..(n - out.len()).min(1024) {
            for v in z.iter_mut() {
                *v = rng::normal(&mut r);
            }
            let mut sq = 0.0;
            for i in 0..k {
                let mut x = shift[i];
                for (j, zj) in z.iter().enumerate() {
                    x += m[(i, j)] * zj;
                }
                sq += x * x;
            }
            out.push(libm::sqrt(sq));
        }
        chunk += 1;
    }
    Ok(out)
}

/// Default Gaussian sample size of [`empirical_tv_elliptic`].
pub const MAX_DEFAULT_GAUSSIAN: usize = 200_000;

pub const RADIUS_GRID: usize = 2048;

/// Radii at `RADIUS_GRID/2` weighted quantiles of each sample, pooled.
pub fn pooled_radius_grid(a: &[f64], wa: Option<&[f64]>, b: &[f64], wb: Option<&[f64]>) -> Vec<f64> {
    let per = RADIUS_GRID / 2;
    let mut grid = Vec::with_capacity(RADIUS_GRID);
    for (vals, w) in [(a, wa), (b, wb)] {
        let sorted = sorted_weighted(vals, w);
        let total: f64 = sorted.iter().map(|p| p.1).sum();
        let mut acc = 0.0;
        let mut j = 0;
        for k in 0..per {
            let level = (k as f64 + 0.5) / per as f64 * total;
            while j + 1 < sorted.len() && acc + sorted[j].1 < level {
                acc += sorted[j].1;
                j += 1;
            }
            if let Some(p) = sorted.get(j) {
                grid.push(p.0);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn sorted_weighted(vals: &[f64], w: Option<&[f64]>) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = match w {
        Some(w) => vals.iter().copied().zip(w.iter().copied()).collect(),
        None => vals.iter().map(|v| (*v, 1.0)).collect(),
    };
    v.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Weighted ECDF `P(X ≤ r)` at each grid point (grid sorted ascending).
pub fn ecdf_on_grid(vals: &[f64], w: Option<&[f64]>, grid: &[f64]) -> Vec<f64> {
    let sorted = sorted_weighted(vals, w);
    let total: f64 = sorted.iter().map(|p| p.1).sum();
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut j = 0;
    for r in grid {
        while j < sorted.len() && sorted[j].0 <= *r {
            acc += sorted[j].1;
            j += 1;
        }
        out.push(acc / total);
    }
    out
}

/// `√(ln(2/α)/(2n))` for `α = 0.05`.
pub fn dkw_envelope(n: usize) -> f64 {
    libm::sqrt(libm::log(2.0 / 0.05) / (2.0 * n.max(1) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticTv {
    pub sup_distance: f64,
    /// Sum of the DKW envelopes of both samples.
    pub envelope: f64,
    pub n_samples: usize,
    pub n_gaussian: usize,
}

/// Sup over pooled radii of `|P̂(‖Q(X−c)‖ ≤ r) − P̂(‖Qγ‖ ≤ r)|`, `γ ~ N(0, Σ)`.
///
/// `weights` turns `points` into a weighted sample (e.g. grid cells); the
/// Gaussian side uses `n_gaussian` draws, by default ten per point up to
/// [`MAX_DEFAULT_GAUSSIAN`].
pub fn empirical_tv_elliptic(
    points: &[Vector],
    weights: Option<&[f64]>,
    q: &Mat,
    center: &Vector,
    sigma: &PsdOperator,
    n_gaussian: Option<usize>,
    seed: u64,
) -> Result<EllipticTv> {
    if points.is_empty() {
        return Err(Error::Validation("no points".into()));
    }
    if q.ncols() != center.len() || sigma.dim() != center.len() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            found: q.ncols(),
        });
    }
    let ra: Vec<f64> = points.iter().map(|x| (q * (x - center)).norm()).collect();
    let ng = n_gaussian.unwrap_or((10 * points.len()).min(MAX_DEFAULT_GAUSSIAN));
    let rb = gaussian_norms(q, &Vector::zeros(q.nrows()), sigma, ng, seed)?;
    let grid = pooled_radius_grid(&ra, weights, &rb, None);
    let fa = ecdf_on_grid(&ra, weights, &grid);
    let fb = ecdf_on_grid(&rb, None, &grid);
    let sup = fa.iter().zip(&fb).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max);
    let n_eff = match weights {
        Some(w) => {
            let s: f64 = w.iter().sum();
            let s2: f64 = w.iter().map(|v| v * v).sum();
            (s * s / s2) as usize
        }
        None => points.len(),
    };
    Ok(EllipticTv {
        sup_distance: sup,
        envelope: dkw_envelope(n_eff) + dkw_envelope(ng),
        n_samples: points.len(),
        n_gaussian: ng,
    })
}
