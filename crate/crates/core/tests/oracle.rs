mod common;

use common::*;
use lapcert::error::Error;
use lapcert::linalg::{Mat, PsdOperator, Vector};
use lapcert::oracle::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

fn std_normal_1d(x: &[f64]) -> f64 {
    -0.5 * x[0] * x[0]
}

#[test]
fn grid_moments_of_standard_normal() {
    let g = grid_posterior(&std_normal_1d, &[-8.0], &[8.0], &[1001]).unwrap();
    let s: f64 = g.cell_mass.iter().sum();
    assert!((s - 1.0).abs() < 1e-12);
    assert!(g.mean()[0].abs() < 1e-6);
    assert!((g.covariance()[(0, 0)] - 1.0).abs() < 1e-4);
    assert!(g.boundary_mass_estimate <= BOUNDARY_MASS_LIMIT);
}

#[test]
fn grid_correlated_gaussian_marginals() {
    let prec = Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
    let lf = |x: &[f64]| {
        let v = Vector::from_column_slice(x);
        -0.5 * v.dot(&(&prec * &v))
    };
    let g = grid_posterior(&lf, &[-7.0, -7.0], &[7.0, 7.0], &[400, 400]).unwrap();
    let c = g.covariance();
    // Marginal variance is the inverse Schur complement 1/(2 − 1/2).
    assert!((c[(0, 0)] - 2.0 / 3.0).abs() < 1e-4);
    assert!((c[(1, 1)] - 2.0 / 3.0).abs() < 1e-4);
    assert!((c[(0, 1)] + 1.0 / 3.0).abs() < 1e-4);
}

#[test]
fn grid_rejects_small_box_and_high_dim() {
    let e = grid_posterior(&std_normal_1d, &[-2.0], &[2.0], &[200]);
    assert!(matches!(e, Err(Error::BoundaryMass { .. })));
    let lf = |x: &[f64]| -0.5 * x.iter().map(|v| v * v).sum::<f64>();
    assert!(grid_posterior(&lf, &[-1.0; 5], &[1.0; 5], &[3; 5]).is_err());
}

#[test]
fn tv_against_itself() {
    let g = grid_posterior(&std_normal_1d, &[-8.0], &[8.0], &[1001]).unwrap();
    let tv = total_variation(&g, &Vector::zeros(1), &PsdOperator::identity(1)).unwrap();
    assert!(tv <= 1e-4);
}

#[test]
fn tv_shifted_normals() {
    let g = grid_posterior(&std_normal_1d, &[-8.0], &[8.0], &[2001]).unwrap();
    let tv = total_variation(&g, &Vector::from_vec(vec![0.5]), &PsdOperator::identity(1)).unwrap();
    let n = Normal::new(0.0, 1.0).unwrap();
    let want = 2.0 * n.cdf(0.25) - 1.0;
    assert!((want - 0.1974).abs() < 1e-4);
    assert!((tv - want).abs() < 1e-3, "{tv} vs {want}");
}

#[test]
fn tv_scaled_normals() {
    let g = grid_posterior(&std_normal_1d, &[-8.0], &[8.0], &[2001]).unwrap();
    let tv = total_variation(&g, &Vector::zeros(1), &PsdOperator::diag(&[4.0]).unwrap()).unwrap();
    // Densities cross where x²(1 − 1/4)/2 = ln 2.
    let c = (8.0 * 2f64.ln() / 3.0).sqrt();
    let n = Normal::new(0.0, 1.0).unwrap();
    let want = (2.0 * n.cdf(c) - 1.0) - (2.0 * n.cdf(c / 2.0) - 1.0);
    assert!((want - 0.32267).abs() < 1e-5);
    assert!((tv - want).abs() < 1e-3, "{tv} vs {want}");
}

#[test]
fn tv_symmetric_and_triangle() {
    let make = |m: f64, s: f64| {
        let lf = move |x: &[f64]| -0.5 * ((x[0] - m) / s).powi(2);
        grid_posterior(&lf, &[-10.0], &[10.0], &[1500]).unwrap()
    };
    let a = make(0.0, 1.0);
    let b = make(0.7, 1.3);
    let c = make(-0.4, 0.8);
    let ab = total_variation_grids(&a, &b).unwrap();
    let ba = total_variation_grids(&b, &a).unwrap();
    let bc = total_variation_grids(&b, &c).unwrap();
    let ac = total_variation_grids(&a, &c).unwrap();
    assert!((ab - ba).abs() < 1e-14);
    assert!(ac <= ab + bc + 1e-12);
}

#[test]
fn kl_nonnegative_and_small_for_match() {
    let g = grid_posterior(&std_normal_1d, &[-8.0], &[8.0], &[1001]).unwrap();
    let k0 = kl_divergence(&g, &Vector::zeros(1), &PsdOperator::identity(1)).unwrap();
    let k1 = kl_divergence(&g, &Vector::from_vec(vec![1.0]), &PsdOperator::identity(1)).unwrap();
    assert!(k0.abs() < 1e-5);
    assert!((k1 - 0.5).abs() < 1e-3);
}

#[test]
fn mcmc_standard_gaussian_mean() {
    let lf = |x: &Vector| -0.5 * x.norm_squared();
    let s = mcmc_sample(&lf, &Vector::zeros(2), 20_000, 5).unwrap();
    assert!(s.acceptance_rate >= 0.1 && s.acceptance_rate <= 0.6);
    let m = s.mean();
    for k in 0..2 {
        assert!(m[k].abs() <= 4.0 / s.ess_per_dim[k].sqrt(), "{} ess {}", m[k], s.ess_per_dim[k]);
    }
}

#[test]
fn mcmc_deterministic_per_seed() {
    let lf = |x: &Vector| -0.5 * x.norm_squared() - 0.1 * x[0].powi(4);
    let a = mcmc_sample(&lf, &Vector::zeros(2), 2000, 17).unwrap();
    let b = mcmc_sample(&lf, &Vector::zeros(2), 2000, 17).unwrap();
    let c = mcmc_sample(&lf, &Vector::zeros(2), 2000, 18).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.draws, c.draws);
}

#[test]
fn mcmc_quadratic_covariance() {
    let cov = Mat::from_row_slice(2, 2, &[2.0, 0.9, 0.9, 1.0]);
    let prec = cov.clone().try_inverse().unwrap();
    let lf = |x: &Vector| -0.5 * x.dot(&(&prec * x));
    let s = mcmc_sample(&lf, &Vector::zeros(2), 100_000, 3).unwrap();
    assert!(s.min_ess() >= 1000.0, "{}", s.min_ess());
    let c = s.covariance();
    assert!(rel_fro(&c, &cov) < 0.1, "{c}");
}

#[test]
fn mcmc_rejects_bad_start() {
    let lf = |x: &Vector| if x[0] > 0.0 { f64::NEG_INFINITY } else { 0.0 };
    assert!(mcmc_sample(&lf, &Vector::from_vec(vec![1.0]), 10, 1).is_err());
}

#[test]
fn grid_and_mcmc_agree_on_event() {
    let lf = |x: &[f64]| -0.5 * x[0] * x[0] - 0.5 * (x[1] - 0.5 * x[0] * x[0]).powi(2) * 4.0;
    let g = grid_posterior(&lf, &[-7.0, -4.0], &[7.0, 26.0], &[400, 600]).unwrap();
    let event = |v: &Vector| v[1] > 0.5;
    let pg = g.probability(event);
    let lfv = |x: &Vector| lf(x.as_slice());
    let s = mcmc_sample(&lfv, &Vector::zeros(2), 60_000, 11).unwrap();
    let hits = s.vectors().iter().filter(|v| event(v)).count() as f64;
    let pm = hits / s.draws.len() as f64;
    let se = (pm * (1.0 - pm) / s.min_ess()).sqrt();
    assert!((pg - pm).abs() <= 3.0 * se, "{pg} vs {pm} (se {se})");
}

#[test]
fn dkw_envelope_value() {
    assert!((dkw_envelope(1000) - (40f64.ln() / 2000.0).sqrt()).abs() < 1e-15);
}

#[test]
fn elliptic_matching_gaussian() {
    let sigma = PsdOperator::new(Mat::from_row_slice(2, 2, &[1.5, 0.4, 0.4, 0.8])).unwrap();
    let c = Vector::from_vec(vec![1.0, -2.0]);
    let pts = sample_gaussian(&c, &sigma, 4000, 21).unwrap();
    let q = Mat::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 2.0]);
    let e = empirical_tv_elliptic(&pts, None, &q, &c, &sigma, None, 22).unwrap();
    assert_eq!(e.n_gaussian, 40_000);
    assert!(e.sup_distance <= 2.0 * dkw_envelope(4000));
}

#[test]
fn elliptic_weighted_grid_exact_case() {
    let prec = Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
    let lf = |x: &[f64]| {
        let v = Vector::from_column_slice(x);
        -0.5 * v.dot(&(&prec * &v))
    };
    let g = grid_posterior(&lf, &[-7.0, -7.0], &[7.0, 7.0], &[200, 200]).unwrap();
    let sigma = PsdOperator::new(prec.clone()).unwrap().inverse().unwrap();
    let d = PsdOperator::new(prec).unwrap().sqrt().matrix().clone();
    let e = empirical_tv_elliptic(&g.points(), Some(&g.cell_mass), &d, &Vector::zeros(2), &sigma, Some(200_000), 4)
        .unwrap();
    assert!(e.sup_distance <= e.envelope, "{} vs {}", e.sup_distance, e.envelope);
}

#[test]
fn elliptic_wrong_scale_matches_chi_square() {
    let pts = sample_gaussian(&Vector::zeros(2), &PsdOperator::identity(2), 20_000, 31).unwrap();
    let e = empirical_tv_elliptic(
        &pts,
        None,
        &Mat::identity(2, 2),
        &Vector::zeros(2),
        &PsdOperator::scaled_identity(2, 2.0),
        None,
        32,
    )
    .unwrap();
    let chi = ChiSquared::new(2.0).unwrap();
    let want = (1..20_000)
        .map(|i| {
            let t = i as f64 * 1e-3;
            chi.cdf(t) - chi.cdf(t / 2.0)
        })
        .fold(0.0, f64::max);
    assert!((want - 0.25).abs() < 1e-6);
    assert!((e.sup_distance - want).abs() < 0.01, "{} vs {want}", e.sup_distance);
}

#[test]
fn gaussian_sampler_moments() {
    let sigma = PsdOperator::new(Mat::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 2.0])).unwrap();
    let m = Vector::from_vec(vec![3.0, -1.0]);
    let pts = sample_gaussian(&m, &sigma, 50_000, 41).unwrap();
    let n = pts.len() as f64;
    let mean = pts.iter().fold(Vector::zeros(2), |a, p| a + p) / n;
    assert!((&mean - &m).norm() < 0.03);
    let cov = pts.iter().fold(Mat::zeros(2, 2), |a, p| a + (p - &mean) * (p - &mean).transpose()) / (n - 1.0);
    assert!(rel_fro(&cov, sigma.matrix()) < 0.03);
    assert_eq!(pts, sample_gaussian(&m, &sigma, 50_000, 41).unwrap());
}

#[test]
fn gaussian_norms_follow_sample_streams() {
    let mut r = rng(77);
    let sigma = spd_op(&mut r, 3, 0.2);
    let q = gaussian_mat(&mut r, 2, 3);
    let shift = gaussian_vec(&mut r, 2);
    let n = 2500;
    let norms = gaussian_norms(&q, &shift, &sigma, n, 5).unwrap();
    let draws = sample_gaussian(&Vector::zeros(3), &sigma, n, 5).unwrap();
    assert_eq!(norms.len(), n);
    for (a, x) in norms.iter().zip(&draws) {
        let b = (&shift + &q * x).norm();
        assert!((a - b).abs() <= 1e-12 * (1.0 + b), "{a} vs {b}");
    }
    assert!(gaussian_norms(&q, &Vector::zeros(3), &sigma, 10, 5).is_err());
}
