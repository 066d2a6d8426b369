mod common;

use common::*;
use lapcert::eio::*;
use lapcert::error::Error;
use lapcert::linalg::{Mat, PsdOperator, Vector};
use lapcert::sls::{ProbeConfig, SlsModel};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn scalar_problem(z: f64, a_hat: f64, mu: f64, g2: f64, g02: f64, rho: f64) -> EioProblem {
    EioProblem::new(
        Vector::from_vec(vec![z]),
        Mat::from_element(1, 1, a_hat),
        mu,
        PsdOperator::diag(&[g2]).unwrap(),
        Some(PsdOperator::diag(&[g02]).unwrap()),
        None,
        rho,
    )
    .unwrap()
}

fn random_problem(seed: u64, p: usize, q: usize, mu: f64) -> EioProblem {
    let mut r = rng(seed);
    let a_hat = gaussian_mat(&mut r, q, p);
    let z = gaussian_vec(&mut r, q);
    let g2 = spd_op(&mut r, p, 0.5);
    let g02 = g2.scale(0.5).unwrap();
    let k2 = (0..q).map(|_| spd_op(&mut r, p, 0.1)).collect();
    EioProblem::new(z, a_hat, mu, g2, Some(g02), Some(k2), 0.5).unwrap()
}

fn random_state(seed: u64, p: usize, q: usize, scale: f64) -> EioState {
    let mut r = rng(seed);
    EioState {
        theta: gaussian_vec(&mut r, p) * scale,
        a: gaussian_mat(&mut r, q, p),
    }
}

fn fd_hessian(pr: &EioProblem, s: &EioState) -> Mat {
    let (p, q) = (pr.p(), pr.q());
    let u = s.stack();
    let n = u.len();
    let h = 1e-5;
    let grad = |v: &Vector| objective_grad_hess(pr, &EioState::unstack(v, p, q).unwrap()).unwrap().grad;
    let mut m = Mat::zeros(n, n);
    for j in 0..n {
        let mut up = u.clone();
        let mut dn = u.clone();
        up[j] += h;
        dn[j] -= h;
        let col = (grad(&up) - grad(&dn)) / (2.0 * h);
        m.set_column(j, &(-col));
    }
    m
}

fn fd_gradient(pr: &EioProblem, s: &EioState) -> Vector {
    let (p, q) = (pr.p(), pr.q());
    let u = s.stack();
    let h = 1e-6;
    let f = |v: &Vector| objective(pr, &EioState::unstack(v, p, q).unwrap()).unwrap();
    Vector::from_fn(u.len(), |j, _| {
        let mut up = u.clone();
        let mut dn = u.clone();
        up[j] += h;
        dn[j] -= h;
        (f(&up) - f(&dn)) / (2.0 * h)
    })
}

#[test]
fn derivatives_at_pilot_with_zero_data() {
    let mut r = rng(1);
    let a_hat = gaussian_mat(&mut r, 3, 2);
    let g2 = spd_op(&mut r, 2, 0.3);
    let pr = EioProblem::new(Vector::zeros(3), a_hat.clone(), 2.0, g2.clone(), None, None, 0.5).unwrap();
    let s = EioState { theta: Vector::zeros(2), a: a_hat.clone() };
    let d = objective_grad_hess(&pr, &s).unwrap();
    assert_eq!(d.f, 0.0);
    let b = d.blocks(2).unwrap();
    let want = a_hat.transpose() * &a_hat + g2.matrix();
    assert!(rel_fro(b.tt(), &want) < 1e-14);
}

#[test]
fn scalar_target_block() {
    let pr = scalar_problem(0.0, 2.0, 1.0, 1.0, 1.0, 0.5);
    let s = EioState { theta: Vector::from_vec(vec![0.3]), a: Mat::from_element(1, 1, 2.0) };
    let d = objective_grad_hess(&pr, &s).unwrap();
    assert!((d.hess[(0, 0)] - 5.0).abs() < 1e-14);
}

#[test]
fn hessian_blocks_match_finite_differences() {
    for seed in 0..4 {
        let pr = random_problem(100 + seed, 3, 2, 1.7);
        let s = random_state(200 + seed, 3, 2, 1.0);
        let d = objective_grad_hess(&pr, &s).unwrap();
        let fd = fd_hessian(&pr, &s);
        assert!(rel_fro(&d.hess, &fd) < 1e-5, "seed {seed}: {}", rel_fro(&d.hess, &fd));
        let g = fd_gradient(&pr, &s);
        assert!((&d.grad - &g).norm() <= 1e-6 * g.norm().max(1.0));
    }
}

#[test]
fn block_formulas_depend_on_one_component() {
    let pr = random_problem(7, 2, 3, 1.3);
    let s = random_state(8, 2, 3, 1.0);
    let mut s_theta = s.clone();
    s_theta.theta = Vector::from_vec(vec![-0.4, 2.0]);
    let mut s_a = s.clone();
    s_a.a = gaussian_mat(&mut rng(9), 3, 2);
    let b = objective_grad_hess(&pr, &s).unwrap().blocks(2).unwrap();
    let bt = objective_grad_hess(&pr, &s_theta).unwrap().blocks(2).unwrap();
    let ba = objective_grad_hess(&pr, &s_a).unwrap().blocks(2).unwrap();
    assert!(rel_fro(b.tt(), bt.tt()) < 1e-14);
    assert!(rel_fro(b.ee(), ba.ee()) < 1e-14);
    // And the finite-difference Hessian agrees at the perturbed states too.
    for st in [&s_theta, &s_a] {
        let d = objective_grad_hess(&pr, st).unwrap();
        assert!(rel_fro(&d.hess, &fd_hessian(&pr, st)) < 1e-5);
    }
}

#[test]
fn shape_mismatch_rejected() {
    let pr = random_problem(3, 2, 2, 1.0);
    let s = EioState { theta: Vector::zeros(3), a: Mat::zeros(2, 2) };
    assert!(objective_grad_hess(&pr, &s).is_err());
    assert!(matches!(
        EioProblem::new(Vector::zeros(3), Mat::zeros(2, 2), 1.0, PsdOperator::identity(2), None, None, 0.5),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(EioProblem::new(Vector::zeros(2), Mat::zeros(2, 2), 0.0, PsdOperator::identity(2), None, None, 0.5).is_err());
    assert!(EioProblem::new(
        Vector::zeros(2),
        Mat::zeros(2, 2),
        1.0,
        PsdOperator::identity(2),
        Some(PsdOperator::scaled_identity(2, 2.0)),
        None,
        0.5
    )
    .is_err());
}

#[test]
fn fourth_derivative_is_state_independent() {
    let pr = random_problem(11, 2, 2, 1.5);
    let model = EioModel::new(pr.clone()).unwrap();
    let mut r = rng(12);
    let w = gaussian_vec(&mut r, 6);
    let s1 = random_state(13, 2, 2, 1.0).stack();
    let s2 = random_state(14, 2, 2, 3.0).stack();
    // Quartic along a line: the fourth difference is exact up to rounding.
    let h = 0.5;
    let f = |at: &Vector, t: f64| model.eval(&(at + &w * t));
    let fourth = |at: &Vector| {
        (f(at, 2.0 * h) - 4.0 * f(at, h) + 6.0 * f(at, 0.0) - 4.0 * f(at, -h) + f(at, -2.0 * h)) / h.powi(4)
    };
    let d1 = fourth(&s1);
    let d2 = fourth(&s2);
    assert!((d1 - d2).abs() <= 1e-8 * d1.abs().max(1.0));
    let xi = w.rows(0, 2);
    let mut want = 0.0;
    for m in 0..2 {
        let om = w.rows(2 + 2 * m, 2);
        want += xi.dot(&om).powi(2);
    }
    assert!((d1 + 12.0 * want).abs() <= 1e-7 * want.max(1.0));
    assert!((model.fourth(&s1, &w) - d1).abs() <= 1e-7 * want.max(1.0));
    assert!((model.fourth(&s2, &w) - d2).abs() <= 1e-7 * want.max(1.0));
}

#[test]
fn warm_start_examples() {
    let mut r = rng(20);
    let a = gaussian_mat(&mut r, 3, 2);
    let pr = EioProblem::new(Vector::zeros(3), a.clone(), 1.0, PsdOperator::identity(2), None, None, 0.5).unwrap();
    let w = warm_start_check(&pr, &EioState { theta: Vector::zeros(2), a }).unwrap();
    assert!(w.in_region);
    assert!((w.theta_margin - 0.5).abs() < 1e-15);
    assert!(w.residual_margin > 0.0);

    // ‖θ‖² = ρμ²/4 exactly.
    let pr = scalar_problem(0.0, 1.0, 2.0, 1.0, 1.0, 0.25);
    let w = warm_start_check(&pr, &EioState { theta: Vector::from_vec(vec![0.5]), a: Mat::from_element(1, 1, 0.0) })
        .unwrap();
    assert_eq!(w.theta_margin, 0.0);

    let pr = scalar_problem(1.0, 1.0, 4.0, 0.0, 0.0, 0.5);
    let w = warm_start_check(&pr, &EioState { theta: Vector::from_vec(vec![1.0]), a: Mat::from_element(1, 1, 1.0) })
        .unwrap();
    assert!(w.in_region);
    assert!((w.theta_margin - 4.0).abs() < 1e-14);
    assert!((w.residual_margin - 8.0).abs() < 1e-14);

    let w = warm_start_check(&pr, &EioState { theta: Vector::from_vec(vec![1.5]), a: Mat::from_element(1, 1, 1.0) })
        .unwrap();
    assert!(!w.in_region);
}

#[test]
fn dims_examples() {
    let mut r = rng(30);
    let a = gaussian_mat(&mut r, 3, 2);
    let g2 = spd_op(&mut r, 2, 0.2);
    let pr = EioProblem::new(Vector::zeros(3), a.clone(), 1.3, g2, None, None, 0.5).unwrap();
    let d = dims(&pr, &EioState { theta: Vector::zeros(2), a: a.clone() }).unwrap();
    assert!((d.p_target - 2.0).abs() < 1e-12);
    assert!((d.q_nuis - 6.0).abs() < 1e-12);
    assert!((d.p_full_bound - (2.0 / 0.5 + 1.125 * 6.0 / 0.5)).abs() < 1e-12);

    let a = Mat::from_row_slice(1, 2, &[3f64.sqrt(), 0.0]);
    let mu = 2.5;
    let k = PsdOperator::diag(&[0.0, 3.0 * mu * mu]).unwrap();
    let pr = EioProblem::new(
        Vector::zeros(1),
        a.clone(),
        mu,
        PsdOperator::identity(2),
        Some(PsdOperator::zeros(2)),
        Some(vec![k]),
        0.5,
    )
    .unwrap();
    let d = dims(&pr, &EioState { theta: Vector::zeros(2), a }).unwrap();
    assert!((d.p_target - 0.75).abs() < 1e-12);
    assert!((d.q_nuis - 1.25).abs() < 1e-12);
}

#[test]
fn plug_in_examples() {
    let z = Vector::from_vec(vec![0.3, -1.2, 5.0]);
    let pr = EioProblem::new(z.clone(), Mat::identity(3, 3), 1.0, PsdOperator::zeros(3), None, None, 0.5).unwrap();
    assert!((plug_in(&pr).unwrap() - &z).norm() < 1e-14);

    let pr = EioProblem::new(
        Vector::from_vec(vec![2.0, 4.0]),
        Mat::identity(2, 2),
        1.0,
        PsdOperator::identity(2),
        None,
        None,
        0.5,
    )
    .unwrap();
    assert!((plug_in(&pr).unwrap() - Vector::from_vec(vec![1.0, 2.0])).norm() < 1e-14);

    let pr = EioProblem::new(Vector::zeros(2), Mat::zeros(2, 2), 1.0, PsdOperator::zeros(2), None, None, 0.5).unwrap();
    assert!(matches!(plug_in(&pr), Err(Error::Singular { .. })));
}

#[test]
fn joint_fit_tends_to_plug_in_for_large_mu() {
    let mut r = rng(40);
    let a_hat = gaussian_mat(&mut r, 3, 2) + Mat::from_row_slice(3, 2, &[2.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
    let z = gaussian_vec(&mut r, 3);
    let g2 = PsdOperator::scaled_identity(2, 0.5);
    let mut prev = f64::INFINITY;
    for mu in [1e2, 1e4, 1e6] {
        let pr = EioProblem::new(z.clone(), a_hat.clone(), mu, g2.clone(), None, None, 0.5).unwrap();
        let (fit, res) = fit_joint(&pr, &plug_in_state(&pr).unwrap()).unwrap();
        assert!(res.converged);
        let diff = (&fit.theta - plug_in(&pr).unwrap()).norm();
        assert!(diff <= prev);
        prev = diff;
        if mu == 1e6 {
            assert!(diff <= 1e-6, "{diff}");
        }
    }
}

#[test]
fn zero_residual_fixed_point() {
    let mut r = rng(50);
    let a_hat = gaussian_mat(&mut r, 4, 2);
    let theta0 = Vector::from_vec(vec![0.7, -0.4]);
    let z = &a_hat * &theta0;
    let pr = EioProblem::new(z, a_hat.clone(), 3.0, PsdOperator::zeros(2), None, None, 0.5).unwrap();
    let init = EioState { theta: &theta0 * 0.9, a: a_hat.clone() };
    let (fit, res) = fit_joint(&pr, &init).unwrap();
    assert!((&fit.theta - &theta0).norm() < 1e-7);
    assert!((&fit.a - &a_hat).norm() < 1e-7);
    assert!(res.grad_norm <= 1e-8 * (1.0 + fit.theta.norm() + fit.a.norm()));
}

/// Repeated zooming grid search for the scalar objective.
fn grid_argmax(f: &dyn Fn(f64, f64) -> f64, mut c: (f64, f64), mut half: (f64, f64)) -> (f64, f64) {
    let k = 100;
    for _ in 0..12 {
        let mut best = (f64::NEG_INFINITY, c);
        for i in 0..=2 * k {
            for j in 0..=2 * k {
                let t = c.0 + half.0 * (i as f64 - k as f64) / k as f64;
                let a = c.1 + half.1 * (j as f64 - k as f64) / k as f64;
                let v = f(t, a);
                if v > best.0 {
                    best = (v, (t, a));
                }
            }
        }
        c = best.1;
        half = (half.0 * 0.05, half.1 * 0.05);
    }
    c
}

#[test]
fn scalar_fit_matches_grid_argmax() {
    let (z, ah, mu, g) = (1.3, 0.8, 3.0, 0.4);
    let pr = scalar_problem(z, ah, mu, g, g, 0.5);
    let init = plug_in_state(&pr).unwrap();
    let (fit, res) = fit_joint(&pr, &init).unwrap();
    assert!(res.converged);
    let f = |t: f64, a: f64| -0.5 * (z - a * t).powi(2) - 0.5 * mu * mu * (ah - a).powi(2) - 0.5 * g * t * t;
    let (t, a) = grid_argmax(&f, (0.0, 0.0), (4.0, 4.0));
    assert!((fit.theta[0] - t).abs() <= 1e-4, "{} vs {t}", fit.theta[0]);
    assert!((fit.a[(0, 0)] - a).abs() <= 1e-4);
}

#[test]
fn fit_outside_region_fails() {
    let pr = scalar_problem(1.0, 1.0, 1.0, 0.0, 0.0, 0.5);
    let bad = EioState { theta: Vector::from_vec(vec![5.0]), a: Mat::from_element(1, 1, 1.0) };
    assert!(matches!(fit_joint(&pr, &bad), Err(Error::WarmStart(_))));
}

#[test]
fn fit_beats_plug_in_state() {
    for seed in 0..5 {
        let mut r = rng(60 + seed);
        let a_hat = gaussian_mat(&mut r, 3, 2) + Mat::from_row_slice(3, 2, &[2.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        let z = gaussian_vec(&mut r, 3);
        let pr = EioProblem::new(z, a_hat, 4.0, PsdOperator::identity(2), None, None, 0.5).unwrap();
        let start = plug_in_state(&pr).unwrap();
        if !warm_start_check(&pr, &start).unwrap().in_region {
            continue;
        }
        let (fit, _) = fit_joint(&pr, &start).unwrap();
        assert!(objective(&pr, &fit).unwrap() >= objective(&pr, &start).unwrap() - 1e-12);
    }
}

#[test]
fn analytic_constants() {
    let pr = scalar_problem(0.0, 1.0, 2.0, 1.0, 1.0, 0.5);
    let c = self_concordance_constants(&pr);
    assert_eq!(c.c3, 3.0);
    assert_eq!(c.c4, 0.75);
    let pr = scalar_problem(0.0, 1.0, 6.0, 1.0, 1.0, 0.5);
    assert_eq!(self_concordance_constants(&pr).c3, 1.0);
}

#[test]
fn empirical_constants_within_analytic() {
    let mut r = rng(70);
    let a_hat = gaussian_mat(&mut r, 3, 2) * 2.0;
    let theta0 = Vector::from_vec(vec![0.5, -0.3]);
    let z = &a_hat * &theta0 + gaussian_vec(&mut r, 3) * 0.2;
    let pr = EioProblem::new(z, a_hat, 3.0, PsdOperator::identity(2), None, None, 0.5).unwrap();
    let (fit, _) = fit_joint(&pr, &plug_in_state(&pr).unwrap()).unwrap();
    let cfg = ProbeConfig { n_directions: 10_000, shells: 1, seed: 71 };
    let sc = empirical_self_concordance(&pr, &fit, &cfg).unwrap();
    let c = self_concordance_constants(&pr);
    assert!(sc.c3_hat <= 1.05 * c.c3, "{} vs {}", sc.c3_hat, c.c3);
    assert!(sc.c4_hat <= 1.05 * c.c4, "{} vs {}", sc.c4_hat, c.c4);
    assert!(sc.c3_hat > 0.0);
}

#[test]
fn regression_ingestion_examples() {
    let priors = || RegressionPriors { g2: PsdOperator::identity(1), g02: None, k2: None, rho: 0.5 };
    let x = vec![vec![1.0], vec![2.0]];
    let feat = |v: &[f64]| vec![v[0]];
    let ing = ingest_regression(&x, &[1.0, 1.0], &feat, &feat, 1.0, 1.0, priors()).unwrap();
    assert_eq!(ing.a_hat_raw[(0, 0)], 5.0);
    assert_eq!(ing.z_raw[0], 3.0);
    assert_eq!(ing.mu_sq_raw, 2.0);
    assert!((ing.problem.mu() - 2.0).abs() < 1e-14);

    // Basis vectors as features give the identity.
    let x: Vec<Vec<f64>> = (0..3).map(|i| vec![i as f64]).collect();
    let basis = |v: &[f64]| {
        let mut e = vec![0.0; 3];
        e[v[0] as usize] = 1.0;
        e
    };
    let pri = RegressionPriors { g2: PsdOperator::identity(3), g02: None, k2: None, rho: 0.5 };
    let ing = ingest_regression(&x, &[0.0; 3], &basis, &basis, 1.0, 1.0, pri).unwrap();
    assert_eq!(ing.a_hat_raw, Mat::identity(3, 3));

    assert!(ingest_regression(&[], &[], &feat, &feat, 1.0, 1.0, priors()).is_err());
}

#[test]
fn certificate_condition_arithmetic() {
    let pr = scalar_problem(0.0, 1.0, 6.0, 1.0, 1.0, 0.5);
    let c3 = self_concordance_constants(&pr).c3;
    let v: f64 = c3 * 6.0 / 400f64.sqrt();
    assert!((v - 0.3).abs() < 1e-15);
    assert!(v <= 1.0 / 3.0);
}

#[test]
fn certificate_large_mu_reduces_to_tail() {
    let mut r = rng(80);
    let a_hat = gaussian_mat(&mut r, 3, 2) * 3.0;
    let z = gaussian_vec(&mut r, 3);
    let pr = EioProblem::new(z, a_hat, 1e9, PsdOperator::identity(2), None, None, 0.5).unwrap();
    let (fit, _) = fit_joint(&pr, &plug_in_state(&pr).unwrap()).unwrap();
    let cert = eio_laplace_certificate(&pr, &fit, &Mat::identity(2, 2), 3.0, 0.5, 2.0).unwrap();
    assert!((cert.bound.total - (-3f64).exp()).abs() < 1e-6);
    assert!(cert.applicable);
}

#[test]
fn scalar_marginal_against_grid() {
    let (z, ah, mu, g) = (10.5, 10.0, 20.0, 1.0);
    let pr = scalar_problem(z, ah, mu, g, g, 0.5);
    let (fit, _) = fit_joint(&pr, &plug_in_state(&pr).unwrap()).unwrap();
    let ft = fit.a[(0, 0)].powi(2) + g;
    let q = Mat::from_element(1, 1, ft.sqrt());
    let cert = eio_laplace_certificate(&pr, &fit, &q, 3.0, 0.5, 2.0).unwrap();
    let fb = cert.efficient.matrix()[(0, 0)];
    let t0 = fit.theta[0];
    let a0 = fit.a[(0, 0)];
    let st = 1.0 / fb.sqrt();
    let sa = 1.0 / mu;
    let f = |t: f64, a: f64| -0.5 * (z - a * t).powi(2) - 0.5 * mu * mu * (ah - a).powi(2) - 0.5 * g * t * t;
    let (nt, na) = (1200usize, 600usize);
    let (lt, ht) = (t0 - 10.0 * st, t0 + 10.0 * st);
    let (la, ha) = (a0 - 12.0 * sa, a0 + 12.0 * sa);
    let dt = (ht - lt) / nt as f64;
    let da = (ha - la) / na as f64;
    let fmax = f(t0, a0);
    let mut marg = vec![0.0; nt];
    for (i, m) in marg.iter_mut().enumerate() {
        let t = lt + (i as f64 + 0.5) * dt;
        for j in 0..na {
            let a = la + (j as f64 + 0.5) * da;
            *m += (f(t, a) - fmax).exp();
        }
    }
    let tot: f64 = marg.iter().sum();
    let gauss = Normal::new(t0, st).unwrap();
    let mut tv = 0.0;
    let mut inside = 0.0;
    for (i, m) in marg.iter().enumerate() {
        let qm = gauss.cdf(lt + (i + 1) as f64 * dt) - gauss.cdf(lt + i as f64 * dt);
        inside += qm;
        tv += (m / tot - qm).abs();
    }
    let tv = 0.5 * tv + 0.5 * (1.0 - inside);
    assert!(tv <= cert.bound.total, "{tv} vs {}", cert.bound.total);
    assert!(tv < 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn p_target_nonincreasing_in_g2(seed in 0u64..10_000, extra in 0.0f64..3.0) {
        let mut r = rng(seed);
        let a = gaussian_mat(&mut r, 3, 2);
        let g2 = spd_op(&mut r, 2, 0.2);
        let g02 = g2.scale(0.5).unwrap();
        let bump = spd_op(&mut r, 2, 0.0).scale(extra).unwrap();
        let g2b = g2.add(&bump).unwrap();
        let s = EioState { theta: Vector::zeros(2), a: a.clone() };
        let pa = EioProblem::new(Vector::zeros(3), a.clone(), 1.0, g2, Some(g02.clone()), None, 0.5).unwrap();
        let pb = EioProblem::new(Vector::zeros(3), a, 1.0, g2b, Some(g02), None, 0.5).unwrap();
        prop_assert!(dims(&pb, &s).unwrap().p_target <= dims(&pa, &s).unwrap().p_target + 1e-12);
    }

    #[test]
    fn q_nuis_nonincreasing_in_k(seed in 0u64..10_000, extra in 0.0f64..3.0) {
        let mut r = rng(seed);
        let a = gaussian_mat(&mut r, 2, 2);
        let k: Vec<PsdOperator> = (0..2).map(|_| spd_op(&mut r, 2, 0.0)).collect();
        let kb: Vec<PsdOperator> = k.iter().map(|m| m.add(&spd_op(&mut r, 2, 0.0).scale(extra).unwrap()).unwrap()).collect();
        let s = EioState { theta: Vector::zeros(2), a: a.clone() };
        let g = PsdOperator::identity(2);
        let pa = EioProblem::new(Vector::zeros(2), a.clone(), 1.5, g.clone(), None, Some(k), 0.5).unwrap();
        let pb = EioProblem::new(Vector::zeros(2), a, 1.5, g, None, Some(kb), 0.5).unwrap();
        prop_assert!(dims(&pb, &s).unwrap().q_nuis <= dims(&pa, &s).unwrap().q_nuis + 1e-12);
    }

    #[test]
    fn json_round_trip(seed in 0u64..1000) {
        let pr = random_problem(seed, 2, 2, 1.1);
        let s = serde_json::to_string(&pr).unwrap();
        let back: EioProblem = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, pr);
    }
}
