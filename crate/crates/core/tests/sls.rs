mod common;

use approx::assert_relative_eq;
use common::*;
use lapcert::linalg::{Mat, PsdOperator, Vector};
use lapcert::sls::{
    estimate_omega, estimate_self_concordance, LinearGaussian, Logistic, Monomial, Polynomial, ProbeConfig,
    SlsModel,
};
use lapcert::Error;
use proptest::prelude::*;

fn own_fd_grad(m: &dyn SlsModel, at: &Vector) -> Vector {
    let h = 1e-5;
    Vector::from_fn(at.len(), |i, _| {
        let mut a = at.clone();
        let mut b = at.clone();
        a[i] += h;
        b[i] -= h;
        (m.eval(&a) - m.eval(&b)) / (2.0 * h)
    })
}

fn own_fd_neg_hess(m: &dyn SlsModel, at: &Vector) -> Mat {
    let h = 1e-5;
    let n = at.len();
    Mat::from_fn(n, n, |i, j| {
        let mut a = at.clone();
        let mut b = at.clone();
        a[j] += h;
        b[j] -= h;
        -(m.grad(&a)[i] - m.grad(&b)[i]) / (2.0 * h)
    })
}

fn cubic(eps: f64) -> Polynomial {
    Polynomial::new(
        vec![Monomial { coef: eps, powers: vec![3] }],
        PsdOperator::identity(1),
    )
    .unwrap()
}

#[test]
fn linear_gaussian_maximizers() {
    let y = Vector::from_vec(vec![1.0, 2.0]);
    let m = LinearGaussian::new(Mat::identity(2, 2), y.clone(), 1.0, PsdOperator::zeros(2)).unwrap();
    assert_relative_eq!(m.maximizer(), y, epsilon = 1e-14);
    let m = LinearGaussian::new(Mat::identity(2, 2), y, 1.0, PsdOperator::identity(2)).unwrap();
    assert_relative_eq!(m.maximizer(), Vector::from_vec(vec![0.5, 1.0]), epsilon = 1e-14);
}

#[test]
fn linear_gaussian_rank_deficient_is_ill_posed() {
    let x = Mat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    let r = LinearGaussian::new(x, Vector::zeros(2), 1.0, PsdOperator::zeros(2));
    assert!(matches!(r, Err(Error::IllPosed(_))));
}

#[test]
fn linear_gaussian_omega_is_zero() {
    let mut r = rng(7);
    let x = gaussian_mat(&mut r, 20, 3);
    let y = gaussian_vec(&mut r, 20);
    let m = LinearGaussian::new(x, y, 0.5, PsdOperator::identity(3)).unwrap();
    let c = m.maximizer();
    let d2 = PsdOperator::from_sym(&m.hess(&c)).unwrap();
    let o = estimate_omega(&m, &c, &d2, 2.0, &ProbeConfig::default()).unwrap();
    assert_eq!(o.omega_hat, 0.0);
    let sc = estimate_self_concordance(&m, &c, &d2, 20.0, &ProbeConfig::default()).unwrap();
    assert_eq!((sc.c3_hat, sc.c4_hat), (0.0, 0.0));
}

#[test]
fn logistic_degenerate_gradient() {
    let m = Logistic::new(Mat::zeros(4, 2), Vector::zeros(4), PsdOperator::zeros(2)).unwrap();
    assert_eq!(m.grad(&Vector::zeros(2)).norm(), 0.0);
}

#[test]
fn logistic_one_dim_gradient_at_zero() {
    let m = Logistic::new(Mat::identity(1, 1), Vector::from_vec(vec![1.0]), PsdOperator::zeros(1)).unwrap();
    assert_relative_eq!(m.grad(&Vector::zeros(1))[0], 0.5, epsilon = 1e-15);
}

#[test]
fn logistic_rejects_non_binary_labels() {
    let r = Logistic::new(Mat::identity(1, 1), Vector::from_vec(vec![0.5]), PsdOperator::zeros(1));
    assert!(matches!(r, Err(Error::Validation(_))));
}

#[test]
fn logistic_derivatives_match_finite_differences() {
    let (m, truth) = random_logistic(11, 80, 3);
    for k in 0..5 {
        let mut r = rng(100 + k);
        let at = &truth + gaussian_vec(&mut r, 3) * 0.3;
        let g = m.grad(&at);
        let fd = own_fd_grad(&m, &at);
        assert!((&g - &fd).norm() <= 1e-6 * (1.0 + g.norm()));
        let h = m.hess(&at);
        let fdh = own_fd_neg_hess(&m, &at);
        assert!((&h - &fdh).norm() <= 1e-5 * (1.0 + h.norm()));
    }
}

#[test]
fn omega_of_cubic_is_attained_at_boundary() {
    let eps = 0.05;
    let m = cubic(eps);
    let d2 = PsdOperator::identity(1);
    for r in [0.5, 1.0, 2.0] {
        let o = estimate_omega(&m, &Vector::zeros(1), &d2, r, &ProbeConfig::default()).unwrap();
        assert_relative_eq!(o.omega_hat, 2.0 * eps * r, max_relative = 1e-9);
    }
}

#[test]
fn c4_of_quartic() {
    let m = Polynomial::new(
        vec![Monomial { coef: -1.0, powers: vec![4] }],
        PsdOperator::identity(1),
    )
    .unwrap();
    let sc = estimate_self_concordance(
        &m,
        &Vector::zeros(1),
        &PsdOperator::identity(1),
        1.0,
        &ProbeConfig::default(),
    )
    .unwrap();
    assert_relative_eq!(sc.c4_hat, 24.0, max_relative = 1e-6);
    assert!(sc.c3_hat.abs() < 1e-6);
}

#[test]
fn logistic_omega_matches_slice_grid() {
    let (m, truth) = random_logistic(5, 60, 1);
    let c = lapcert::pmle::fit(&m, &truth, &Default::default()).unwrap().maximizer;
    let h = m.hess(&c)[(0, 0)];
    let d2 = PsdOperator::diag(&[h]).unwrap();
    let radius = 2.0;
    let est = estimate_omega(&m, &c, &d2, radius, &ProbeConfig::default()).unwrap().omega_hat;
    // Dense grid over the slice, δ₃ computed from the plain objective.
    let f0 = m.eval(&c);
    let g0 = m.grad(&c)[0];
    let mut sup = 0.0_f64;
    for k in 1..=4000 {
        for sign in [-1.0, 1.0] {
            let t = sign * radius * k as f64 / 4000.0;
            let u = t / h.sqrt();
            let d3 = m.eval(&(&c + Vector::from_element(1, u))) - f0 - g0 * u + 0.5 * h * u * u;
            sup = sup.max(2.0 * d3.abs() / (t * t));
        }
    }
    assert!(est <= sup * (1.0 + 1e-9));
    assert!(est >= 0.9 * sup, "est {est} grid {sup}");
}

#[test]
fn probe_failure_on_non_finite_objective() {
    let m = Polynomial::new(
        vec![Monomial { coef: 1e308, powers: vec![6] }],
        PsdOperator::identity(1),
    )
    .unwrap();
    let r = estimate_omega(&m, &Vector::zeros(1), &PsdOperator::identity(1), 10.0, &ProbeConfig::default());
    assert!(matches!(r, Err(Error::ProbeFailure { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decomposition_is_consistent(seed in any::<u64>()) {
        let (m, _) = random_logistic(seed, 30, 2);
        let mut r = rng(seed ^ 1);
        for _ in 0..100 {
            let u = gaussian_vec(&mut r, 2);
            let lhs = m.eval(&u) + 0.5 * m.penalty().quad_form(&u);
            let rhs = m.smooth_part(&u);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn omega_monotone_in_radius(seed in any::<u64>(), r1 in 0.1f64..2.0) {
        let (m, truth) = random_logistic(seed, 40, 2);
        let d2 = PsdOperator::from_sym(&m.hess(&truth)).unwrap();
        let cfg = ProbeConfig { n_directions: 32, shells: 8, seed };
        // Doubling the radius with twice the shells keeps every old probe point.
        let a = estimate_omega(&m, &truth, &d2, r1, &cfg).unwrap().omega_hat;
        let b = estimate_omega(&m, &truth, &d2, 2.0 * r1, &ProbeConfig { shells: 16, ..cfg }).unwrap().omega_hat;
        prop_assert!(b >= a * (1.0 - 1e-12));
    }

    #[test]
    fn omega_invariant_under_affine_shift(seed in any::<u64>(), a0 in -5.0f64..5.0, a1 in -5.0f64..5.0) {
        let eps = 0.1;
        let base = cubic(eps);
        let shifted = Polynomial::new(
            vec![
                Monomial { coef: eps, powers: vec![3] },
                Monomial { coef: a0, powers: vec![0] },
                Monomial { coef: a1, powers: vec![1] },
            ],
            PsdOperator::identity(1),
        ).unwrap();
        let cfg = ProbeConfig { n_directions: 2, shells: 8, seed };
        let d2 = PsdOperator::identity(1);
        let c = Vector::from_element(1, 0.3);
        let x = estimate_omega(&base, &c, &d2, 1.0, &cfg).unwrap().omega_hat;
        let y = estimate_omega(&shifted, &c, &d2, 1.0, &cfg).unwrap().omega_hat;
        prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x));
    }
}
