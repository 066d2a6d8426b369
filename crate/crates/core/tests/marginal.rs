mod common;

use approx::assert_relative_eq;
use common::*;
use lapcert::gauss_compare::normal_cdf;
use lapcert::linalg::{BlockOperator, Mat, PsdOperator, Vector};
use lapcert::marginal::{
    bias_sup, homogenization_error, linear_warm_start, marginal_concentration, marginal_tv_bound,
    marginal_tv_bound_checked, mixture_marginal, nuisance_grid, orthogonalize, pinsker_display_bound, profile,
    profile_grid, separability, target_dimension, MarginalTvInputs, MixtureMarginal, NuisanceProfile,
    ProfileReference,
};
use lapcert::sls::{LinearGaussian, Monomial, Polynomial, SlsModel};
use lapcert::Error;
use proptest::prelude::*;

fn mono(coef: f64, powers: &[u32]) -> Monomial {
    Monomial { coef, powers: powers.to_vec() }
}

/// `f = −(θ² + θη + η²)`.
fn coupled_quadratic(shift: f64) -> Polynomial {
    Polynomial::new(
        vec![mono(-1.0, &[2, 0]), mono(-1.0, &[1, 1]), mono(-1.0, &[0, 2]), mono(shift, &[0, 0])],
        PsdOperator::zeros(2),
    )
    .unwrap()
}

/// Quadratic with random curvature `H` and maximizer `m`: `−½(u−m)ᵀH(u−m)` up to a constant.
fn random_quadratic(seed: u64, dim: usize) -> (LinearGaussian, Vector, Mat) {
    let mut r = rng(seed);
    let x = gaussian_mat(&mut r, dim + 6, dim);
    let m = gaussian_vec(&mut r, dim);
    let lg = LinearGaussian::new(x.clone(), &x * &m, 1.0, PsdOperator::zeros(dim)).unwrap();
    (lg, m, x.transpose() * x)
}

fn mixture_for(model: &dyn SlsModel, ups: &Vector, p: usize, half: f64, res: usize) -> MixtureMarginal {
    let reference = ProfileReference::new(&model, ups, p).unwrap();
    let grid = nuisance_grid(&reference.eta_star(), &vec![half; ups.len() - p], res).unwrap();
    let profiles = profile_grid(&model, &reference, &grid).unwrap();
    let f = BlockOperator::from_full(&model.hess(ups), p).unwrap();
    let sep = separability(&f).unwrap();
    MixtureMarginal::new(profiles, &Mat::identity(p, p), sep.efficient, grid.volumes, &reference.theta_star())
        .unwrap()
}

#[test]
fn coupled_quadratic_profile_closed_form() {
    let m = coupled_quadratic(0.0);
    let reference = ProfileReference::new(&m, &Vector::zeros(2), 1).unwrap();
    for eta in [-1.3, 0.0, 0.7, 2.0] {
        let e = Vector::from_element(1, eta);
        let pr = profile(&m, &e, &Vector::zeros(1), &reference).unwrap();
        assert_relative_eq!(pr.theta_eta[0], -eta / 2.0, epsilon = 1e-9);
        assert_relative_eq!(pr.f_eta.matrix()[(0, 0)], 2.0, epsilon = 1e-12);
        assert_relative_eq!(pr.phi_eta, -0.75 * eta * eta, epsilon = 1e-9);
        assert_relative_eq!(pr.delta_eta, 0.0, epsilon = 1e-12);
        assert!(pr.phi_eta <= 1e-9);
    }
}

#[test]
fn separable_profile_is_constant() {
    // f = −θ² + θ − η⁴ − η².
    let m = Polynomial::new(
        vec![mono(-1.0, &[2, 0]), mono(1.0, &[1, 0]), mono(-1.0, &[0, 4]), mono(-1.0, &[0, 2])],
        PsdOperator::zeros(2),
    )
    .unwrap();
    let ups = Vector::from_vec(vec![0.5, 0.0]);
    let reference = ProfileReference::new(&m, &ups, 1).unwrap();
    for eta in [-1.0, 0.3, 1.1] {
        let pr = profile(&m, &Vector::from_element(1, eta), &Vector::zeros(1), &reference).unwrap();
        assert_relative_eq!(pr.theta_eta[0], 0.5, epsilon = 1e-10);
    }
    let mix = mixture_for(&m, &ups, 1, 1.5, 31);
    let radii = [0.1, 0.3, 0.7, 1.5];
    let a = mix.cdf(&radii, 1000, 1).unwrap();
    let b = mix.reference_cdf(&radii, 1000, 1).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn random_quadratic_profile_is_linear() {
    let (m, ups, h) = random_quadratic(5, 5);
    let reference = ProfileReference::new(&m, &ups, 2).unwrap();
    let f = BlockOperator::from_full(&h, 2).unwrap();
    let mut r = rng(6);
    for _ in 0..5 {
        let eta = reference.eta_star() + gaussian_vec(&mut r, 3);
        let pr = profile(&m, &eta, &Vector::zeros(2), &reference).unwrap();
        let tt = f.tt().clone().try_inverse().unwrap();
        let oracle = reference.theta_star() - tt * f.te() * (&eta - reference.eta_star());
        assert!((Vector::from_column_slice(&pr.theta_eta) - &oracle).norm() <= 1e-9 * (1.0 + oracle.norm()));
        let warm = linear_warm_start(&f, &reference, &eta).unwrap();
        assert!((warm - oracle).norm() <= 1e-9);
    }
}

#[test]
fn reference_point_has_zero_deficiency() {
    let (m, ups, _) = random_quadratic(7, 3);
    let reference = ProfileReference::new(&m, &ups, 1).unwrap();
    let pr = profile(&m, &reference.eta_star(), &reference.theta_star(), &reference).unwrap();
    assert!(pr.phi_eta.abs() < 1e-9);
    assert!(pr.delta_eta.abs() < 1e-12);
}

#[test]
fn separability_examples() {
    let f = BlockOperator::new(Mat::identity(2, 2) * 3.0, Mat::zeros(2, 1), Mat::identity(1, 1)).unwrap();
    let s = separability(&f).unwrap();
    assert_eq!(s.rho, 0.0);
    assert_relative_eq!(s.efficient.matrix()[(0, 0)], 3.0);

    let f = BlockOperator::from_full(&Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]), 1).unwrap();
    let s = separability(&f).unwrap();
    assert_relative_eq!(s.rho, 0.25, epsilon = 1e-15);
    assert_relative_eq!(s.efficient.matrix()[(0, 0)], 1.5, epsilon = 1e-15);
    assert_relative_eq!((1.0 - s.rho) * 2.0, 1.5, epsilon = 1e-15);
    assert!(s.sandwich_ok);
}

#[test]
fn separability_singular_nuisance() {
    let f = BlockOperator::new(Mat::identity(1, 1), Mat::zeros(1, 1), Mat::zeros(1, 1)).unwrap();
    assert!(matches!(separability(&f), Err(Error::Singular { .. })));
}

#[test]
fn orthogonalize_coupled_quadratic() {
    let m = coupled_quadratic(0.0);
    let ups = Vector::zeros(2);
    let f = BlockOperator::from_full(&m.hess(&ups), 1).unwrap();
    let o = orthogonalize(&m, &ups, &f).unwrap();
    assert_relative_eq!(o.coupling()[(0, 0)], 0.5, epsilon = 1e-15);
    let h = o.hess(&ups);
    assert_relative_eq!(h[(0, 0)], 1.5, epsilon = 1e-12);
    assert!(h[(0, 1)].abs() < 1e-12);
}

#[test]
fn orthogonalize_already_orthogonal() {
    let m = Polynomial::new(vec![mono(-1.0, &[2, 0]), mono(-2.0, &[0, 2])], PsdOperator::zeros(2)).unwrap();
    let ups = Vector::zeros(2);
    let f = BlockOperator::from_full(&m.hess(&ups), 1).unwrap();
    let o = orthogonalize(&m, &ups, &f).unwrap();
    assert_eq!(o.coupling()[(0, 0)], 0.0);
    let u = Vector::from_vec(vec![0.3, -0.8]);
    assert_eq!(o.eval(&u), m.eval(&u));
}

#[test]
fn mixture_of_coupled_quadratic_is_exact_marginal() {
    let m = coupled_quadratic(0.0);
    let ups = Vector::zeros(2);
    let mix = mixture_for(&m, &ups, 1, 8.0, 321);
    let (mean, cov) = mix.moments().unwrap();
    assert!(mean[0].abs() < 1e-10);
    assert_relative_eq!(cov[(0, 0)], 2.0 / 3.0, epsilon = 1e-8);
    // Rank-one Q: the ball probabilities are exact.
    let radii: Vec<f64> = (1..=30).map(|k| 0.1 * k as f64).collect();
    let cdf = mix.cdf(&radii, 1, 0).unwrap();
    let sd = (2.0f64 / 3.0).sqrt();
    for (r, p) in radii.iter().zip(&cdf) {
        let exact = normal_cdf(r / sd) - normal_cdf(-r / sd);
        assert!((p - exact).abs() < 1e-8, "r={r}: {p} vs {exact}");
    }
    let single = mixture_marginal(&mix, 1.0, 3).unwrap();
    assert!((single - (normal_cdf(1.0 / sd) - normal_cdf(-1.0 / sd))).abs() < 1e-8);
}

#[test]
fn single_profile_reduces_to_gaussian() {
    let m = coupled_quadratic(0.0);
    let reference = ProfileReference::new(&m, &Vector::zeros(2), 1).unwrap();
    let pr = profile(&m, &Vector::zeros(1), &Vector::zeros(1), &reference).unwrap();
    let mix = MixtureMarginal::new(
        vec![pr],
        &Mat::identity(1, 1),
        PsdOperator::diag(&[2.0]).unwrap(),
        vec![1.0],
        &Vector::zeros(1),
    )
    .unwrap();
    let a = mix.cdf(&[0.5, 1.0], 1, 0).unwrap();
    let b = mix.reference_cdf(&[0.5, 1.0], 1, 0).unwrap();
    assert_relative_eq!(a[0], b[0], epsilon = 1e-14);
    assert_relative_eq!(a[1], b[1], epsilon = 1e-14);
}

#[test]
fn empty_mixture_is_rejected() {
    let r = MixtureMarginal::new(vec![], &Mat::identity(1, 1), PsdOperator::identity(1), vec![], &Vector::zeros(1));
    assert!(matches!(r, Err(Error::EmptyGrid)));
}

fn synthetic_profile(f_eta: f64) -> NuisanceProfile {
    NuisanceProfile {
        eta: vec![0.0],
        theta_eta: vec![0.0],
        f_eta: PsdOperator::diag(&[f_eta]).unwrap(),
        phi_eta: 0.0,
        delta_eta: 0.0,
        weight: 1.0,
    }
}

#[test]
fn homogenization_examples() {
    let f_ref = PsdOperator::diag(&[4.0]).unwrap();
    let mix = MixtureMarginal::new(vec![synthetic_profile(4.0)], &Mat::identity(1, 1), f_ref.clone(), vec![1.0], &Vector::zeros(1))
        .unwrap();
    assert_eq!(homogenization_error(&mix).unwrap().delta_f, 0.0);

    let dp = 0.2;
    let mix = MixtureMarginal::new(
        vec![synthetic_profile((1.0 - dp) * 4.0)],
        &Mat::identity(1, 1),
        f_ref,
        vec![1.0],
        &Vector::zeros(1),
    )
    .unwrap();
    let h = homogenization_error(&mix).unwrap();
    assert_relative_eq!(h.delta_plus, dp, epsilon = 1e-14);
    assert_relative_eq!(h.delta_f, dp / (1.0 - dp), epsilon = 1e-12);
    assert_relative_eq!(h.delta_f, h.bound, epsilon = 1e-12);
}

#[test]
fn marginal_tv_bound_arithmetic() {
    let zero = MarginalTvInputs {
        c3: 0.0,
        r_eta_star: 4.0,
        dim_a_eta_star: 2.0,
        r_bar: 6.0,
        dim_q: 2.0,
        n: 1e4,
        x: 3.0,
        calibration: 2.0,
    };
    assert_relative_eq!(marginal_tv_bound(&zero).unwrap().total, (-3.0f64).exp(), epsilon = 1e-15);
    let b = marginal_tv_bound(&MarginalTvInputs { c3: 1.0, ..zero }).unwrap();
    assert_relative_eq!(b.profile_term, 0.08, epsilon = 1e-15);
    assert_relative_eq!(b.target_term, 0.06 * 2f64.sqrt(), epsilon = 1e-15);
    assert_relative_eq!(b.quadratic_term, 1296.0 / (1e4 * 2f64.sqrt()), epsilon = 1e-15);
    assert_relative_eq!(b.quadratic_term, 0.0916, epsilon = 1e-4);
    assert_relative_eq!(b.pre_constant, 0.3063, epsilon = 1e-4);
}

#[test]
fn dominance_precondition() {
    // Spike spectrum: tr B² ≈ 1 while tr B ≈ 1 + 99·0.01.
    let f = PsdOperator::diag(&{
        let mut v = vec![100.0; 100];
        v[0] = 1.0;
        v
    })
    .unwrap();
    let q = Mat::identity(100, 100);
    let t = target_dimension(&q, &f, 0.9).unwrap();
    assert!(!t.dominance_ok);
    let i = MarginalTvInputs {
        c3: 1.0,
        r_eta_star: 1.0,
        dim_a_eta_star: 1.0,
        r_bar: 1.0,
        dim_q: 1.0,
        n: 100.0,
        x: 3.0,
        calibration: 2.0,
    };
    assert!(matches!(marginal_tv_bound_checked(&i, &q, &f, 0.9), Err(Error::Precondition(_))));
    assert!(marginal_tv_bound_checked(&i, &Mat::identity(100, 100), &PsdOperator::identity(100), 0.9).is_ok());
}

#[test]
fn concentration_threshold() {
    assert_relative_eq!(marginal_concentration(3.0, 2.0 / 3.0, 1.0, 0.0), 4.5, epsilon = 1e-15);
    assert_relative_eq!(marginal_concentration(3.0, 2.0 / 3.0, 1.2, 0.5), 6.98, epsilon = 1e-12);
}

#[test]
fn quadratic_marginal_tail_mass() {
    let (m, ups, h) = random_quadratic(13, 3);
    let f = BlockOperator::from_full(&h, 2).unwrap();
    let sep = separability(&f).unwrap();
    let reference = ProfileReference::new(&m, &ups, 2).unwrap();
    let grid = nuisance_grid(&reference.eta_star(), &[6.0 / f.ee()[(0, 0)].sqrt()], 41).unwrap();
    let profiles = profile_grid(&m, &reference, &grid).unwrap();
    let d2 = sep.efficient.clone();
    let b = bias_sup(&profiles, &d2, &reference.theta_star());
    assert!(b > 0.0);
    let x: f64 = 3.0;
    let r = 2.0f64.sqrt() + (2.0 * x).sqrt();
    let thr = marginal_concentration(r, 2.0 / 3.0, 1.0, 0.0);
    // Tail of the mixture in the F̆-norm, by Monte Carlo ball probabilities.
    let root = sep.efficient.sqrt();
    let mix = MixtureMarginal::new(profiles, root.matrix(), sep.efficient.clone(), grid.volumes, &reference.theta_star())
        .unwrap();
    let n = 20_000;
    let tail = 1.0 - mix.cdf(&[thr], n, 17).unwrap()[0];
    let e = (-x).exp();
    assert!(tail <= e + 3.0 * (e * (1.0 - e) / n as f64).sqrt(), "{tail}");
}

#[test]
fn pinsker_display_only_when_close() {
    let f = PsdOperator::identity(2);
    assert!(pinsker_display_bound(&f, &PsdOperator::scaled_identity(2, 0.2), &Vector::zeros(2)).unwrap().is_none());
    let v = pinsker_display_bound(&f, &f, &Vector::from_vec(vec![0.3, 0.4])).unwrap().unwrap();
    assert_relative_eq!(v, 0.25, epsilon = 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rho_in_unit_interval(seed in any::<u64>(), p in 1usize..4, q in 1usize..4) {
        let mut r = rng(seed);
        let f = BlockOperator::from_full(&random_spd(&mut r, p + q, 0.05), p).unwrap();
        let s = separability(&f).unwrap();
        prop_assert!(s.rho >= -1e-12 && s.rho < 1.0);
        prop_assert!(s.sandwich_ok);
    }

    #[test]
    fn rho_invariant_under_block_reparametrization(seed in any::<u64>(), p in 1usize..4, q in 1usize..4) {
        let mut r = rng(seed);
        let full = random_spd(&mut r, p + q, 0.1);
        let a = gaussian_mat(&mut r, p, p) + Mat::identity(p, p) * 3.0;
        let b = gaussian_mat(&mut r, q, q) + Mat::identity(q, q) * 3.0;
        let mut t = Mat::zeros(p + q, p + q);
        t.view_mut((0, 0), (p, p)).copy_from(&a);
        t.view_mut((p, p), (q, q)).copy_from(&b);
        let moved = t.transpose() * &full * &t;
        let moved = (&moved + moved.transpose()) * 0.5;
        let r0 = separability(&BlockOperator::from_full(&full, p).unwrap()).unwrap().rho;
        let r1 = separability(&BlockOperator::from_full(&moved, p).unwrap()).unwrap().rho;
        prop_assert!((r0 - r1).abs() <= 1e-8);
    }

    #[test]
    fn orthogonalization_preserves_values_and_decouples(seed in any::<u64>()) {
        let (m, ups, h) = random_quadratic(seed, 4);
        let f = BlockOperator::from_full(&h, 2).unwrap();
        let o = orthogonalize(&m, &ups, &f).unwrap();
        let mut r = rng(seed ^ 3);
        for _ in 0..10 {
            let u = &ups + gaussian_vec(&mut r, 4);
            let v = o.from_original(&u);
            let a = o.eval(&v);
            let b = m.eval(&u);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        let hh = o.hess(&ups);
        let cross = hh.view((0, 2), (2, 2)).norm();
        prop_assert!(cross <= 1e-8 * h.norm());
        let sep = separability(&f).unwrap();
        let tt = hh.view((0, 0), (2, 2)).into_owned();
        prop_assert!((tt - sep.efficient.matrix()).norm() <= 1e-8 * h.norm());
    }

    #[test]
    fn weights_invariant_under_constant_shift(c in -50.0f64..50.0) {
        let a = mixture_for(&coupled_quadratic(0.0), &Vector::zeros(2), 1, 4.0, 21).normalized_weights();
        let b = mixture_for(&coupled_quadratic(c), &Vector::zeros(2), 1, 4.0, 21).normalized_weights();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}
