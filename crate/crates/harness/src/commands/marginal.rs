//! `marginal-cert`: mixed Laplace approximation of a target marginal.

use lapcert::laplace::DEFAULT_NU;
use lapcert::linalg::{self, BlockOperator, PsdOperator, Vector};
use lapcert::marginal::{
    concentration_nuisance_grid, homogenization_error, marginal_tv_bound, orthogonalize, profile_grid, separability,
    target_dimension, MarginalTvInputs, MixtureMarginal, ProfileReference, DEFAULT_DOMINANCE_C0,
};
use lapcert::oracle::{
    dkw_envelope, ecdf_on_grid, empirical_tv_elliptic, mcmc_sample_with, McmcOptions, MAX_GRID_DIM,
};
use lapcert::rng;
use lapcert::sls::{estimate_self_concordance, SlsModel};
use serde::{Deserialize, Serialize};

use super::{
    auto_resolution, basic_summary, check_positive, finish, fit_from_zero, mat_of_rows, per_seed, rows_of,
    whitened_grid, ProbeParams, SeedOutput,
};
use crate::config::{config_err, ExperimentConfig};
use crate::error::Result;
use crate::model::Instance;
use crate::report::{Certificate, Quantity, RunOutput, SeedReport, Table};

/// Stream offsets under the run seed.
const VALUE_CHECK_STREAM: u64 = 7000;
const MIXTURE_SEED_OFFSET: u64 = 1 << 20;
const ELLIPTIC_SEED_OFFSET: u64 = 2 << 20;
const MCMC_SEED_OFFSET: u64 = 3 << 20;

const MAX_PROFILES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarginalParams {
    /// Number of leading coordinates forming the target `θ`.
    pub target_dim: usize,
    /// Rows of `Q`; `F̆^{1/2}` when absent.
    pub q: Option<Vec<Vec<f64>>>,
    /// Nuisance grid half-width in standard deviations.
    pub nuisance_radius: f64,
    /// Cells per nuisance axis; 21 for one or two nuisance coordinates, 9 otherwise.
    pub nuisance_resolution: Option<usize>,
    /// Number of radii for the mixture CDF table.
    pub radii: usize,
    /// Monte Carlo draws per profile for ball probabilities.
    pub n_mc: usize,
    pub calibration: f64,
    pub c0: f64,
    pub nu: f64,
    pub probe: ProbeParams,
    pub grid_resolution: Option<usize>,
    pub box_half_width: f64,
    /// Chain length when the dimension is too large for a grid.
    pub mcmc_draws: usize,
    pub n_gaussian: Option<usize>,
    /// Random points for the reparametrization value check.
    pub value_checks: usize,
}

impl Default for MarginalParams {
    fn default() -> Self {
        Self {
            target_dim: 0,
            q: None,
            nuisance_radius: 5.0,
            nuisance_resolution: None,
            radii: 64,
            n_mc: 20_000,
            calibration: lapcert::laplace::DEFAULT_CALIBRATION,
            c0: DEFAULT_DOMINANCE_C0,
            nu: DEFAULT_NU,
            probe: ProbeParams::default(),
            grid_resolution: None,
            box_half_width: 7.0,
            mcmc_draws: 100_000,
            n_gaussian: None,
            value_checks: 20,
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params: MarginalParams = cfg.params()?;
    if params.target_dim == 0 {
        return Err(config_err("params.target_dim", "must be at least 1"));
    }
    check_positive(params.nuisance_radius, "params.nuisance_radius")?;
    check_positive(params.calibration, "params.calibration")?;
    check_positive(params.c0, "params.c0")?;
    check_positive(params.box_half_width, "params.box_half_width")?;
    if params.radii < 2 || params.n_mc == 0 || params.mcmc_draws == 0 {
        return Err(config_err("params", "radii ≥ 2, n_mc ≥ 1 and mcmc_draws ≥ 1 are required"));
    }
    if !(params.nu > 0.0 && params.nu <= 1.0) {
        return Err(config_err("params.nu", "must lie in (0, 1]"));
    }
    let spec = cfg.model.as_ref().expect("validated");
    let outs = per_seed(cfg, |seed| {
        let inst = spec.instantiate(seed)?;
        run_seed(cfg, &params, &inst, seed)
    })?;
    let summary = basic_summary(&outs);
    Ok(finish(cfg, outs, summary))
}

fn run_seed(cfg: &ExperimentConfig, params: &MarginalParams, inst: &Instance, seed: u64) -> Result<SeedOutput> {
    let model = inst.sls();
    let dim = model.dim();
    let p = params.target_dim;
    if p >= dim {
        return Err(config_err("params.target_dim", "must be smaller than the model dimension"));
    }
    let q_dim = dim - p;
    let mut rep = SeedReport::new(seed);
    let res = fit_from_zero(model)?;
    let ups = res.maximizer.clone();
    let h = model.hess(&ups);
    let h_op = PsdOperator::from_sym(&h)?;
    let blocks = BlockOperator::from_full(&h, p)?;

    let sep = separability(&blocks)?;
    rep.q("rho", sep.rho, "formula:||F_tt^-1/2 F_te F_ee^-1/2||");
    rep.cert(
        Certificate::upper(
            "separability",
            Quantity::new(sep.rho, "formula:||F_tt^-1/2 F_te F_ee^-1/2||"),
            Quantity::new(1.0, "condition:rho<1"),
            true,
        )
        .note(format!("sandwich check {}", if sep.sandwich_ok { "passed" } else { "failed" })),
    );

    // One-point orthogonality after the linear nuisance shift.
    let orth = orthogonalize(model, &ups, &blocks)?;
    let ho = orth.hess(&orth.from_original(&ups));
    let cross = linalg::max_abs(&ho.view((0, p), (p, q_dim)).into_owned()) / linalg::max_abs(&h).max(f64::MIN_POSITIVE);
    rep.q("orthogonal_cross", cross, "formula:max|F~_te|/max|F|");
    rep.cert(Certificate::upper(
        "orthogonal_cross",
        Quantity::new(cross, "formula:max|F~_te|/max|F|"),
        Quantity::new(cfg.tol("orthogonality", 1e-8), "tolerance:orthogonality"),
        true,
    ));
    let h_inv_half = h_op.inv_sqrt()?;
    let mut worst = 0.0_f64;
    for k in 0..params.value_checks {
        let mut r = rng::stream(seed, VALUE_CHECK_STREAM + k as u64);
        let pt = &ups + h_inv_half.apply(&rng::normal_vector(&mut r, dim));
        let a = model.eval(&pt);
        let b = orth.eval(&orth.from_original(&pt));
        worst = worst.max((a - b).abs() / (1.0 + a.abs()));
    }
    rep.q("orthogonal_values", worst, "probe:max |f(u)-f~(T^-1 u)|/(1+|f|)");
    rep.cert(Certificate::upper(
        "orthogonal_values",
        Quantity::new(worst, "probe:max |f(u)-f~(T^-1 u)|/(1+|f|)"),
        Quantity::new(cfg.tol("reparametrization", 1e-12), "tolerance:reparametrization"),
        params.value_checks > 0,
    ));

    // Profiles over the nuisance grid.
    let resolution = params
        .nuisance_resolution
        .unwrap_or(if q_dim <= 2 { DEFAULT_SMALL_RES } else { 9 });
    if resolution.checked_pow(q_dim as u32).is_none_or(|n| n > MAX_PROFILES) {
        return Err(config_err("params.nuisance_resolution", "nuisance grid too large"));
    }
    let reference = ProfileReference::new(model, &ups, p)?;
    let grid = concentration_nuisance_grid(&h_op, &reference, params.nuisance_radius, resolution)?;
    let profiles = profile_grid(model, &reference, &grid)?;
    let theta_star = reference.theta_star();
    let q = match &params.q {
        Some(rows) => {
            let m = mat_of_rows(rows, "params.q")?;
            if m.ncols() != p {
                return Err(config_err("params.q", "needs one column per target coordinate"));
            }
            m
        }
        None => sep.efficient.sqrt().matrix().clone(),
    };
    let homog = MixtureMarginal::new(
        profiles.clone(),
        &q,
        reference.f_tt.clone(),
        grid.volumes.clone(),
        &theta_star,
    )?;
    let hg = homogenization_error(&homog)?;
    rep.q("homogenization_delta_f", hg.delta_f, "formula:sum w||Q(F^-1-F_eta^-1)Q'||_1/||QF^-1Q'||_F");
    rep.q("homogenization_bound", hg.bound, "formula:delta+/(1-delta+) tr/||.||_F");
    rep.q("homogenization_delta_plus", hg.delta_plus, "formula:max||F^-1/2 F_eta F^-1/2 - I||");
    let mix = MixtureMarginal::new(profiles, &q, sep.efficient.clone(), grid.volumes, &theta_star)?;
    let (mix_mean, mix_cov) = mix.moments()?;
    rep.q("mixture_mean_shift", (&mix_mean - &theta_star).norm(), "formula:||E_mix theta - theta*||");
    let f_inv = sep.efficient.inverse()?;
    rep.q(
        "mixture_cov_rel_error",
        (&mix_cov - f_inv.matrix()).norm() / f_inv.matrix().norm(),
        "formula:||Cov_mix - F~^-1||_F/||F~^-1||_F",
    );

    let qf = &q * f_inv.matrix() * q.transpose();
    let r_max = (linalg::trace(&qf)).sqrt() + 4.0 * linalg::sym_norms(&qf).operator_norm.sqrt();
    let radii: Vec<f64> = (1..=params.radii).map(|k| r_max * k as f64 / params.radii as f64).collect();
    let mseed = seed.wrapping_add(MIXTURE_SEED_OFFSET);
    let mix_cdf = mix.cdf(&radii, params.n_mc, mseed)?;
    let ref_cdf = mix.reference_cdf(&radii, params.n_mc, mseed)?;
    let mix_vs_ref = sup_diff(&mix_cdf, &ref_cdf);
    rep.q("mixture_vs_reference", mix_vs_ref, "oracle:monte-carlo ball probabilities");
    let exact = matches!(inst, Instance::Linear(_));
    rep.cert({
        let c = Certificate::upper(
            "mixture_vs_reference",
            Quantity::new(mix_vs_ref, "oracle:monte-carlo ball probabilities"),
            Quantity::new(
                2.0 * dkw_envelope(params.n_mc) + cfg.tol("mixture_grid", 0.01),
                "formula:2 DKW + grid tolerance",
            ),
            true,
        );
        if exact {
            c
        } else {
            c.non_gating().note("equality expected only for Gaussian models")
        }
    });

    // Brute-force θ-marginal.
    let (points, weights, sample) = if dim <= MAX_GRID_DIM {
        let res_g = params.grid_resolution.unwrap_or_else(|| auto_resolution(dim));
        let g = whitened_grid(model, &ups, &h_op, res_g, params.box_half_width)?;
        let pts: Vec<Vector> = g.points().iter().map(|v| v.rows(0, p).into_owned()).collect();
        rep.q("oracle_grid_resolution", res_g as f64, "config");
        (pts, Some(g.cell_mass.clone()), None)
    } else {
        let fmax = model.eval(&ups);
        let lf = |v: &Vector| model.eval(v) - fmax;
        let opts = McmcOptions {
            init_cov: Some(rows_of(h_op.inverse()?.matrix())),
            ..McmcOptions::default()
        };
        let s = mcmc_sample_with(&lf, &ups, params.mcmc_draws, seed.wrapping_add(MCMC_SEED_OFFSET), &opts)?;
        rep.q("mcmc_acceptance", s.acceptance_rate, "oracle:mcmc");
        rep.q("mcmc_min_ess", s.min_ess(), "oracle:mcmc");
        for w in &s.warnings {
            rep.notes.push(format!("mcmc: {w}"));
        }
        let pts: Vec<Vector> = s.vectors().iter().map(|v| v.rows(0, p).into_owned()).collect();
        (pts, None, Some(s))
    };
    let oracle_r: Vec<f64> = points.iter().map(|x| (&q * (x - &theta_star)).norm()).collect();
    let oracle_cdf = ecdf_on_grid(&oracle_r, weights.as_deref(), &radii);
    rep.q("oracle_vs_mixture", sup_diff(&oracle_cdf, &mix_cdf), "oracle:ecdf vs mixture");
    let ell = empirical_tv_elliptic(
        &points,
        weights.as_deref(),
        &q,
        &theta_star,
        &f_inv,
        params.n_gaussian,
        seed.wrapping_add(ELLIPTIC_SEED_OFFSET),
    )?;
    rep.q("elliptic_sup_distance", ell.sup_distance, "oracle:elliptic ecdf");
    rep.q("elliptic_envelope", ell.envelope, "formula:DKW envelopes");

    // Bound inputs with D² = −∇²f(υ*) and n = λ_min(D²).
    let n = h_op.min_eigenvalue();
    let sc = estimate_self_concordance(model, &ups, &h_op, n, &params.probe.config(seed))?;
    let g2 = model.penalty();
    let d2_full = h.clone() - g2.matrix();
    let dim_a_full = linalg::trace(&(&d2_full * h_op.inverse()?.matrix()));
    let f_tt = reference.f_tt.clone();
    let d2_tt = f_tt.matrix() - g2.matrix().view((0, 0), (p, p));
    let dim_a_eta = linalg::trace(&(d2_tt * f_tt.inverse()?.matrix()));
    let sx = (2.0 * cfg.x).sqrt();
    let r_bar = 2.0 * dim_a_full.max(0.0).sqrt() + sx;
    let r_eta = 2.0 * dim_a_eta.max(0.0).sqrt() + sx;
    let t = target_dimension(&q, &sep.efficient, params.c0)?;
    let bound = marginal_tv_bound(&MarginalTvInputs {
        c3: sc.c3_hat,
        r_eta_star: r_eta,
        dim_a_eta_star: dim_a_eta,
        r_bar,
        dim_q: t.dim_q,
        n,
        x: cfg.x,
        calibration: params.calibration,
    })?;
    let cond = sc.c3_hat * r_bar / n.sqrt();
    rep.q("c3", sc.c3_hat, "probe:tau3 sqrt(n)");
    rep.q("n", n, "formula:lambda_min(D^2)");
    rep.q("dim_a_full", dim_a_full, "formula:tr(D^2 F^-1)");
    rep.q("dim_a_eta_star", dim_a_eta, "formula:tr(D_tt^2 F_tt^-1)");
    rep.q("r_bar", r_bar, "formula:2sqrt(dimA)+sqrt(2x)");
    rep.q("r_eta_star", r_eta, "formula:2sqrt(dimA_eta)+sqrt(2x)");
    rep.q("dim_q", t.dim_q, "formula:tr B_Q");
    rep.q("condition_value", cond, "formula:c3 r_bar/sqrt(n)");
    rep.q("bound_profile_term", bound.profile_term, "formula:c3 r_eta dimA_eta/sqrt(n)");
    rep.q("bound_target_term", bound.target_term, "formula:c3 r_bar sqrt(dimQ)/sqrt(n)");
    rep.q("bound_quadratic_term", bound.quadratic_term, "formula:c3^2 r_bar^4/(n sqrt(dimQ))");
    rep.q("bound_total", bound.total, "formula:C(first three)+e^{-x}");
    let applicable = t.dominance_ok && cond <= 1.0 / 3.0;
    let mut c = Certificate::upper(
        "marginal_elliptic",
        Quantity::new(ell.sup_distance, "oracle:elliptic ecdf"),
        Quantity::new(bound.total + ell.envelope, "formula:marginal bound + DKW envelopes"),
        applicable,
    );
    if !t.dominance_ok {
        c = c.note("Frobenius dominance for Q fails");
    }
    if cond > 1.0 / 3.0 {
        c = c.note("c3 r_bar/sqrt(n) exceeds 1/3");
    }
    rep.cert(c);

    let mut out = SeedOutput::new(rep);
    let mut t_cdf = Table::new(format!("mixture_cdf_seed{seed}"), &["r", "mixture", "reference", "oracle"]);
    for (k, r) in radii.iter().enumerate() {
        t_cdf.push(vec![*r, mix_cdf[k], ref_cdf[k], oracle_cdf[k]]);
    }
    out.tables.push(t_cdf);
    out.tables.push(profile_table(&mix, seed));
    if let Some(s) = sample {
        out.samples.push((format!("marginal_seed{seed}"), s));
    }
    Ok(out)
}

const DEFAULT_SMALL_RES: usize = lapcert::marginal::DEFAULT_NUISANCE_RESOLUTION;

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn profile_table(mix: &MixtureMarginal, seed: u64) -> Table {
    let first = &mix.profiles[0];
    let mut header: Vec<String> = (0..first.eta.len()).map(|k| format!("eta{k}")).collect();
    header.extend((0..first.theta_eta.len()).map(|k| format!("theta{k}")));
    header.extend(["phi", "delta", "weight", "normalized_weight"].map(String::from));
    let mut t = Table {
        name: format!("profiles_seed{seed}"),
        header,
        rows: Vec::new(),
    };
    for (pr, w) in mix.profiles.iter().zip(mix.normalized_weights()) {
        let mut row = pr.eta.clone();
        row.extend(&pr.theta_eta);
        row.extend([pr.phi_eta, pr.delta_eta, pr.weight, w]);
        t.push(row);
    }
    t
}
