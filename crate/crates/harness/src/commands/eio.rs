//! `eio-demo`: joint fit, derivative checks and the marginal certificate of an
//! error-in-operator problem.

use lapcert::eio::{
    eio_laplace_certificate, empirical_self_concordance, fit_joint, objective_grad_hess, plug_in, plug_in_state,
    self_concordance_constants, warm_start_check, EioState,
};
use lapcert::laplace::DEFAULT_CALIBRATION;
use lapcert::linalg::{Mat, PsdOperator, Vector};
use lapcert::marginal::DEFAULT_DOMINANCE_C0;
use lapcert::oracle::{empirical_tv_elliptic, mcmc_sample_with, McmcOptions};
use lapcert::sls::{fd_neg_hess, SlsModel};
use serde::{Deserialize, Serialize};

use super::{basic_summary, check_positive, finish, per_seed, rows_of, whitened_grid, ProbeParams, SeedOutput};
use crate::config::{config_err, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::model::Instance;
use crate::report::{Certificate, Quantity, RunOutput, SeedReport};

const ELLIPTIC_SEED_OFFSET: u64 = 2 << 20;
const MCMC_SEED_OFFSET: u64 = 3 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QChoice {
    Identity,
    /// `F̆^{1/2}`.
    EfficientSqrt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EioParams {
    pub q: QChoice,
    pub c0: f64,
    pub calibration: f64,
    pub probe: ProbeParams,
    /// Grid cells per axis for the two-dimensional case.
    pub grid_resolution: usize,
    pub box_half_width: f64,
    pub mcmc_draws: usize,
    pub n_gaussian: Option<usize>,
}

impl Default for EioParams {
    fn default() -> Self {
        Self {
            q: QChoice::Identity,
            c0: DEFAULT_DOMINANCE_C0,
            calibration: DEFAULT_CALIBRATION,
            probe: ProbeParams {
                n_directions: 10_000,
                shells: 1,
                seed: None,
            },
            grid_resolution: 401,
            box_half_width: 8.0,
            mcmc_draws: 200_000,
            n_gaussian: None,
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params: EioParams = cfg.params()?;
    check_positive(params.c0, "params.c0")?;
    check_positive(params.calibration, "params.calibration")?;
    check_positive(params.box_half_width, "params.box_half_width")?;
    if params.grid_resolution < 3 || params.mcmc_draws == 0 || params.probe.n_directions == 0 {
        return Err(config_err("params", "grid_resolution ≥ 3, mcmc_draws ≥ 1 and probe.n_directions ≥ 1 are required"));
    }
    let spec = cfg.model.as_ref().expect("validated");
    let outs = per_seed(cfg, |seed| {
        let inst = spec.instantiate(seed)?;
        run_seed(cfg, &params, &inst, seed)
    })?;
    let summary = basic_summary(&outs);
    Ok(finish(cfg, outs, summary))
}

fn run_seed(cfg: &ExperimentConfig, params: &EioParams, inst: &Instance, seed: u64) -> Result<SeedOutput> {
    let Instance::Eio(e) = inst else {
        return Err(HarnessError::Model("eio-demo needs an eio, eio_synthetic or eio_regression model".into()));
    };
    let problem = &e.problem;
    let (p, q) = (problem.p(), problem.q());
    let mut rep = SeedReport::new(seed);
    rep.q("p", p as f64, "model");
    rep.q("q", q as f64, "model");
    rep.q("mu", problem.mu(), "model");
    if let Some(ing) = &e.ingest {
        rep.q("observations", ing.n as f64, "data");
        rep.q("mu_sq_raw", ing.mu_sq_raw, "formula:n/sigma_X^2");
        rep.q("scale", ing.scale, "formula:1/(sqrt(2) sigma)");
    }

    // Plug-in start, or θ = 0 with A = Â when the plug-in leaves the region.
    let mut init = plug_in_state(problem)?;
    if !warm_start_check(problem, &init)?.in_region {
        rep.notes.push("plug-in start outside the warm-start region; starting from theta = 0".into());
        init = EioState {
            theta: Vector::zeros(p),
            a: problem.a_hat().clone(),
        };
    }
    let (fit, res) = fit_joint(problem, &init)?;
    rep.q("iterations", res.iterations as f64, "solver:newton");
    rep.q("grad_norm", res.grad_norm, "solver:newton");
    let plug = plug_in(problem)?;
    rep.q("plug_in_distance", (&fit.theta - &plug).norm(), "formula:||theta~ - theta_plug||");

    let der = objective_grad_hess(problem, &fit)?;
    let fd = fd_neg_hess(&e.model, &fit.stack());
    let fd_rel = (&der.hess - &fd).norm() / fd.norm().max(f64::MIN_POSITIVE);
    rep.q("hessian_fd_rel", fd_rel, "oracle:central differences of the gradient");
    rep.cert(Certificate::upper(
        "hessian_fd",
        Quantity::new(fd_rel, "oracle:central differences of the gradient"),
        Quantity::new(cfg.tol("fd_hessian", 1e-5), "tolerance:fd_hessian"),
        true,
    ));

    let consts = self_concordance_constants(problem);
    let sc = empirical_self_concordance(problem, &fit, &params.probe.config(seed))?;
    let slack = 1.0 + cfg.tol("self_concordance_slack", 0.0);
    rep.q("c3_empirical", sc.c3_hat, "probe:tau3 sqrt(n)");
    rep.q("c4_empirical", sc.c4_hat, "probe:tau4 n");
    rep.q("c3_analytic", consts.c3, "formula:6/mu");
    rep.q("c4_analytic", consts.c4, "formula:3/mu^2");
    rep.cert(Certificate::upper(
        "c3",
        Quantity::new(sc.c3_hat, "probe:tau3 sqrt(n)"),
        Quantity::new(consts.c3 * slack, "formula:6/mu"),
        true,
    ));
    rep.cert(Certificate::upper(
        "c4",
        Quantity::new(sc.c4_hat, "probe:tau4 n"),
        Quantity::new(consts.c4 * slack, "formula:3/mu^2"),
        true,
    ));

    let f_breve = PsdOperator::from_sym(&(fit.a.transpose() * &fit.a + problem.g2().matrix()))?;
    let qm = match params.q {
        QChoice::Identity => Mat::identity(p, p),
        QChoice::EfficientSqrt => f_breve.sqrt().matrix().clone(),
    };
    let cert = eio_laplace_certificate(problem, &fit, &qm, cfg.x, params.c0, params.calibration)?;
    rep.q("n_eff", cert.n_eff, "formula:1/||(A'A+G0^2)^-1||");
    rep.q("p_target", cert.dims.p_target, "formula:tr(A'A (A'A+G^2)^-1)");
    rep.q("q_nuis", cert.dims.q_nuis, "formula:nuisance effective dimension");
    rep.q("p_full_bound", cert.dims.p_full_bound, "formula:full dimension bound");
    rep.q("r_bar", cert.r_bar, "formula:2sqrt(p_bar)+sqrt(2x)");
    rep.q("r_star", cert.r_star, "formula:2sqrt(p_target)+sqrt(2x)");
    rep.q("condition_value", cert.condition_value, "formula:c3 r_bar/sqrt(n)");
    rep.q("rho_sep", cert.rho_sep, "formula:separability");
    rep.q("dim_q", cert.dim_q, "formula:tr B_Q");
    rep.q("theta_margin", cert.warm_start.theta_margin, "formula:warm-start margin");
    rep.q("residual_margin", cert.warm_start.residual_margin, "formula:warm-start margin");
    rep.q("bound_profile_term", cert.bound.profile_term, "formula:c3 r_eta dimA_eta/sqrt(n)");
    rep.q("bound_target_term", cert.bound.target_term, "formula:c3 r_bar sqrt(dimQ)/sqrt(n)");
    rep.q("bound_quadratic_term", cert.bound.quadratic_term, "formula:c3^2 r_bar^4/(n sqrt(dimQ))");
    rep.q("bound_total", cert.bound.total, "formula:C(first three)+e^{-x}");
    rep.notes.extend(cert.notes.iter().cloned());

    // Brute-force θ-marginal of exp f over the stacked parameter.
    let center = fit.stack();
    let h = PsdOperator::from_sym(&der.hess)?;
    let sigma = cert.efficient.inverse()?;
    let mut out_samples = Vec::new();
    let (points, weights) = if p * (1 + q) <= 2 {
        let g = whitened_grid(&e.model, &center, &h, params.grid_resolution, params.box_half_width)?;
        let pts: Vec<Vector> = g.points().iter().map(|v| v.rows(0, p).into_owned()).collect();
        (pts, Some(g.cell_mass.clone()))
    } else {
        let fmax = e.model.eval(&center);
        let lf = |v: &Vector| e.model.eval(v) - fmax;
        let opts = McmcOptions {
            init_cov: Some(rows_of(h.inverse()?.matrix())),
            ..McmcOptions::default()
        };
        let s = mcmc_sample_with(&lf, &center, params.mcmc_draws, seed.wrapping_add(MCMC_SEED_OFFSET), &opts)?;
        rep.q("mcmc_acceptance", s.acceptance_rate, "oracle:mcmc");
        rep.q("mcmc_min_ess", s.min_ess(), "oracle:mcmc");
        for w in &s.warnings {
            rep.notes.push(format!("mcmc: {w}"));
        }
        let pts: Vec<Vector> = s.vectors().iter().map(|v| v.rows(0, p).into_owned()).collect();
        out_samples.push((format!("eio_seed{seed}"), s));
        (pts, None)
    };
    let ell = empirical_tv_elliptic(
        &points,
        weights.as_deref(),
        &qm,
        &fit.theta,
        &sigma,
        params.n_gaussian,
        seed.wrapping_add(ELLIPTIC_SEED_OFFSET),
    )?;
    rep.q("elliptic_sup_distance", ell.sup_distance, "oracle:elliptic ecdf");
    rep.q("elliptic_envelope", ell.envelope, "formula:DKW envelopes");
    let mut c = Certificate::upper(
        "marginal_elliptic",
        Quantity::new(ell.sup_distance, "oracle:elliptic ecdf"),
        Quantity::new(cert.bound.total + ell.envelope, "formula:marginal bound + DKW envelopes"),
        cert.applicable,
    );
    for n in &cert.notes {
        c = c.note(n.clone());
    }
    rep.cert(c);

    let mut out = SeedOutput::new(rep);
    out.samples = out_samples;
    Ok(out)
}
