//! `pmle-cert`: concentration, Fisher/Wilks, bias and risk certificates.

use lapcert::laplace::DEFAULT_NU;
use lapcert::linalg::{Mat, PsdOperator, Vector};
use lapcert::pmle::{
    bias_certificate, concentration_spec, estimate_delta_star, fisher_wilks_certificate, risk_certificate,
};
use lapcert::rng;
use lapcert::sls::{estimate_omega, LinearGaussian, SlsModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{basic_summary, check_positive, finish, fit_from_zero, per_seed, ProbeParams, SeedOutput};
use crate::config::{config_err, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::model::Instance;
use crate::report::{Certificate, Quantity, RunOutput, SeedReport, Table};

/// Replicate streams start here so they never collide with data streams.
const REPLICATE_STREAM_BASE: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PmleParams {
    pub nu: f64,
    pub probe: ProbeParams,
    /// Linear-Gaussian response replicates for the frequency and risk checks.
    pub replicates: usize,
    /// Constant in front of `e^{-x}` in the risk bound.
    pub c1: f64,
}

impl Default for PmleParams {
    fn default() -> Self {
        Self {
            nu: DEFAULT_NU,
            probe: ProbeParams::default(),
            replicates: 0,
            c1: 1.0,
        }
    }
}

/// The logistic likelihood with labels replaced by their means, whose
/// maximizer is the population maximizer `υ*_G`.
struct ExpectedLogistic {
    design: Mat,
    probs: Vector,
    g2: PsdOperator,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

impl SlsModel for ExpectedLogistic {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn eval(&self, u: &Vector) -> f64 {
        self.smooth_part(u) - 0.5 * self.g2.quad_form(u)
    }

    fn grad(&self, u: &Vector) -> Vector {
        let eta = &self.design * u;
        let r = Vector::from_fn(eta.len(), |i, _| self.probs[i] - sigmoid(eta[i]));
        self.design.transpose() * r - self.g2.apply(u)
    }

    fn hess(&self, u: &Vector) -> Mat {
        let eta = &self.design * u;
        let mut x = self.design.clone();
        for i in 0..x.nrows() {
            let s = sigmoid(eta[i]);
            x.row_mut(i).scale_mut((s * (1.0 - s)).sqrt());
        }
        x.transpose() * x + self.g2.matrix()
    }

    fn penalty(&self) -> &PsdOperator {
        &self.g2
    }

    fn smooth_part(&self, u: &Vector) -> f64 {
        let eta = &self.design * u;
        eta.iter().zip(self.probs.iter()).map(|(e, p)| p * e - softplus(*e)).sum()
    }
}

/// Population quantities of a model with known truth.
struct Population {
    truth: Vector,
    pop_max: Vector,
    grad_noise: Vector,
    /// Score variance `V²`.
    v2: PsdOperator,
    /// Unpenalized information at the truth.
    f_truth: PsdOperator,
    exact_quadratic: bool,
}

fn population(inst: &Instance) -> Result<Population> {
    let need_truth = || HarnessError::Model("pmle-cert needs a model with a known truth".into());
    match inst {
        Instance::Linear(l) => {
            let truth = l.truth.clone().ok_or_else(need_truth)?;
            let m = &l.model;
            let f = m.info().clone();
            let pop_max = m.penalized_info().solve(&f.apply(&truth))?;
            let s2 = m.noise_sd() * m.noise_sd();
            let resid = m.response() - m.design() * &truth;
            Ok(Population {
                grad_noise: m.design().transpose() * resid / s2,
                v2: f.clone(),
                f_truth: f,
                pop_max,
                truth,
                exact_quadratic: true,
            })
        }
        Instance::Logistic(l) => {
            let truth = l.truth.clone().ok_or_else(need_truth)?;
            let m = &l.model;
            let eta = m.design() * &truth;
            let probs = Vector::from_fn(eta.len(), |i, _| sigmoid(eta[i]));
            let expected = ExpectedLogistic {
                design: m.design().clone(),
                probs: probs.clone(),
                g2: m.penalty().clone(),
            };
            let pop_max = fit_from_zero(&expected)?.maximizer;
            let f = PsdOperator::from_sym(&m.fisher(&truth))?;
            Ok(Population {
                grad_noise: m.design().transpose() * (m.labels() - probs),
                v2: f.clone(),
                f_truth: f,
                pop_max,
                truth,
                exact_quadratic: false,
            })
        }
        _ => Err(HarnessError::Model(
            "pmle-cert supports linear_gaussian, ridge, logistic and logistic_synthetic models".into(),
        )),
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params: PmleParams = cfg.params()?;
    if !(params.nu > 0.0 && params.nu <= 1.0) {
        return Err(config_err("params.nu", "must lie in (0, 1]"));
    }
    check_positive(params.c1, "params.c1")?;
    if params.replicates == 1 {
        return Err(config_err("params.replicates", "use 0 or at least 2 replicates"));
    }
    let spec = cfg.model.as_ref().expect("validated");
    let outs = per_seed(cfg, |seed| {
        let inst = spec.instantiate(seed)?;
        run_seed(cfg, &params, &inst, seed)
    })?;
    let mut summary = basic_summary(&outs);
    let outside = outs
        .iter()
        .filter(|o| o.report.get("in_concentration_set") == Some(0.0))
        .count();
    summary.q("seeds_outside_concentration_set", outside as f64, "count");
    Ok(finish(cfg, outs, summary))
}

fn run_seed(cfg: &ExperimentConfig, params: &PmleParams, inst: &Instance, seed: u64) -> Result<SeedOutput> {
    let model = inst.sls();
    let pop = population(inst)?;
    let probe = params.probe.config(seed);
    let mut rep = SeedReport::new(seed);

    let dg2 = PsdOperator::from_sym(&model.hess(&pop.pop_max))?;
    let dg = dg2.sqrt();
    let spec = concentration_spec(&dg2, &pop.v2, cfg.x, params.nu)?;
    let radius = spec.radius();
    rep.q("p_g", spec.p_g, "formula:tr(D_G^-2 V^2)");
    rep.q("lambda_g", spec.lambda_g, "formula:||D_G^-1 V^2 D_G^-1||");
    rep.q("r_g", spec.r_g, "formula:sqrt(p_G)+sqrt(2x lambda_G)");
    rep.q("radius", radius, "formula:r_G/nu");
    rep.q("n_eff", spec.n_eff, "formula:1/||D_G^-2||");

    let res = fit_from_zero(model)?;
    rep.q("iterations", res.iterations as f64, "solver:newton");
    rep.q("grad_norm", res.grad_norm, "solver:newton");
    let dist = dg.apply(&(&res.maximizer - &pop.pop_max)).norm();
    let in_set = dist <= radius;
    rep.q("dist_g", dist, "formula:||D_G(u~ - u*_G)||");
    rep.q("in_concentration_set", if in_set { 1.0 } else { 0.0 }, "formula:dist_g<=radius");
    rep.cert(
        Certificate::upper(
            "concentration",
            Quantity::new(dist, "formula:||D_G(u~ - u*_G)||"),
            Quantity::new(radius, "formula:r_G/nu"),
            true,
        )
        .non_gating()
        .note("holds with probability at least 1 - 3e^{-x}"),
    );

    let omega = estimate_omega(model, &pop.pop_max, &dg2, radius, &probe)?.omega_hat;
    rep.q("omega", omega, "probe:sup 2|delta_3|/||D_G u||^2");

    // Quadratic models expand exactly everywhere, so the event is not needed.
    let fw_applicable = in_set || pop.exact_quadratic;
    if omega < 1.0 {
        let fw = fisher_wilks_certificate(model, &res, &pop.pop_max, &pop.grad_noise, omega)?;
        let slack = cfg.tol("fisher_wilks_slack", 1e-9) * (1.0 + fw.xi_norm_sq);
        rep.q("xi_norm_sq", fw.xi_norm_sq, "formula:||D_G^-1 grad zeta||^2");
        rep.q("wilks_residual", fw.wilks_residual, "formula:2L_G(u~)-2L_G(u*_G)-||xi||^2");
        rep.q("fisher_residual", fw.fisher_residual, "formula:||D_G(u~-u*_G)-xi||^2");
        rep.cert(Certificate::interval(
            "wilks",
            Quantity::new(fw.wilks_lower - slack, "formula:-omega||xi||^2 - slack"),
            Quantity::new(fw.wilks_residual, "formula:2L_G(u~)-2L_G(u*_G)-||xi||^2"),
            Quantity::new(fw.wilks_upper + slack, "formula:omega||xi||^2/(1-omega) + slack"),
            fw_applicable,
        ));
        rep.cert(Certificate::upper(
            "fisher",
            Quantity::new(fw.fisher_residual, "formula:||D_G(u~-u*_G)-xi||^2"),
            Quantity::new(fw.fisher_bound + slack, "formula:3omega||xi||^2/(1-omega)^2 + slack"),
            fw_applicable,
        ));
    } else {
        rep.notes.push(format!("omega = {omega} is not below 1; Fisher/Wilks skipped"));
    }

    // Bias in the D_G metric.
    let g2 = model.penalty().clone();
    let bias_vec = &pop.pop_max - &pop.truth;
    let b0 = dg.apply(&bias_vec).norm();
    let delta = if pop.exact_quadratic || b0 == 0.0 {
        0.0
    } else {
        estimate_delta_star(model, &pop.truth, &dg, 2.0 * b0, &probe)?
    };
    rep.q("delta_star", delta, "probe:sup ||D^-1 F_G(u*+u) D^-1 - I||");
    rep.q("bias_observed", b0, "formula:||D_G(u*_G - u*)||");
    let bias_norm = dg2.inv_sqrt()?.apply(&g2.apply(&pop.truth)).norm();
    rep.q("bias_norm", bias_norm, "formula:||D_G^-1 G^2 u*||");
    if delta < 1.0 {
        let bc = bias_certificate(&dg, &pop.truth, &g2, &pop.f_truth, delta)?;
        rep.q("b_g", bc.b_g, "formula:||Q F_G(u*)^-1 G^2 u*||");
        rep.cert(Certificate::upper(
            "bias",
            Quantity::new(b0, "formula:||D_G(u*_G - u*)||"),
            Quantity::new(bc.bound * (1.0 + 1e-9) + 1e-12, "formula:b_G/(1-delta*)"),
            true,
        ));
    }
    if omega < 1.0 && delta < 1.0 {
        let rc = risk_certificate(&spec, omega, delta, bias_norm, cfg.x, params.c1)?;
        let loss = dg.apply(&(&res.maximizer - &pop.truth)).norm();
        rep.q("loss", loss, "formula:||D_G(u~ - u*)||");
        rep.q("risk_bound", rc.risk_bound, "formula:risk bound");
        rep.q("bias_variance_sum", rc.bias_variance_sum, "formula:p_G+||D_G^-1 G^2 u*||^2");
        rep.cert(
            Certificate::upper(
                "loss",
                Quantity::new(loss, "formula:||D_G(u~ - u*)||"),
                Quantity::new(rc.loss_bound, "formula:loss bound"),
                true,
            )
            .non_gating()
            .note("holds on the concentration event"),
        );
    }

    let mut out = SeedOutput::new(rep);
    let mut trace = Table::new(format!("fit_trace_seed{seed}"), &["iteration", "grad_norm"]);
    for (k, g) in res.trace.iter().enumerate() {
        trace.push(vec![k as f64, *g]);
    }
    out.tables.push(trace);

    if params.replicates >= 2 {
        let Instance::Linear(l) = inst else {
            out.report
                .notes
                .push("replicates need a linear-Gaussian model; skipped".into());
            return Ok(out);
        };
        replicates(cfg, params.replicates, &l.model, &pop, &dg, radius, spec.p_g, bias_norm, seed, &mut out)?;
    }
    Ok(out)
}

/// Frequency of leaving the concentration set and the exact risk identity,
/// over fresh responses on the same design.
#[allow(clippy::too_many_arguments)]
fn replicates(
    cfg: &ExperimentConfig,
    n_rep: usize,
    model: &LinearGaussian,
    pop: &Population,
    dg: &PsdOperator,
    radius: f64,
    p_g: f64,
    bias_norm: f64,
    seed: u64,
    out: &mut SeedOutput,
) -> Result<()> {
    let mean = model.design() * &pop.truth;
    let sd = model.noise_sd();
    let rows: Vec<Result<(f64, f64)>> = (0..n_rep)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, REPLICATE_STREAM_BASE + r as u64);
            let y = Vector::from_fn(mean.len(), |i, _| mean[i] + sd * rng::normal(&mut g));
            let est = model.with_response(y)?.maximizer();
            let dist = dg.apply(&(&est - &pop.pop_max)).norm();
            let sq = dg.apply(&(&est - &pop.truth)).norm_squared();
            Ok((dist, sq))
        })
        .collect();
    let rows: Vec<(f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let n = n_rep as f64;
    let freq = rows.iter().filter(|(d, _)| *d > radius).count() as f64 / n;
    let sigma_mc = (freq * (1.0 - freq) / n).sqrt();
    let m = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r.1 - m) * (r.1 - m)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let target = p_g + bias_norm * bias_norm;
    let rep = &mut out.report;
    rep.q("replicates", n, "count");
    rep.q("tail_frequency", freq, "oracle:monte-carlo");
    rep.q("tail_sigma_mc", sigma_mc, "oracle:monte-carlo");
    rep.q("mean_sq_loss", m, "oracle:monte-carlo");
    rep.q("mean_sq_loss_se", se, "oracle:monte-carlo");
    rep.cert(Certificate::upper(
        "tail_frequency",
        Quantity::new(freq, "oracle:monte-carlo"),
        Quantity::new(3.0 * (-cfg.x).exp() + 3.0 * sigma_mc, "formula:3e^{-x}+3sigma_MC"),
        true,
    ));
    let k = cfg.tol("risk_se_multiple", 3.0);
    rep.cert(Certificate::upper(
        "risk_equality",
        Quantity::new((m - target).abs(), "formula:|mean loss - (p_G+||D_G^-1 G^2 u*||^2)|"),
        Quantity::new(k * se, "formula:3 standard errors"),
        true,
    ));
    let mut t = Table::new(format!("replicates_seed{seed}"), &["replicate", "dist_g", "sq_loss"]);
    for (r, (d, s)) in rows.iter().enumerate() {
        t.push(vec![r as f64, *d, *s]);
    }
    out.tables.push(t);
    Ok(())
}
