//! `laplace-cert`: Laplace approximation error terms against a grid posterior.

use lapcert::laplace::{laplace_report, LaplaceOptions, DEFAULT_NU};
use lapcert::linalg::Vector;
use lapcert::oracle::{kl_divergence, total_variation_checked, MAX_GRID_DIM};
use serde::{Deserialize, Serialize};

use super::{
    auto_resolution, basic_summary, check_positive, finish, fit_from_zero, grid_marginal_tables, per_seed,
    whitened_grid, ProbeParams, SeedOutput,
};
use crate::config::{config_err, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::report::{Certificate, Quantity, RunOutput, SeedReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaplaceParams {
    pub nu: f64,
    pub probe: ProbeParams,
    /// Take `τ₃`, `τ₄` over the whole vicinity instead of at the mode.
    pub tau_over_vicinity: bool,
    /// Grid cells per axis; chosen from the dimension when absent.
    pub grid_resolution: Option<usize>,
    /// Grid half-width in standard deviations of the Laplace approximation.
    pub box_half_width: f64,
}

impl Default for LaplaceParams {
    fn default() -> Self {
        Self {
            nu: DEFAULT_NU,
            probe: ProbeParams {
                n_directions: 512,
                shells: 8,
                seed: None,
            },
            tau_over_vicinity: true,
            grid_resolution: None,
            box_half_width: 7.0,
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let params: LaplaceParams = cfg.params()?;
    if !(params.nu > 0.0 && params.nu <= 1.0) {
        return Err(config_err("params.nu", "must lie in (0, 1]"));
    }
    check_positive(params.box_half_width, "params.box_half_width")?;
    if params.grid_resolution.is_some_and(|r| r < 3) {
        return Err(config_err("params.grid_resolution", "must be at least 3"));
    }
    let spec = cfg.model.as_ref().expect("validated");
    let outs = per_seed(cfg, |seed| {
        let inst = spec.instantiate(seed)?;
        let model = inst.sls();
        let mut rep = SeedReport::new(seed);
        let res = fit_from_zero(model)?;
        let center = res.maximizer.clone();
        let lr = laplace_report(
            model,
            &center,
            &LaplaceOptions {
                x: cfg.x,
                nu: params.nu,
                probe: params.probe.config(seed),
                tau_over_vicinity: params.tau_over_vicinity,
            },
        )?;
        let c = lr.conditions;
        rep.q("dim", model.dim() as f64, "model");
        rep.q("dim_a", lr.dim_a, "formula:tr(D^2 F^-1)");
        rep.q("alpha", lr.alpha, "formula:||D F^-1 D||");
        rep.q("r", lr.r, "formula:2sqrt(dimA)+sqrt(2x)");
        rep.q("omega", lr.omega, "probe:sup 2|delta_3|/||Du||^2");
        rep.q("tau3", lr.tau3, "probe:sup |f'''[w,w,w]|, ||Dw||=1");
        rep.q("tau4", lr.tau4, "probe:sup |f''''[w,w,w,w]|, ||Dw||=1");
        rep.q("omega_tau", lr.omega_tau, "formula:tau3 r/(3nu)");
        rep.q("diamond2", lr.diamond2, "formula:diamond2");
        rep.q("diamond3", lr.diamond3, "formula:diamond3");
        rep.q("diamond4", lr.diamond4, "formula:diamond4");
        rep.q("tv_bound2", lr.tv_bound2(), "formula:4(diamond2+e^{-x})");
        rep.q("tv_bound3", lr.tv_bound3(), "formula:4(diamond3+e^{-x})");
        rep.q("tv_bound4", lr.tv_bound4(), "formula:4(diamond4+e^{-x})");
        for (name, flag) in [
            ("omega_ok", c.omega_ok),
            ("prod_ok", c.prod_ok),
            ("tau_ok", c.tau_ok),
            ("taylor_ok", c.taylor_ok),
        ] {
            rep.q(name, if flag { 1.0 } else { 0.0 }, "formula:condition flag");
        }
        let mut out = SeedOutput::new(rep);
        let d = model.dim();
        if d > MAX_GRID_DIM {
            out.report
                .notes
                .push(format!("dimension {d} exceeds the grid limit; TV not measured"));
            return Ok(out);
        }
        let resolution = params.grid_resolution.unwrap_or_else(|| auto_resolution(d));
        let grid = match whitened_grid(model, &center, &lr.f, resolution, params.box_half_width) {
            Ok(g) => g,
            Err(HarnessError::Core(e @ lapcert::Error::BoundaryMass { .. })) => {
                out.report.notes.push(format!("grid not usable: {e}"));
                return Ok(out);
            }
            Err(e) => return Err(e),
        };
        let sigma = lr.f.inverse()?;
        let mean = Vector::from_column_slice(&lr.center);
        let (tv, disc) = total_variation_checked(&grid, &mean, &sigma)?;
        let kl = kl_divergence(&grid, &mean, &sigma)?;
        let rep = &mut out.report;
        rep.q("tv_observed", tv, "oracle:grid");
        rep.q("tv_discretization", disc, "oracle:grid refinement");
        rep.q("kl_observed", kl, "oracle:grid");
        rep.q("grid_boundary_mass", grid.boundary_mass_estimate, "oracle:grid");
        rep.q("grid_resolution", resolution as f64, "config");
        let obs = || Quantity::new(tv, "oracle:grid");
        rep.cert(Certificate::upper(
            "tv_diamond2",
            obs(),
            Quantity::new(lr.tv_bound2(), "formula:4(diamond2+e^{-x})"),
            c.diamond2_applies(),
        ));
        rep.cert(Certificate::upper(
            "tv_diamond3",
            obs(),
            Quantity::new(lr.tv_bound3(), "formula:4(diamond3+e^{-x})"),
            c.diamond3_applies(),
        ));
        rep.cert(Certificate::upper(
            "tv_diamond4",
            obs(),
            Quantity::new(lr.tv_bound4(), "formula:4(diamond4+e^{-x})"),
            c.diamond3_applies(),
        ));
        out.tables.extend(grid_marginal_tables(&grid, &format!("grid_marginal_seed{seed}")));
        Ok(out)
    })?;
    let summary = basic_summary(&outs);
    Ok(finish(cfg, outs, summary))
}
