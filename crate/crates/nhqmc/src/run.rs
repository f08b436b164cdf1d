//! `nhqmc run` and `nhqmc plan`.

use std::fmt::Write as _;

use nhqmc_core::dense::DEFAULT_DENSE_CAP;
use nhqmc_core::estimator::{
    bound_denominator, estimate_quadrature, estimate_series, exact_expectation, plan_samples, Executor, Growth,
    McSettings, Problem,
};
use nhqmc_core::kernel::KernelSpec;
use nhqmc_core::lindblad::{exact_reference, expectation_mc, expectation_quadrature};
use nhqmc_core::model::default_grid_points;
use nhqmc_core::Error as CoreError;

use crate::config::{Method, Mode, RunConfig};
use crate::error::{config, Result};
use crate::output::ResultRow;
use crate::setup::{self, Prepared};

/// Rows plus any warnings raised along the way.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.is_flagged()).count()
    }
}

fn resolve_mode(mode: Mode, method: Method) -> Result<Mode> {
    let stochastic = matches!(method, Method::Qdrift | Method::Continuous);
    match (mode, stochastic) {
        (Mode::Auto, true) => Ok(Mode::Mc),
        (Mode::Auto, false) => Ok(Mode::Quadrature),
        (Mode::Quadrature, true) => config(format!("{} is stochastic and cannot be used with quadrature", method.name())),
        (m, _) => Ok(m),
    }
}

/// `(n_N, n_D)` from explicit counts or the Hoeffding planner.
fn sample_counts(cfg: &RunConfig, prepared: &Prepared, kernel: &KernelSpec, warnings: &mut Vec<String>) -> Result<(u64, u64)> {
    let s = &cfg.sampling;
    if let Some(n) = s.n_numerator {
        let d = s.n_denominator.unwrap_or(n);
        if n == 0 || d == 0 {
            return config("sample counts must be positive");
        }
        return Ok((n, d));
    }
    let (Some(delta), Some(eta)) = (s.delta, s.eta) else {
        return config("Monte Carlo needs sampling.n_numerator or sampling.delta and sampling.eta");
    };
    let plan = plan_for(cfg, prepared, kernel, delta, eta)?;
    if plan.n_numerator > s.max_samples {
        warnings.push(format!(
            "planned sample count {} exceeds max_samples {}; consider a shorter horizon",
            plan.n_numerator, s.max_samples
        ));
    }
    Ok((plan.n_numerator, plan.n_denominator))
}

fn plan_for(
    cfg: &RunConfig,
    prepared: &Prepared,
    kernel: &KernelSpec,
    delta: f64,
    eta: f64,
) -> Result<nhqmc_core::estimator::SamplingPlan> {
    let horizon = cfg.times.t_end;
    let model = prepared.lchs_model()?;
    let grid = default_grid_points(horizon.max(1e-3));
    let summary = model.spectral_summary(horizon, grid)?;
    let plan = plan_samples(delta, eta, prepared.observable_l1()?, kernel.l1, horizon, Growth::Bandwidth(summary.delta))?;
    Ok(plan.with_bounds(bound_denominator(&model, horizon, grid)?))
}

/// Reference values: the master equation for Lindblad models, direct
/// integration of the non-Hermitian Schrödinger equation otherwise.
pub fn exact_values(prepared: &Prepared, times: &[f64]) -> Result<Option<Vec<f64>>> {
    match prepared {
        Prepared::Generic { model, observable, state } => {
            if model.n_qubits() > DEFAULT_DENSE_CAP {
                return Ok(None);
            }
            let p = Problem { model, observable, state, times };
            Ok(Some(exact_expectation(&p)?.iter().map(|z| z.re).collect()))
        }
        Prepared::Lindblad { model, observable, rho0, .. } => {
            let rhos = exact_reference(model, rho0, times)?;
            Ok(Some(rhos.iter().map(|rho| (observable * rho).trace().re).collect()))
        }
    }
}

pub fn run<E: Executor>(cfg: &RunConfig, exec: &E) -> Result<RunOutput> {
    let prepared = setup::prepare(cfg)?;
    let kernel = setup::kernel(cfg)?;
    let readout = setup::readout(cfg)?;
    let times = cfg.times.times();
    let exact = exact_values(&prepared, &times)?;
    let mut out = RunOutput::default();
    for method in cfg.methods()? {
        let spec = setup::propagator(cfg, method)?;
        let name = method.name();
        let exact_at = |j: usize| exact.as_ref().map(|e| e[j]);
        match resolve_mode(cfg.estimation.mode, method)? {
            Mode::Quadrature => {
                let model = prepared.lchs_model()?;
                let rule = setup::quadrature(cfg, &kernel, &model)?;
                let m = rule.m as u64;
                match &prepared {
                    Prepared::Generic { model, observable, state } => {
                        let p = Problem { model, observable, state, times: &times };
                        for (j, r) in estimate_quadrature(exec, &p, &rule, &spec)?.into_iter().enumerate() {
                            out.rows.push(row(times[j], name, r, exact_at(j), m, cfg.seed, &mut out.warnings)?);
                        }
                    }
                    Prepared::Lindblad { gen, open, .. } => {
                        for (j, r) in expectation_quadrature(exec, gen, open, &times, &rule, &spec)?.iter().enumerate() {
                            out.rows.push(ResultRow::new(times[j], name, r.value.re, 0.0, exact_at(j), m, cfg.seed));
                        }
                    }
                }
            }
            Mode::Mc | Mode::Auto => {
                let (n_numerator, n_denominator) = sample_counts(cfg, &prepared, &kernel, &mut out.warnings)?;
                let settings = McSettings {
                    kernel: &kernel,
                    propagator: spec,
                    n_numerator,
                    n_denominator,
                    readout,
                    seed: cfg.seed,
                    paired: cfg.estimation.paired,
                };
                match &prepared {
                    Prepared::Generic { model, observable, state } => {
                        let p = Problem { model, observable, state, times: &times };
                        for (j, r) in estimate_series(exec, &p, &settings)?.into_iter().enumerate() {
                            out.rows.push(row(times[j], name, r, exact_at(j), n_numerator, cfg.seed, &mut out.warnings)?);
                        }
                    }
                    Prepared::Lindblad { gen, open, .. } => {
                        for (j, r) in expectation_mc(exec, gen, open, &times, &settings)?.iter().enumerate() {
                            out.rows.push(ResultRow::new(times[j], name, r.value.re, r.stderr, exact_at(j), r.n_samples, cfg.seed));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn row(
    t: f64,
    method: &str,
    r: nhqmc_core::error::Result<nhqmc_core::estimator::EstimateResult>,
    exact: Option<f64>,
    n: u64,
    seed: u64,
    warnings: &mut Vec<String>,
) -> Result<ResultRow> {
    match r {
        Ok(r) => Ok(ResultRow::new(t, method, r.estimate(), r.stderr, exact, n, seed)),
        Err(e @ CoreError::DenominatorVanishes { .. }) => {
            warnings.push(format!("{method} at t = {t}: {e}"));
            Ok(ResultRow::new(t, method, f64::NAN, f64::NAN, exact, n, seed))
        }
        Err(e) => Err(e.into()),
    }
}

/// The text printed by `nhqmc plan`.
pub fn plan_report(cfg: &RunConfig) -> Result<String> {
    let prepared = setup::prepare(cfg)?;
    let kernel = setup::kernel(cfg)?;
    let model = prepared.lchs_model()?;
    let horizon = cfg.times.t_end;
    let grid = default_grid_points(horizon.max(1e-3));
    let mut s = String::new();
    let family = match kernel.family {
        nhqmc_core::kernel::KernelFamily::Cauchy => "cauchy".to_string(),
        nhqmc_core::kernel::KernelFamily::Beta(b) => format!("beta({b})"),
    };
    let _ = writeln!(s, "kernel          {family}");
    let _ = writeln!(s, "eps             {:e}", kernel.eps);
    let _ = writeln!(s, "k_c             {:.7}", kernel.k_c);
    let _ = writeln!(s, "g_l1            {:.7}", kernel.l1);
    let _ = writeln!(s, "truncated_mass  {:.7}", kernel.mass);
    if horizon > 0.0 {
        let rule = setup::quadrature(cfg, &kernel, &model)?;
        let _ = writeln!(s, "quadrature      h = {:.6e}, Q = {}, panels = {}, M = {}", rule.h, rule.q, rule.panels, rule.m);
    }
    let summary = model.spectral_summary(horizon, grid)?;
    let _ = writeln!(s, "bandwidth       {:.7}", summary.delta);
    let _ = writeln!(s, "max_norm        {:.7}", summary.max_norm);
    if let Prepared::Lindblad { gen, .. } = &prepared {
        let _ = writeln!(s, "c_p             {:.7} (minimal {:.7})", gen.c_p, gen.c_p_minimal);
    }
    let (lo, hi) = bound_denominator(&model, horizon, grid)?;
    let _ = writeln!(s, "denominator     [{lo:.7e}, {hi:.7e}]");
    let _ = writeln!(s, "observable_l1   {:.7}", prepared.observable_l1()?);
    match (cfg.sampling.delta, cfg.sampling.eta) {
        (Some(delta), Some(eta)) => {
            let plan = plan_for(cfg, &prepared, &kernel, delta, eta)?;
            let _ = writeln!(s, "delta           {delta}");
            let _ = writeln!(s, "eta             {eta}");
            let _ = writeln!(s, "K               {:.6}", plan.k_factor);
            let _ = writeln!(s, "n_numerator     {}", plan.n_numerator);
            let _ = writeln!(s, "n_denominator   {}", plan.n_denominator);
            if plan.n_numerator > cfg.sampling.max_samples {
                let _ = writeln!(s, "warning         planned samples exceed max_samples {}", cfg.sampling.max_samples);
            }
        }
        _ => {
            if let Some(n) = cfg.sampling.n_numerator {
                let _ = writeln!(s, "n_numerator     {n} (fixed)");
                let _ = writeln!(s, "n_denominator   {} (fixed)", cfg.sampling.n_denominator.unwrap_or(n));
            }
        }
    }
    Ok(s)
}
