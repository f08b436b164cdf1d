//! Turns a [`RunConfig`] into simulator objects.

use nhqmc_core::dense::{CMatrix, DEFAULT_DENSE_CAP};
use nhqmc_core::estimator::{ObservableSpec, Readout};
use nhqmc_core::kernel::{KernelFamily, KernelSpec, QuadratureRule};
use nhqmc_core::lindblad::{
    amplitude_damping, dephasing, ising_periodic, pure_density, vectorize_model, LindbladModel,
    OpenSystemObservable, VectorizedGenerator,
};
use nhqmc_core::model::{default_grid_points, NonHermitianModel};
use nhqmc_core::pauli::{parse_term_line, PauliString, PauliSum};
use nhqmc_core::propagate::{PropagatorSpec, StateVector};
use nhqmc_core::schedule::Schedule;
use nhqmc_core::C64;

use crate::config::{
    GenericModel, HamiltonianConfig, JumpConfig, LindbladConfig, Method, ModelConfig, ObservableConfig, RunConfig,
    ScheduleConfig, StateConfig,
};
use crate::error::{config, CliError, Result};

/// Wraps core errors raised while reading the config as config errors.
fn cfg<T>(what: &str, r: nhqmc_core::error::Result<T>) -> Result<T> {
    r.map_err(|e| CliError::Config(format!("{what}: {e}")))
}

pub enum Prepared {
    Generic {
        model: NonHermitianModel,
        observable: ObservableSpec,
        state: StateVector,
    },
    Lindblad {
        model: LindbladModel,
        gen: VectorizedGenerator,
        observable: CMatrix,
        rho0: CMatrix,
        open: OpenSystemObservable,
    },
}

impl Prepared {
    pub fn n_qubits(&self) -> usize {
        match self {
            Prepared::Generic { model, .. } => model.n_qubits(),
            Prepared::Lindblad { gen, .. } => gen.n_qubits,
        }
    }

    /// The non-Hermitian model the LCHS estimators act on.
    pub fn lchs_model(&self) -> Result<NonHermitianModel> {
        match self {
            Prepared::Generic { model, .. } => Ok(model.clone()),
            Prepared::Lindblad { gen, .. } => Ok(gen.to_model()?),
        }
    }

    /// `‖O‖₁` of the observable's Pauli expansion.
    pub fn observable_l1(&self) -> Result<f64> {
        match self {
            Prepared::Generic { observable, .. } => Ok(observable.l1()),
            Prepared::Lindblad { observable, .. } => Ok(PauliSum::decompose(observable)?.l1_norm()),
        }
    }
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let horizon = cfg.times.t_end;
    match &cfg.model {
        ModelConfig::Generic(g) => prepare_generic(g, horizon),
        ModelConfig::Lindblad(l) => prepare_lindblad(l),
    }
}

fn parse_terms(n_qubits: usize, lines: &[String]) -> Result<PauliSum> {
    let mut terms = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        terms.push(cfg(&format!("term {}", i + 1), parse_term_line(line))?);
    }
    cfg("terms", PauliSum::from_terms(n_qubits, terms))
}

fn schedule(s: &ScheduleConfig) -> Result<Schedule> {
    match s {
        ScheduleConfig::Constant(v) => Ok(Schedule::Constant(*v)),
        ScheduleConfig::Harmonic(h) => cfg("schedule", Schedule::harmonic(h.offset, h.amplitude, h.frequency, h.phase)),
        ScheduleConfig::Piecewise(p) => cfg("schedule", Schedule::piecewise_linear(p.knots.clone(), p.values.clone())),
    }
}

fn state(n_qubits: usize, s: &StateConfig) -> Result<StateVector> {
    let psi = match s {
        StateConfig::Label(bits) => cfg("initial_state", StateVector::from_bits(bits))?,
        StateConfig::Amplitudes(a) => {
            let amps = a.iter().map(|[re, im]| C64::new(*re, *im)).collect();
            cfg("initial_state", StateVector::from_amplitudes(amps).and_then(|v| v.normalized()))?
        }
    };
    if psi.n_qubits() != n_qubits {
        return config(format!("initial_state has {} qubits, model has {n_qubits}", psi.n_qubits()));
    }
    Ok(psi)
}

fn projector(n_qubits: usize, bits: &str) -> Result<CMatrix> {
    let psi = state(n_qubits, &StateConfig::Label(bits.to_string()))?;
    Ok(pure_density(&psi))
}

fn prepare_generic(g: &GenericModel, horizon: f64) -> Result<Prepared> {
    let n = g.n_qubits;
    let constant = parse_terms(n, &g.terms)?;
    let mut model = if g.schedules.is_empty() {
        if constant.is_empty() {
            return config("model has no terms");
        }
        cfg("model", NonHermitianModel::from_complex_sum(&constant))?
    } else {
        let mut terms = Vec::new();
        for t in constant.terms() {
            terms.push((t.string, Schedule::Constant(t.coeff.re), Schedule::Constant(t.coeff.im)));
        }
        for (i, s) in g.schedules.iter().enumerate() {
            let string: PauliString = cfg(&format!("schedule {}", i + 1), s.label.parse())?;
            terms.push((string, schedule(&s.re)?, schedule(&s.im)?));
        }
        let points = default_grid_points(horizon.max(1e-3));
        cfg("model", NonHermitianModel::from_schedules(n, terms, horizon, points))?
    };
    if let Some(e) = g.shift {
        model = model.with_shift(Schedule::Constant(e));
        cfg("shift", model.check_positivity(horizon, default_grid_points(horizon.max(1e-3))))?;
    }
    let observable = match &g.observable {
        ObservableConfig::Terms(lines) => parse_terms(n, lines)?,
        ObservableConfig::Projector(bits) => cfg("observable", PauliSum::decompose(&projector(n, bits)?))?,
    };
    let observable = cfg("observable", ObservableSpec::new(observable))?;
    let state = state(n, &g.initial_state)?;
    Ok(Prepared::Generic { model, observable, state })
}

fn prepare_lindblad(l: &LindbladConfig) -> Result<Prepared> {
    let n = l.n_qubits;
    if 2 * n > DEFAULT_DENSE_CAP {
        return config(format!("vectorized Lindblad model needs {} qubits, cap is {DEFAULT_DENSE_CAP}", 2 * n));
    }
    let h = match &l.hamiltonian {
        HamiltonianConfig::Terms(lines) if lines.is_empty() => PauliSum::zero(n),
        HamiltonianConfig::Terms(lines) => parse_terms(n, lines)?,
        HamiltonianConfig::Ising { ising } => cfg("hamiltonian", ising_periodic(n, ising.j, ising.h))?,
    };
    let dim = 1usize << n;
    let mut jumps = Vec::with_capacity(l.jumps.len());
    for (i, j) in l.jumps.iter().enumerate() {
        let what = format!("jump {}", i + 1);
        let m = match j {
            JumpConfig::Template(t) => {
                if t.qubit == 0 || t.qubit > n {
                    return config(format!("{what}: qubit {} outside 1..={n}", t.qubit));
                }
                if !(t.gamma >= 0.0 && t.gamma.is_finite()) {
                    return config(format!("{what}: gamma must be finite and nonnegative"));
                }
                match t.template.as_str() {
                    "amplitude_damping" => cfg(&what, amplitude_damping(n, t.qubit - 1, t.gamma))?,
                    "dephasing" => cfg(&what, dephasing(n, t.qubit - 1, t.gamma))?,
                    other => return config(format!("{what}: unknown template '{other}'")),
                }
            }
            JumpConfig::Matrix { matrix } => {
                if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
                    return config(format!("{what}: matrix must be {dim}x{dim}"));
                }
                CMatrix::from_fn(dim, dim, |r, c| C64::new(matrix[r][c][0], matrix[r][c][1]))
            }
        };
        jumps.push(m);
    }
    let model = cfg("model", LindbladModel::new(h, jumps))?;
    let mut gen = vectorize_model(&model)?;
    if let Some(c_p) = l.c_p {
        gen = cfg("c_p", gen.with_cp(c_p))?;
    }
    let rho0 = pure_density(&state(n, &l.initial_state)?);
    let observable = match &l.observable {
        ObservableConfig::Projector(bits) => projector(n, bits)?,
        ObservableConfig::Terms(lines) => cfg("observable", parse_terms(n, lines)?.to_matrix())?,
    };
    let open = cfg("observable", OpenSystemObservable::new(&observable, &rho0))?;
    Ok(Prepared::Lindblad { model, gen, observable, rho0, open })
}

pub fn kernel(cfg: &RunConfig) -> Result<KernelSpec> {
    let k = &cfg.kernel;
    let family = match (k.family.as_str(), k.beta) {
        ("cauchy", None) => KernelFamily::Cauchy,
        ("cauchy", Some(_)) => return config("kernel.beta only applies to the beta family"),
        ("beta", Some(b)) => KernelFamily::Beta(b),
        ("beta", None) => return config("kernel.beta is required for the beta family"),
        (other, _) => return config(format!("unknown kernel family '{other}'")),
    };
    self::cfg("kernel", KernelSpec::new(family, k.eps))
}

pub fn propagator(cfg: &RunConfig, method: Method) -> Result<PropagatorSpec> {
    let need = |v: Option<f64>, key: &str| v.ok_or_else(|| CliError::Config(format!("propagator.{key} is required for {}", method.name())));
    let spec = match method {
        Method::Exact => PropagatorSpec::Exact,
        Method::Trotter1 => PropagatorSpec::Trotter1 { dt: need(cfg.propagator.dt, "dt")? },
        Method::Qdrift => PropagatorSpec::Qdrift { dt: need(cfg.propagator.dt, "dt")? },
        Method::Continuous => PropagatorSpec::Continuous { tau: need(cfg.propagator.tau, "tau")? },
    };
    self::cfg("propagator", spec.validate())?;
    Ok(spec)
}

pub fn readout(cfg: &RunConfig) -> Result<Readout> {
    match cfg.readout.shots {
        None => Ok(Readout::Exact),
        Some(0) => config("readout.shots must be positive"),
        Some(m) => Ok(Readout::Shots(m)),
    }
}

/// The configured `(h, Q)` rule, or the planned one for the model's largest norm.
pub fn quadrature(cfg: &RunConfig, kernel: &KernelSpec, model: &NonHermitianModel) -> Result<QuadratureRule> {
    let horizon = cfg.times.t_end;
    let (h, q) = match (cfg.estimation.h, cfg.estimation.q) {
        (Some(h), Some(q)) => (h, q),
        (h, q) => {
            let norm = model.spectral_summary(horizon.max(1e-3), default_grid_points(horizon.max(1e-3)))?.max_norm;
            let (ph, pq) = nhqmc_core::kernel::quadrature_parameters(kernel, horizon.max(1e-3), norm.max(1e-12))?;
            (h.unwrap_or(ph), q.unwrap_or(pq))
        }
    };
    self::cfg("estimation", QuadratureRule::composite(kernel, h, q))
}
