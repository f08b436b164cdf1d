//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! workers = 4
//!
//! [model]
//! kind = "generic"                 # or "lindblad"
//! n_qubits = 1
//! terms = ["0.0-1.0i Z"]           # constant terms, `<coeff> <label>`
//! initial_state = "+"              # bit label or [[re, im], ...]
//! observable = { terms = ["1.0 X"] }
//!
//! [kernel]
//! family = "cauchy"                # or "beta" with `beta = 0.6`
//! eps = 1e-3
//!
//! [propagator]
//! method = "exact"                 # or `methods = [...]`
//!
//! [sampling]
//! n_numerator = 100000
//! n_denominator = 100000
//!
//! [times]
//! t_start = 0.0
//! t_end = 1.0
//! points = 11
//! ```
//!
//! Qubits are numbered from 1 (leftmost label position).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{config, CliError, Result};

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub model: ModelConfig,
    pub kernel: KernelConfig,
    pub propagator: PropagatorConfig,
    pub times: TimeGrid,
    #[serde(default)]
    pub estimation: EstimationConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub readout: ReadoutConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Generic(GenericModel),
    Lindblad(LindbladConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericModel {
    pub n_qubits: usize,
    #[serde(default)]
    pub terms: Vec<String>,
    #[serde(default)]
    pub schedules: Vec<ScheduledTerm>,
    /// Constant `E_i0`; the minimal admissible shift when absent.
    pub shift: Option<f64>,
    pub initial_state: StateConfig,
    pub observable: ObservableConfig,
}

/// `(re(t) + i im(t)) σ` for one Pauli label.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduledTerm {
    pub label: String,
    #[serde(default)]
    pub re: ScheduleConfig,
    #[serde(default)]
    pub im: ScheduleConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ScheduleConfig {
    Constant(f64),
    Harmonic(HarmonicConfig),
    Piecewise(PiecewiseConfig),
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig::Constant(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    #[serde(default)]
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseConfig {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladConfig {
    pub n_qubits: usize,
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub jumps: Vec<JumpConfig>,
    /// Compensation constant; `minimal + 1e-6` when absent.
    pub c_p: Option<f64>,
    pub initial_state: StateConfig,
    pub observable: ObservableConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianConfig {
    Terms(Vec<String>),
    Ising { ising: IsingConfig },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingConfig {
    pub j: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum JumpConfig {
    Template(JumpTemplate),
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpTemplate {
    pub template: String,
    pub gamma: f64,
    pub qubit: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StateConfig {
    Label(String),
    Amplitudes(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ObservableConfig {
    /// `|b⟩⟨b|` for a bit label.
    Projector(String),
    Terms(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: String,
    pub beta: Option<f64>,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Trotter1,
    Qdrift,
    Continuous,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Trotter1 => "trotter1",
            Method::Qdrift => "qdrift",
            Method::Continuous => "continuous",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorConfig {
    pub method: Option<Method>,
    pub methods: Option<Vec<Method>>,
    pub dt: Option<f64>,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Quadrature for deterministic propagators, Monte Carlo otherwise.
    #[default]
    Auto,
    Mc,
    Quadrature,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    #[serde(default)]
    pub mode: Mode,
    /// Quadrature panel width and nodes per panel; planned when absent.
    pub h: Option<f64>,
    pub q: Option<usize>,
    #[serde(default)]
    pub paired: bool,
}

fn default_max_samples() -> u64 {
    100_000_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub n_numerator: Option<u64>,
    pub n_denominator: Option<u64>,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    /// Planned counts above this only produce a warning.
    #[serde(default = "default_max_samples")]
    pub max_samples: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { n_numerator: None, n_denominator: None, delta: None, eta: None, max_samples: default_max_samples() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutConfig {
    pub shots: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub name: Option<String>,
    #[serde(default)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite()) {
            return config("times must be finite");
        }
        if self.t_start < 0.0 || self.t_end < self.t_start {
            return config(format!("need t_end >= t_start >= 0, got [{}, {}]", self.t_start, self.t_end));
        }
        if self.points == 0 {
            return config("times.points must be at least 1");
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.t_start];
        }
        let step = (self.t_end - self.t_start) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.t_end } else { self.t_start + step * i as f64 }).collect()
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(describe(text, &e)))?;
        cfg.times.validate()?;
        if let Some(dir) = &cfg.output.dir {
            if dir.as_os_str().is_empty() {
                return config("output.dir is empty");
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Methods in declaration order; `method` and `methods` may not both be set.
    pub fn methods(&self) -> Result<Vec<Method>> {
        match (&self.propagator.method, &self.propagator.methods) {
            (Some(_), Some(_)) => config("set either propagator.method or propagator.methods, not both"),
            (Some(m), None) => Ok(vec![*m]),
            (None, Some(ms)) if !ms.is_empty() => Ok(ms.clone()),
            _ => config("propagator.method is required"),
        }
    }
}

fn describe(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim_end();
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {msg}")
        }
        None => msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
seed = 3

[model]
kind = "generic"
n_qubits = 1
terms = ["0.0-1.0i Z"]
initial_state = "+"
observable = { terms = ["1.0 X"] }

[kernel]
family = "cauchy"
eps = 1e-3

[propagator]
method = "exact"

[times]
t_start = 0.0
t_end = 0.5
points = 3
"#;

    #[test]
    fn parses_basic_config() {
        let cfg = RunConfig::parse(BASIC).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.methods().unwrap(), vec![Method::Exact]);
        assert_eq!(cfg.times.times(), vec![0.0, 0.25, 0.5]);
        assert!(matches!(cfg.model, ModelConfig::Generic(ref g) if g.terms.len() == 1));
        assert_eq!(cfg.estimation.mode, Mode::Auto);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = BASIC.replace("eps = 1e-3", "eps = \"small\"");
        let err = RunConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("line 13"), "{err}");
        let unknown = BASIC.replace("seed = 3", "seed = 3\nsead = 4");
        let err = RunConfig::parse(&unknown).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn grid_invariants() {
        let bad = BASIC.replace("t_start = 0.0", "t_start = 1.0");
        assert!(RunConfig::parse(&bad).is_err());
        let g = TimeGrid { t_start: 0.05, t_end: 2.0, points: 40 };
        let t = g.times();
        assert_eq!(t.len(), 40);
        assert!((t[19] - 1.0).abs() < 1e-15);
        assert_eq!(t[39], 2.0);
    }

    #[test]
    fn schedules_and_jumps() {
        let text = r#"
[model]
kind = "lindblad"
n_qubits = 2
hamiltonian = { ising = { j = 1.0, h = 2.0 } }
jumps = [
  { template = "amplitude_damping", gamma = 1.5, qubit = 1 },
  { matrix = [[[0, 0], [1, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0], [0, 0]]] },
]
initial_state = "10"
observable = { projector = "10" }

[kernel]
family = "beta"
beta = 0.6
eps = 1e-3

[propagator]
methods = ["continuous", "trotter1"]
dt = 0.05
tau = 0.05

[times]
t_start = 0.0
t_end = 1.0
points = 1
"#;
        let cfg = RunConfig::parse(text).unwrap();
        let ModelConfig::Lindblad(l) = &cfg.model else { panic!() };
        assert!(matches!(l.jumps[0], JumpConfig::Template(_)));
        assert!(matches!(l.jumps[1], JumpConfig::Matrix { .. }));
        assert!(matches!(l.hamiltonian, HamiltonianConfig::Ising { .. }));
        assert_eq!(cfg.times.times(), vec![0.0]);

        let generic = r#"
[model]
kind = "generic"
n_qubits = 1
schedules = [
  { label = "X", re = { amplitude = 1.0, frequency = 1.0 } },
  { label = "Z", im = { knots = [0.0, 1.0], values = [-1.0, -2.0] } },
  { label = "Y", re = 0.5 },
]
initial_state = [[1.0, 0.0], [0.0, 0.0]]
observable = { terms = ["1.0 Z"] }

[kernel]
family = "cauchy"
eps = 0.01

[propagator]
method = "trotter1"
dt = 0.1

[times]
t_start = 0.0
t_end = 1.0
points = 2
"#;
        let cfg = RunConfig::parse(generic).unwrap();
        let ModelConfig::Generic(g) = &cfg.model else { panic!() };
        assert!(matches!(g.schedules[0].re, ScheduleConfig::Harmonic(_)));
        assert!(matches!(g.schedules[1].im, ScheduleConfig::Piecewise(_)));
        assert_eq!(g.schedules[2].re, ScheduleConfig::Constant(0.5));
        assert!(matches!(g.initial_state, StateConfig::Amplitudes(_)));
    }
}
