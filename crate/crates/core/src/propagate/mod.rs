//! Statevectors and realizations of `U(T) = T exp(-i ∫ K(s) ds)` for a Hermitian,
//! possibly time-dependent generator `K(t) = Σ c_n(t) σ_n`.
//!
//! Every propagator can report the state at several snapshot times from one
//! sweep. Stochastic propagators return one realization per call.

mod continuous;
mod exact;
mod product;
mod state;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{input, Error, Result};
use crate::pauli::{PauliString, PauliSum, MERGE_TOL};
use crate::schedule::Schedule;

pub use continuous::{
    apply_sequence, gate_identity_lambda, gate_identity_p, gate_identity_residual, log_attenuation,
    sample_continuous_sequence, GateEvent, GateSequence,
};
pub use exact::{evolve_exact, evolve_exact_at, ExactEvolver};
pub use product::{evolve_qdrift, evolve_qdrift_at, evolve_trotter1, evolve_trotter1_at};
pub use state::{apply_pauli_rotation, StateVector};

/// One Pauli term of a [`Generator`] with a real coefficient schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct GenTerm {
    pub string: PauliString,
    pub coeff: Schedule,
}

/// Hermitian generator `K(t) = Σ c_n(t) σ_n` with real schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    n_qubits: usize,
    terms: Vec<GenTerm>,
    constants: Option<Vec<f64>>,
}

impl Generator {
    /// Merges repeated strings (first occurrence fixes the order) and drops
    /// constant terms at or below the merge tolerance.
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = (PauliString, Schedule)>) -> Result<Self> {
        let mut index: BTreeMap<PauliString, usize> = BTreeMap::new();
        let mut merged: Vec<GenTerm> = Vec::new();
        for (string, coeff) in terms {
            if string.n_qubits() != n_qubits {
                return input(format!(
                    "term {string} acts on {} qubits, generator on {n_qubits}",
                    string.n_qubits()
                ));
            }
            match index.get(&string) {
                Some(&i) => merged[i].coeff = merged[i].coeff.plus(&coeff),
                None => {
                    index.insert(string, merged.len());
                    merged.push(GenTerm { string, coeff });
                }
            }
        }
        merged.retain(|t| t.coeff.constant_value().is_none_or(|v| v.abs() > MERGE_TOL));
        let constants = merged.iter().map(|t| t.coeff.constant_value()).collect::<Option<Vec<_>>>();
        Ok(Self { n_qubits, terms: merged, constants })
    }

    /// Time-independent generator from a Pauli sum with real coefficients.
    pub fn from_sum(sum: &PauliSum) -> Result<Self> {
        for t in sum.terms() {
            if t.coeff.im.abs() > 1e-12 * t.coeff.norm().max(1.0) {
                return Err(Error::InvalidGenerator(format!(
                    "coefficient {} of {} is not real",
                    t.coeff, t.string
                )));
            }
        }
        Self::new(sum.n_qubits(), sum.terms().iter().map(|t| (t.string, Schedule::Constant(t.coeff.re))))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[GenTerm] {
        &self.terms
    }

    pub fn is_time_independent(&self) -> bool {
        self.constants.is_some()
    }

    /// Constant coefficients in term order, when time-independent.
    pub fn constant_coeffs(&self) -> Option<&[f64]> {
        self.constants.as_deref()
    }

    /// Writes `c_n(t)` for all terms into `out`.
    pub fn coeffs_at(&self, t: f64, out: &mut Vec<f64>) {
        out.clear();
        match &self.constants {
            Some(c) => out.extend_from_slice(c),
            None => out.extend(self.terms.iter().map(|term| term.coeff.value(t))),
        }
    }

    pub fn at(&self, t: f64) -> PauliSum {
        PauliSum::from_terms(
            self.n_qubits,
            self.terms.iter().map(|term| (crate::C64::new(term.coeff.value(t), 0.0), term.string)),
        )
        .expect("generator terms share the register size")
    }

    /// `∫_{t0}^{t1} c_I(s) ds` for the identity component.
    pub fn identity_integral(&self, t0: f64, t1: f64) -> Result<f64> {
        match self.terms.iter().find(|t| t.string.is_identity()) {
            Some(t) => t.coeff.integral(t0, t1),
            None => Ok(0.0),
        }
    }

    /// `Σ_n ‖c_n‖_∞` over `[t0, t1]`, identity excluded.
    pub fn lambda_bound(&self, t0: f64, t1: f64) -> f64 {
        self.terms.iter().filter(|t| !t.string.is_identity()).map(|t| t.coeff.abs_bound(t0, t1)).sum()
    }
}

/// Propagator choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagatorSpec {
    Exact,
    /// First-order product formula with step `dt`.
    Trotter1 { dt: f64 },
    /// Randomized compiler with `⌈T/dt⌉` gates.
    Qdrift { dt: f64 },
    /// Poisson-process rotations of fixed angle `tau`.
    Continuous { tau: f64 },
}

impl PropagatorSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PropagatorSpec::Exact => Ok(()),
            PropagatorSpec::Trotter1 { dt } | PropagatorSpec::Qdrift { dt } => {
                if dt.is_finite() && dt > 0.0 {
                    Ok(())
                } else {
                    input(format!("time step must be positive, got {dt}"))
                }
            }
            PropagatorSpec::Continuous { tau } => {
                if tau > 0.0 && tau < core::f64::consts::FRAC_PI_2 {
                    Ok(())
                } else {
                    input(format!("rotation angle must lie in (0, π/2), got {tau}"))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PropagatorSpec::Exact => "exact",
            PropagatorSpec::Trotter1 { .. } => "trotter1",
            PropagatorSpec::Qdrift { .. } => "qdrift",
            PropagatorSpec::Continuous { .. } => "continuous",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, PropagatorSpec::Qdrift { .. } | PropagatorSpec::Continuous { .. })
    }
}

/// The propagated state at one snapshot time.
///
/// The represented vector is `exp(log_weight) · state`; `log_weight` is
/// `-log λ_tot(t)` for the continuous method and zero otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub state: StateVector,
    pub log_weight: f64,
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return input("at least one snapshot time is required");
    }
    if times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !t.is_finite()) {
        return input("snapshot times must be finite, nonnegative and nondecreasing");
    }
    Ok(())
}

/// Propagates `state` under `gen` with `spec`, reporting every time in `times`.
pub fn propagate<R: Rng + ?Sized>(
    spec: &PropagatorSpec,
    gen: &Generator,
    state: &StateVector,
    times: &[f64],
    rng: &mut R,
) -> Result<Vec<Snapshot>> {
    spec.validate()?;
    let plain = |states: Vec<StateVector>| {
        states.into_iter().zip(times).map(|(state, &t)| Snapshot { t, state, log_weight: 0.0 }).collect()
    };
    match *spec {
        PropagatorSpec::Exact => Ok(plain(evolve_exact_at(gen, times, state)?)),
        PropagatorSpec::Trotter1 { dt } => Ok(plain(evolve_trotter1_at(gen, times, dt, state)?)),
        PropagatorSpec::Qdrift { dt } => Ok(plain(evolve_qdrift_at(gen, times, dt, rng, state)?)),
        PropagatorSpec::Continuous { tau } => continuous::snapshots(gen, times, tau, rng, state),
    }
}

#[cfg(test)]
mod tests;
