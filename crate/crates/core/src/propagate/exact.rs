use alloc::vec::Vec;

use super::state::{accumulate_pauli, StateVector};
use super::{check_times, Generator};
use crate::dense::{HermitianEigen, DEFAULT_DENSE_CAP};
use crate::error::{input, Result};
use crate::ode;
use crate::C64;

const SELF_CONVERGENCE: f64 = 1e-10;

/// Eigen-decomposition of a time-independent generator, reusable across times and states.
#[derive(Debug, Clone)]
pub struct ExactEvolver {
    eig: HermitianEigen,
}

impl ExactEvolver {
    pub fn new(gen: &Generator) -> Result<Self> {
        if !gen.is_time_independent() {
            return input("the eigenbasis evolver needs a time-independent generator");
        }
        let m = gen.at(0.0).to_matrix_capped(DEFAULT_DENSE_CAP)?;
        Ok(Self { eig: HermitianEigen::new(&m)? })
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eig
    }

    /// `exp(-i K t)|ψ⟩` for each `t` in `times`.
    pub fn evolve_at(&self, times: &[f64], state: &StateVector) -> Result<Vec<StateVector>> {
        let coeffs = self.eig.to_eigenbasis(&state.to_vector());
        times
            .iter()
            .map(|&t| {
                let mut c = coeffs.clone();
                for (x, &e) in c.iter_mut().zip(&self.eig.values) {
                    *x *= C64::from_polar(1.0, -e * t);
                }
                StateVector::from_vector(&(&self.eig.vectors * c))
            })
            .collect()
    }
}

/// Reference evolution: eigenbasis exponential when time-independent, otherwise
/// self-converged fourth-order Runge–Kutta.
pub fn evolve_exact(gen: &Generator, t: f64, state: &StateVector) -> Result<StateVector> {
    Ok(evolve_exact_at(gen, &[t], state)?.pop().expect("one snapshot"))
}

pub fn evolve_exact_at(gen: &Generator, times: &[f64], state: &StateVector) -> Result<Vec<StateVector>> {
    check_times(times)?;
    if gen.n_qubits() > DEFAULT_DENSE_CAP {
        return Err(crate::Error::Resource { requested: gen.n_qubits(), cap: DEFAULT_DENSE_CAP });
    }
    if gen.is_time_independent() {
        return ExactEvolver::new(gen)?.evolve_at(times, state);
    }
    let horizon = times[times.len() - 1];
    let bound = gen.terms().iter().map(|t| t.coeff.abs_bound(0.0, horizon)).sum::<f64>();
    let max_step = (0.25 / bound.max(1e-3)).min(0.05);
    let mut coeffs = Vec::new();
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        dy.fill(C64::new(0.0, 0.0));
        gen.coeffs_at(t, &mut coeffs);
        for (term, &c) in gen.terms().iter().zip(&coeffs) {
            accumulate_pauli(&term.string, C64::new(0.0, -c), y, dy);
        }
    };
    let out = ode::integrate(rhs, state.amplitudes(), times, SELF_CONVERGENCE, max_step)?;
    out.into_iter().map(StateVector::from_amplitudes).collect()
}

