//! Monte Carlo dynamics of arbitrary time-dependent non-Hermitian Hamiltonians.
//!
//! A non-unitary evolution `T exp(-i ∫ H(s) ds)` is written as a weighted
//! integral over unitary evolutions generated by the Hermitian family
//! `K(k) = H_r + k (H_i - E_i0)`. Expectation values are then synthesized as a
//! ratio of two Monte Carlo means (numerator and denominator) whose samples only
//! ever require unitary propagation.
//!
//! The crate is `no_std` (with `alloc`). Everything that touches files, clocks or
//! threads lives in the companion `nhqmc` crate; parallel execution is plugged in
//! through [`estimator::Executor`].
//!
//! Layout:
//! - [`pauli`]: Pauli strings, sums, dense realization and decomposition.
//! - [`model`]: time-dependent non-Hermitian models, the Hermitian split, shifts
//!   and spectral summaries.
//! - [`kernel`]: LCHS kernels, truncation, samplers and Gauss–Legendre rules.
//! - [`propagate`]: statevectors and the exact, Trotter, qDrift and continuous
//!   (Poisson-process) propagators.
//! - [`estimator`]: the numerator/denominator estimator, readout emulation and
//!   sample planning.
//! - [`lindblad`]: vectorized Lindblad dynamics on top of the estimator.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dense;
pub mod error;
pub mod estimator;
pub mod kernel;
pub mod lindblad;
pub mod model;
pub mod ode;
pub mod pauli;
pub mod propagate;
pub mod quad;
pub mod rng;
pub mod schedule;
pub mod stats;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
