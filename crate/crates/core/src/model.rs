//! Time-dependent non-Hermitian Hamiltonians `H(t) = H_r(t) - i H_i(t)` with a
//! shift `E_i0(t)` making `H_i - E_i0` positive semidefinite.

use alloc::format;
use alloc::vec::Vec;

use crate::dense::{spectral_norm, HermitianEigen, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::ode;
use crate::pauli::{PauliString, PauliSum};
use crate::propagate::{Generator, StateVector};
use crate::quad::trapezoid;
use crate::schedule::Schedule;
use crate::C64;

/// Default spectral-scan density (points per unit time).
pub const GRID_POINTS_PER_UNIT_TIME: usize = 64;

/// Positivity slack for `λ_min(H_i - E_i0)`.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NonHermitianModel {
    n_qubits: usize,
    hr: Generator,
    hi: Generator,
    shift: Schedule,
}

/// Spectral data of `H_i(t)` (unshifted) and `H̃(t)` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub times: Vec<f64>,
    pub e_min: Vec<f64>,
    pub e_max: Vec<f64>,
    /// Largest bandwidth `E_max - E_min` over the grid.
    pub delta: f64,
    /// Time-averaged bandwidth.
    pub e_avg: f64,
    /// Largest spectral norm of `H_r - i (H_i - E_i0)` over the grid.
    pub max_norm: f64,
}

/// Grid with `points` equally spaced times on `[0, horizon]`.
pub fn time_grid(horizon: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|j| horizon * j as f64 / (n - 1) as f64).collect()
}

/// Default grid size for a scan over `[0, horizon]`.
pub fn default_grid_points(horizon: f64) -> usize {
    (libm::ceil(horizon * GRID_POINTS_PER_UNIT_TIME as f64) as usize + 1).max(2)
}

impl NonHermitianModel {
    /// Splits a time-independent complex sum and applies the minimal shift.
    pub fn from_complex_sum(h: &PauliSum) -> Result<Self> {
        let (hr, hi) = h.hermitian_split();
        let model = Self::from_parts(Generator::from_sum(&hr)?, Generator::from_sum(&hi)?, Schedule::Constant(0.0))?;
        let shift = model.minimal_shift(0.0, 2)?;
        Ok(model.with_shift(shift))
    }

    /// Builds `H(t) = Σ (re_n(t) + i im_n(t)) σ_n` and applies the minimal shift
    /// tabulated on `grid_points` over `[0, horizon]`.
    pub fn from_schedules(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (PauliString, Schedule, Schedule)>,
        horizon: f64,
        grid_points: usize,
    ) -> Result<Self> {
        let mut hr = Vec::new();
        let mut hi = Vec::new();
        for (s, re, im) in terms {
            hr.push((s, re));
            hi.push((s, im.scaled(-1.0)));
        }
        let model =
            Self::from_parts(Generator::new(n_qubits, hr)?, Generator::new(n_qubits, hi)?, Schedule::Constant(0.0))?;
        let shift = model.minimal_shift(horizon, grid_points)?;
        Ok(model.with_shift(shift))
    }

    /// Direct constructor; `hr` and `hi` are the Hermitian parts.
    pub fn from_parts(hr: Generator, hi: Generator, shift: Schedule) -> Result<Self> {
        if hr.n_qubits() != hi.n_qubits() {
            return Err(Error::Input(format!(
                "H_r acts on {} qubits but H_i on {}",
                hr.n_qubits(),
                hi.n_qubits()
            )));
        }
        Ok(Self { n_qubits: hr.n_qubits(), hr, hi, shift })
    }

    pub fn with_shift(mut self, shift: Schedule) -> Self {
        self.shift = shift;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn hr(&self) -> &Generator {
        &self.hr
    }

    pub fn hi(&self) -> &Generator {
        &self.hi
    }

    pub fn shift(&self) -> &Schedule {
        &self.shift
    }

    pub fn is_time_independent(&self) -> bool {
        self.hr.is_time_independent() && self.hi.is_time_independent() && self.shift.is_constant()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hi.terms().is_empty()
    }

    /// Unshifted `H(t) = H_r(t) - i H_i(t)`.
    pub fn h_at(&self, t: f64) -> PauliSum {
        self.hr.at(t).add(&self.hi.at(t).scaled(C64::new(0.0, -1.0))).expect("parts share the register")
    }

    /// Shifted `H̃(t) = H_r(t) - i (H_i(t) - E_i0(t))`.
    pub fn h_tilde_at(&self, t: f64) -> PauliSum {
        let shift = PauliSum::identity(self.n_qubits).scaled(C64::new(0.0, self.shift.value(t)));
        self.h_at(t).add(&shift).expect("same register")
    }

    /// `K(k, t) = H_r(t) + k (H_i(t) - E_i0(t))`.
    pub fn k_generator(&self, k: f64) -> Generator {
        self.k_generator_signed(k, 1.0)
    }

    /// `H_r + sign · k (H_i - E_i0)`; `sign = 1` is the correct convention and the
    /// other value exists so convention checks can demonstrate failure.
    pub fn k_generator_signed(&self, k: f64, sign: f64) -> Generator {
        let a = sign * k;
        let terms = self
            .hr
            .terms()
            .iter()
            .map(|t| (t.string, t.coeff.clone()))
            .chain(self.hi.terms().iter().map(|t| (t.string, t.coeff.scaled(a))))
            .chain(core::iter::once((PauliString::identity(self.n_qubits), self.shift.scaled(-a))));
        Generator::new(self.n_qubits, terms).expect("model terms share the register")
    }

    /// `K(k, t)` as a Pauli sum at a single time.
    pub fn k_generator_at(&self, k: f64, t: f64) -> PauliSum {
        self.k_generator(k).at(t)
    }

    fn hi_eigen(&self, t: f64) -> Result<HermitianEigen> {
        HermitianEigen::new(&self.hi.at(t).to_matrix_capped(DEFAULT_DENSE_CAP)?)
    }

    pub fn spectral_summary(&self, horizon: f64, grid_points: usize) -> Result<SpectralSummary> {
        if grid_points < 2 {
            return Err(Error::Input("spectral scan needs at least two grid points".into()));
        }
        let times = time_grid(horizon, grid_points);
        let (mut e_min, mut e_max, mut max_norm) = (Vec::new(), Vec::new(), 0.0f64);
        let fixed = self.is_time_independent();
        for (j, &t) in times.iter().enumerate() {
            if fixed && j > 0 {
                e_min.push(e_min[0]);
                e_max.push(e_max[0]);
                continue;
            }
            let eig = self.hi_eigen(t)?;
            e_min.push(eig.min());
            e_max.push(eig.max());
            max_norm = max_norm.max(spectral_norm(&self.h_tilde_at(t).to_matrix_capped(DEFAULT_DENSE_CAP)?)?);
        }
        let width: Vec<f64> = e_max.iter().zip(&e_min).map(|(a, b)| a - b).collect();
        let delta = width.iter().copied().fold(0.0, f64::max);
        let e_avg = if horizon > 0.0 { trapezoid(&times, &width) / horizon } else { width[0] };
        Ok(SpectralSummary { times, e_min, e_max, delta, e_avg, max_norm })
    }

    /// `E_i0(t) = λ_min(H_i(t))`: a constant when time-independent, otherwise
    /// piecewise-linear on the grid.
    pub fn minimal_shift(&self, horizon: f64, grid_points: usize) -> Result<Schedule> {
        if self.hi.is_time_independent() {
            return Ok(Schedule::Constant(self.hi_eigen(0.0)?.min()));
        }
        let times = time_grid(horizon, grid_points);
        let values = times.iter().map(|&t| Ok(self.hi_eigen(t)?.min())).collect::<Result<Vec<_>>>()?;
        Schedule::piecewise_linear(times, values)
    }

    /// Verifies `λ_min(H_i(t) - E_i0(t)) ≥ -1e-9` on the grid.
    pub fn check_positivity(&self, horizon: f64, grid_points: usize) -> Result<()> {
        for t in time_grid(horizon, grid_points) {
            let low = self.hi_eigen(t)?.min() - self.shift.value(t);
            if low < -POSITIVITY_TOL {
                return Err(Error::InvalidGenerator(format!(
                    "H_i - E_i0 has eigenvalue {low:.3e} < 0 at t = {t}"
                )));
            }
            if self.is_time_independent() {
                break;
            }
        }
        Ok(())
    }

    /// Reference non-unitary evolution `T exp(-i ∫ H)|ψ⟩` (unshifted) by
    /// self-converged Runge–Kutta, reported at each of `times`.
    pub fn evolve_reference(&self, times: &[f64], state: &StateVector) -> Result<Vec<StateVector>> {
        if self.n_qubits > DEFAULT_DENSE_CAP {
            return Err(Error::Resource { requested: self.n_qubits, cap: DEFAULT_DENSE_CAP });
        }
        let fixed = self.is_time_independent().then(|| self.h_at(0.0));
        let horizon = times.last().copied().unwrap_or(0.0);
        let bound = self.hr.lambda_bound(0.0, horizon) + self.hi.lambda_bound(0.0, horizon) + 1.0;
        let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
            dy.fill(C64::new(0.0, 0.0));
            let h = match &fixed {
                Some(h) => h.clone(),
                None => self.h_at(t),
            };
            let psi = StateVector::from_amplitudes(y.to_vec()).expect("power-of-two length");
            psi.apply_sum_into(&h, C64::new(0.0, -1.0), dy);
        };
        let scale = state.norm().max(1.0);
        let out = ode::integrate(rhs, state.amplitudes(), times, 1e-11 * scale, (0.25 / bound).min(0.05))?;
        out.into_iter().map(StateVector::from_amplitudes).collect()
    }
}
