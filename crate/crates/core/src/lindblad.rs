//! Vectorized Lindblad dynamics. With row-major vectorization the master
//! equation becomes `d|ρ⟩⟩/dt = L̄|ρ⟩⟩ = -i L|ρ⟩⟩` with `L = i L̄ = L_r - i L_i`,
//! and `tr(O ρ(t))` is a single LCHS matrix element; no denominator is needed.

use alloc::format;
use alloc::vec::Vec;

use crate::dense::{
    eigenvalues, frobenius_norm, identity, is_hermitian, kron, max_abs_diff, vectorize, CMatrix, CVector,
    HermitianEigen, DEFAULT_DENSE_CAP,
};
use crate::error::{input, Error, Result};
use crate::estimator::{estimate_linear, lchs_states, Executor, McSettings};
use crate::kernel::QuadratureRule;
use crate::model::NonHermitianModel;
use crate::ode;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::propagate::{Generator, PropagatorSpec, StateVector};
use crate::schedule::Schedule;
use crate::C64;

/// Margin added to the minimal compensation constant by default.
pub const DEFAULT_CP_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    n_qubits: usize,
    h: PauliSum,
    jumps: Vec<CMatrix>,
}

/// `√γ |0⟩⟨1|` on `qubit` (0-based, leftmost = 0).
pub fn amplitude_damping(n_qubits: usize, qubit: usize, gamma: f64) -> Result<CMatrix> {
    let lower = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    embed(n_qubits, qubit, &(lower * C64::new(libm::sqrt(gamma), 0.0)))
}

/// `√γ Z` on `qubit`; off-diagonal coherences decay as `e^{-2γt}`.
pub fn dephasing(n_qubits: usize, qubit: usize, gamma: f64) -> Result<CMatrix> {
    let z = PauliString::single(n_qubits, qubit, Pauli::Z)?;
    Ok(z.to_matrix()? * C64::new(libm::sqrt(gamma), 0.0))
}

fn embed(n_qubits: usize, qubit: usize, op: &CMatrix) -> Result<CMatrix> {
    if qubit >= n_qubits {
        return input(format!("qubit {qubit} outside a {n_qubits}-qubit register"));
    }
    if n_qubits > DEFAULT_DENSE_CAP {
        return Err(Error::Resource { requested: n_qubits, cap: DEFAULT_DENSE_CAP });
    }
    let left = identity(1 << qubit);
    let right = identity(1 << (n_qubits - 1 - qubit));
    Ok(kron(&kron(&left, op), &right))
}

/// Periodic transverse-field Ising chain `-J Σ Z_i Z_{i+1} - h Σ X_i`.
pub fn ising_periodic(n_qubits: usize, j: f64, h: f64) -> Result<PauliSum> {
    let mut terms = Vec::new();
    let pairs = if n_qubits > 2 { n_qubits } else { n_qubits.saturating_sub(1) };
    for i in 0..pairs {
        let mut s = PauliString::single(n_qubits, i, Pauli::Z)?;
        s.set((i + 1) % n_qubits, Pauli::Z);
        terms.push((C64::new(-j, 0.0), s));
    }
    for i in 0..n_qubits {
        terms.push((C64::new(-h, 0.0), PauliString::single(n_qubits, i, Pauli::X)?));
    }
    PauliSum::from_terms(n_qubits, terms)
}

impl LindbladModel {
    pub fn new(h: PauliSum, jumps: Vec<CMatrix>) -> Result<Self> {
        let n = h.n_qubits();
        let dim = 1usize << n;
        if !h.is_hermitian(1e-12) {
            return input("Lindblad Hamiltonian must be Hermitian");
        }
        for (i, g) in jumps.iter().enumerate() {
            if g.shape() != (dim, dim) {
                return input(format!("jump operator {i} is {:?}, expected {dim}×{dim}", g.shape()));
            }
        }
        Ok(Self { n_qubits: n, h, jumps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.h
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    fn check_cap(&self) -> Result<()> {
        if 2 * self.n_qubits > DEFAULT_DENSE_CAP {
            return Err(Error::Resource { requested: 2 * self.n_qubits, cap: DEFAULT_DENSE_CAP });
        }
        Ok(())
    }

    /// Dense `L̄` acting on row-major `|ρ⟩⟩`.
    pub fn superoperator(&self) -> Result<CMatrix> {
        self.check_cap()?;
        let h = self.h.to_matrix()?;
        let id = identity(1 << self.n_qubits);
        let mut l = (kron(&h, &id) - kron(&id, &h.transpose())) * C64::new(0.0, -1.0);
        l += dissipator(&self.jumps, &id);
        Ok(l)
    }

    /// `dρ/dt = -i[H, ρ] + Σ (Γ ρ Γ† - ½{Γ†Γ, ρ})`.
    pub fn rhs(&self, rho: &CMatrix) -> Result<CMatrix> {
        let h = self.h.to_matrix_capped(DEFAULT_DENSE_CAP)?;
        Ok(master_rhs(&h, &self.jumps, rho))
    }
}

fn dissipator(jumps: &[CMatrix], id: &CMatrix) -> CMatrix {
    let dim = id.nrows();
    let mut l = CMatrix::zeros(dim * dim, dim * dim);
    for g in jumps {
        let gg = g.ad_mul(g);
        l += kron(g, &g.map(|z| z.conj()));
        l -= kron(&gg, id) * C64::new(0.5, 0.0);
        l -= kron(id, &gg.transpose()) * C64::new(0.5, 0.0);
    }
    l
}

fn master_rhs(h: &CMatrix, jumps: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let mut d = (h * rho - rho * h) * C64::new(0.0, -1.0);
    for g in jumps {
        let gg = g.ad_mul(g);
        d += g * rho * g.adjoint();
        d -= (&gg * rho + rho * &gg) * C64::new(0.5, 0.0);
    }
    d
}

/// `L̄` with its Pauli decomposition and the Hermitian split of `L = i L̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedGenerator {
    pub n_qubits: usize,
    pub lbar: PauliSum,
    pub l: PauliSum,
    pub lr: PauliSum,
    pub li: PauliSum,
    pub c_p: f64,
    pub c_p_minimal: f64,
    dense: CMatrix,
}

/// Builds `L̄`, decomposes it and chooses `c_p = minimal + 1e-6`.
pub fn vectorize_model(model: &LindbladModel) -> Result<VectorizedGenerator> {
    let dense = model.superoperator()?;
    let lbar = PauliSum::decompose(&dense)?;
    let l = lbar.scaled(C64::new(0.0, 1.0));
    let (lr, li) = l.hermitian_split();
    let lambda_min = HermitianEigen::new(&li.to_matrix()?)?.min();
    let c_p_minimal = (-lambda_min).max(0.0);
    let bound = 2.0 * (model.h.l1_norm() + model.jumps.iter().map(|g| Ok(PauliSum::decompose(g)?.l1_norm().powi(2))).sum::<Result<f64>>()?);
    if c_p_minimal > bound + 1e-9 {
        return Err(Error::Consistency(format!("minimal c_p {c_p_minimal} exceeds the norm bound {bound}")));
    }
    Ok(VectorizedGenerator {
        n_qubits: 2 * model.n_qubits,
        lbar,
        l,
        lr,
        li,
        c_p: c_p_minimal + DEFAULT_CP_MARGIN,
        c_p_minimal,
        dense,
    })
}

impl VectorizedGenerator {
    pub fn with_cp(mut self, c_p: f64) -> Result<Self> {
        if !(c_p >= self.c_p_minimal - 1e-9) {
            return Err(Error::InvalidGenerator(format!(
                "c_p = {c_p} is below the minimal admissible {}",
                self.c_p_minimal
            )));
        }
        self.c_p = c_p;
        Ok(self)
    }

    pub fn dense(&self) -> &CMatrix {
        &self.dense
    }

    /// The non-Hermitian model `L_r - i L_i` with shift `E_i0 = -c_p`.
    pub fn to_model(&self) -> Result<NonHermitianModel> {
        NonHermitianModel::from_parts(
            Generator::from_sum(&self.lr)?,
            Generator::from_sum(&self.li)?,
            Schedule::Constant(-self.c_p),
        )
    }

    /// `max_j |(⟨⟨I| L̄)_j|`.
    pub fn trace_residual(&self) -> f64 {
        let dim = 1usize << (self.n_qubits / 2);
        let id = vectorize(&identity(dim));
        (id.transpose() * &self.dense).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn li_min(&self) -> Result<f64> {
        Ok(HermitianEigen::new(&self.li.to_matrix()?)?.min())
    }
}

/// Outcome of the normal-jump positivity check.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    /// Indices of jumps that are not normal (check inapplicable).
    pub skipped: Vec<usize>,
    /// `λ_min(L_i)` for the dissipator built from the normal jumps alone.
    pub lambda_min: f64,
    pub passed: bool,
}

pub fn is_normal(g: &CMatrix, tol: f64) -> bool {
    max_abs_diff(&(g * g.adjoint()), &g.ad_mul(g)) <= tol
}

/// `λ_min(L_i)` of the purely dissipative generator built from `jumps`.
pub fn dissipator_li_min(jumps: &[CMatrix]) -> Result<f64> {
    let dim = jumps.first().map(|g| g.nrows()).ok_or_else(|| Error::Input("no jump operators".into()))?;
    let id = identity(dim);
    let l = dissipator(jumps, &id) * C64::new(0.0, 1.0);
    let li = (&l - l.adjoint()) * C64::new(0.0, 0.5);
    debug_assert!(is_hermitian(&li, 1e-10));
    Ok(HermitianEigen::new(&li)?.min())
}

/// Checks `L_i ⪰ 0` for the normal jump operators among `jumps`.
pub fn check_normal_positivity(jumps: &[CMatrix]) -> Result<NormalityReport> {
    let mut normal = Vec::new();
    let mut skipped = Vec::new();
    for (i, g) in jumps.iter().enumerate() {
        if is_normal(g, 1e-10) {
            normal.push(g.clone());
        } else {
            skipped.push(i);
        }
    }
    let lambda_min = if normal.is_empty() { 0.0 } else { dissipator_li_min(&normal)? };
    Ok(NormalityReport { skipped, lambda_min, passed: lambda_min >= -1e-9 })
}

/// `O` and `ρ₀` mapped to normalized bra/ket vectors: `tr(O ρ) = prefactor ⟨bra|ρ⟩⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenSystemObservable {
    pub prefactor: f64,
    pub bra: StateVector,
    pub ket: StateVector,
}

impl OpenSystemObservable {
    pub fn new(observable: &CMatrix, rho0: &CMatrix) -> Result<Self> {
        if observable.shape() != rho0.shape() || !observable.is_square() {
            return input("observable and initial state must be square matrices of equal size");
        }
        if !is_hermitian(observable, 1e-12) {
            return input("observable must be Hermitian");
        }
        check_density(rho0)?;
        let (on, rn) = (frobenius_norm(observable), frobenius_norm(rho0));
        if on == 0.0 {
            return input("observable is zero");
        }
        let bra = StateVector::from_vector(&(vectorize(&observable.adjoint()) / C64::new(on, 0.0)))?;
        let ket = StateVector::from_vector(&(vectorize(rho0) / C64::new(rn, 0.0)))?;
        Ok(Self { prefactor: on * rn, bra, ket })
    }
}

/// Validates trace one, Hermiticity and positivity within 1e-10.
pub fn check_density(rho: &CMatrix) -> Result<()> {
    if !is_hermitian(rho, 1e-10) {
        return input("density matrix is not Hermitian");
    }
    if (rho.trace() - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return input("density matrix does not have unit trace");
    }
    if HermitianEigen::new(rho)?.min() < -1e-10 {
        return input("density matrix is not positive semidefinite");
    }
    Ok(())
}

/// One open-system expectation value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenEstimate {
    pub t: f64,
    /// Full complex estimate; the physical value is its real part.
    pub value: C64,
    pub stderr: f64,
    pub stderr_im: f64,
    pub n_samples: u64,
}

/// Deterministic LCHS evaluation of `prefactor e^{c_p t} ⟨bra| Σ c_q U(t, k_q) |ket⟩`.
pub fn expectation_quadrature<E: Executor>(
    exec: &E,
    gen: &VectorizedGenerator,
    obs: &OpenSystemObservable,
    times: &[f64],
    rule: &QuadratureRule,
    propagator: &PropagatorSpec,
) -> Result<Vec<OpenEstimate>> {
    let model = gen.to_model()?;
    let phis = lchs_states(exec, &model, rule, propagator, &obs.ket, times)?;
    Ok(expectation_from_states(gen, obs, times, &phis))
}

/// Numerator-only Monte Carlo estimate; `settings.n_denominator` is ignored.
pub fn expectation_mc<E: Executor>(
    exec: &E,
    gen: &VectorizedGenerator,
    obs: &OpenSystemObservable,
    times: &[f64],
    settings: &McSettings,
) -> Result<Vec<OpenEstimate>> {
    Ok(expectation_mc_many(exec, gen, core::slice::from_ref(obs), times, settings)?.remove(0))
}

/// [`expectation_mc`] for several observables sharing one initial state and
/// one set of draws.
pub fn expectation_mc_many<E: Executor>(
    exec: &E,
    gen: &VectorizedGenerator,
    observables: &[OpenSystemObservable],
    times: &[f64],
    settings: &McSettings,
) -> Result<Vec<Vec<OpenEstimate>>> {
    let ket = &observables.first().ok_or_else(|| Error::Input("no observables".into()))?.ket;
    if observables.iter().any(|o| o.ket != *ket) {
        return input("observables estimated together must share the initial state");
    }
    let model = gen.to_model()?;
    let bras: Vec<StateVector> = observables.iter().map(|o| o.bra.clone()).collect();
    let stats = estimate_linear(exec, &model, &bras, ket, times, settings)?;
    Ok(stats
        .iter()
        .zip(observables)
        .map(|(series, obs)| {
            series
                .iter()
                .zip(times)
                .map(|(s, &t)| {
                    let s = s.scaled(obs.prefactor * libm::exp(gen.c_p * t));
                    OpenEstimate { t, value: s.mean, stderr: s.stderr_re, stderr_im: s.stderr_im, n_samples: s.n }
                })
                .collect()
        })
        .collect())
}

/// Prefactor-scaled `⟨bra|φ(t)⟩` for LCHS states computed once per time.
pub fn expectation_from_states(
    gen: &VectorizedGenerator,
    obs: &OpenSystemObservable,
    times: &[f64],
    states: &[StateVector],
) -> Vec<OpenEstimate> {
    states
        .iter()
        .zip(times)
        .map(|(phi, &t)| OpenEstimate {
            t,
            value: obs.bra.inner(phi) * (obs.prefactor * libm::exp(gen.c_p * t)),
            stderr: 0.0,
            stderr_im: 0.0,
            n_samples: 0,
        })
        .collect()
}

/// Reference `ρ(t)` by self-converged Runge–Kutta on the master equation.
pub fn exact_reference(model: &LindbladModel, rho0: &CMatrix, times: &[f64]) -> Result<Vec<CMatrix>> {
    model.check_cap()?;
    let dim = 1usize << model.n_qubits;
    if rho0.shape() != (dim, dim) {
        return input("initial state has the wrong dimension");
    }
    let h = model.h.to_matrix()?;
    let scale = h.iter().map(|z| z.norm()).sum::<f64>()
        + model.jumps.iter().map(|g| g.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>()
        + 1.0;
    let rhs = |_: f64, y: &[C64], dy: &mut [C64]| {
        let rho = CMatrix::from_row_slice(dim, dim, y);
        let d = master_rhs(&h, &model.jumps, &rho);
        for (i, slot) in dy.iter_mut().enumerate() {
            *slot = d[(i / dim, i % dim)];
        }
    };
    let y0: Vec<C64> = vectorize(rho0).iter().copied().collect();
    let out = ode::integrate(rhs, &y0, times, 1e-11, (0.5 / scale).min(0.05))?;
    Ok(out.iter().map(|y| CMatrix::from_row_slice(dim, dim, y)).collect())
}

/// `T_f = max_j(-1/Re Δ_j)` over decaying Liouvillian modes; infinite when none decay.
pub fn steady_time(gen: &VectorizedGenerator) -> Result<f64> {
    let ev = eigenvalues(&gen.dense)?;
    let mut tf: f64 = 0.0;
    let mut decaying = false;
    for e in ev {
        if e.re > 1e-8 {
            return Err(Error::InvalidGenerator(format!("Liouvillian eigenvalue {e} has positive real part")));
        }
        if e.re < -1e-10 {
            decaying = true;
            tf = tf.max(-1.0 / e.re);
        }
    }
    Ok(if decaying { tf } else { f64::INFINITY })
}

/// `|ρ⟩⟩` for a pure state.
pub fn pure_density(psi: &StateVector) -> CMatrix {
    let v: CVector = psi.to_vector();
    &v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::Sequential;
    use crate::kernel::KernelSpec;

    fn ad_single() -> LindbladModel {
        LindbladModel::new(PauliSum::zero(1), alloc::vec![amplitude_damping(1, 0, 1.5).unwrap()]).unwrap()
    }

    #[test]
    fn empty_generator_is_zero() {
        let m = LindbladModel::new(PauliSum::zero(1), alloc::vec![]).unwrap();
        let g = vectorize_model(&m).unwrap();
        assert!(g.lbar.is_empty());
        assert_eq!(steady_time(&g).unwrap(), f64::INFINITY);
    }

    #[test]
    fn amplitude_damping_spectrum() {
        let g = vectorize_model(&ad_single()).unwrap();
        let mut ev = crate::dense::hermitian_eigenvalues(&g.li.to_matrix().unwrap()).unwrap();
        ev.sort_by(f64::total_cmp);
        let r = libm::sqrt(2.0);
        let want = [0.75 * (1.0 - r), 0.75, 0.75, 0.75 * (1.0 + r)];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((g.c_p_minimal - 0.75 * (r - 1.0)).abs() < 1e-12);
        assert!(g.trace_residual() < 1e-12);
        assert!((steady_time(&g).unwrap() - 2.0 / 1.5).abs() < 1e-9);
    }

    #[test]
    fn vectorization_convention() {
        let a = CMatrix::from_fn(2, 2, |i, j| C64::new(i as f64 + 0.3, j as f64 - 0.7));
        let b = CMatrix::from_fn(2, 2, |i, j| C64::new(0.2 * j as f64, 1.0 + i as f64));
        let rho = CMatrix::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 0.5));
        let lhs = kron(&a, &b.transpose()) * vectorize(&rho);
        assert!((lhs - vectorize(&(&a * &rho * &b))).norm() < 1e-12);
    }

    #[test]
    fn decay_closed_form() {
        let m = ad_single();
        let rho0 = pure_density(&StateVector::from_bits("1").unwrap());
        let out = exact_reference(&m, &rho0, &[1.0]).unwrap();
        assert!((out[0][(1, 1)].re - libm::exp(-1.5)).abs() < 1e-10);
        assert!((out[0].trace().re - 1.0).abs() < 1e-12);

        let g = vectorize_model(&m).unwrap();
        let obs = OpenSystemObservable::new(&rho0, &rho0).unwrap();
        let kernel = KernelSpec::beta(0.6, 1e-3).unwrap();
        let rule = QuadratureRule::composite(&kernel, 1.0, 8).unwrap();
        let q = expectation_quadrature(&Sequential, &g, &obs, &[0.0, 1.0], &rule, &PropagatorSpec::Exact).unwrap();
        assert!((q[0].value.re - 1.0).abs() < 2e-3);
        assert!((q[1].value.re - libm::exp(-1.5)).abs() < 2e-3);
    }

    #[test]
    fn unitary_jump_is_positive() {
        let z = dephasing(1, 0, 0.7).unwrap();
        assert!(check_normal_positivity(&[z]).unwrap().passed);
        let ad = amplitude_damping(1, 0, 1.5).unwrap();
        let report = check_normal_positivity(&[ad.clone()]).unwrap();
        assert_eq!(report.skipped, alloc::vec![0]);
        assert!(dissipator_li_min(&[ad]).unwrap() < 0.0);
    }

    #[test]
    fn cp_below_minimal_is_rejected() {
        let g = vectorize_model(&ad_single()).unwrap();
        assert!(g.clone().with_cp(0.1).is_err());
        assert!(g.with_cp(0.3607).is_ok());
    }

    #[test]
    fn ising_norm() {
        assert_eq!(ising_periodic(4, 1.0, 2.0).unwrap().l1_norm(), 12.0);
    }
}
