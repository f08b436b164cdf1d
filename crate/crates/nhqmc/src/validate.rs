//! `nhqmc validate`: desk-scale invariant checks with mutation canaries.

use std::fmt;

use nhqmc_core::dense::{kron, vectorize, CMatrix};
use nhqmc_core::estimator::{
    estimate_quadrature, estimate_series, exact_expectation, lchs_states, plan_samples, Executor, Growth, McSettings,
    ObservableSpec, Problem, Readout, Sequential,
};
use nhqmc_core::kernel::{quadrature_rule, truncation_kc, KernelFamily, KernelSpec, QuadratureRule};
use nhqmc_core::lindblad::{
    amplitude_damping, dissipator_li_min, expectation_quadrature, pure_density, vectorize_model, LindbladModel,
    OpenSystemObservable,
};
use nhqmc_core::model::NonHermitianModel;
use nhqmc_core::pauli::PauliSum;
use nhqmc_core::propagate::{
    evolve_exact, gate_identity_residual, log_attenuation, Generator, PropagatorSpec, StateVector,
};
use nhqmc_core::rng::{draw_rng, DrawRng};
use nhqmc_core::schedule::Schedule;
use nhqmc_core::C64;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub observed: String,
    pub expected: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<28} observed {}, expected {}", self.name, self.observed, self.expected)
    }
}

type CheckResult = nhqmc_core::error::Result<(bool, String, String)>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_matrix(rng: &mut DrawRng, dim: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| c(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
}

fn random_state(rng: &mut DrawRng, n: usize) -> StateVector {
    let amps = (0..1 << n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    StateVector::from_amplitudes(amps).and_then(|s| s.normalized()).expect("nonzero random state")
}

/// `H = A - i B†B` with Hermitian `A`, so `H_i ⪰ 0`.
pub fn random_dissipative_model(rng: &mut DrawRng, n: usize) -> nhqmc_core::error::Result<NonHermitianModel> {
    let dim = 1 << n;
    let a = random_matrix(rng, dim, 1.0);
    let hr = (&a + a.adjoint()) * c(0.5, 0.0);
    let b = random_matrix(rng, dim, 0.5);
    let h = hr - b.ad_mul(&b) * c(0.0, 1.0);
    NonHermitianModel::from_complex_sum(&PauliSum::decompose(&h)?)
}

/// `‖Σ c_q e^{-i K_s(k_q) T}|ψ⟩ - e^{-iHT}|ψ⟩‖` with `K_s = H_r + s·k(H_i - E_i0)`.
fn lchs_residual(model: &NonHermitianModel, rule: &QuadratureRule, psi: &StateVector, t: f64, sign: f64) -> nhqmc_core::error::Result<f64> {
    let mut acc = psi.zeros_like();
    for &(k, w) in &rule.nodes {
        acc.axpy(w, &evolve_exact(&model.k_generator_signed(k, sign), t, psi)?);
    }
    let exact = &model.evolve_reference(&[t], psi)?[0];
    acc.axpy(c(-1.0, 0.0), exact);
    Ok(acc.norm())
}

fn lchs_identity<E: Executor>(exec: &E) -> CheckResult {
    let kernel = KernelSpec::cauchy(1e-3)?;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        let mut rng = draw_rng(11, 0, i);
        let model = random_dissipative_model(&mut rng, 2)?.with_shift(Schedule::Constant(0.0));
        let psi = random_state(&mut rng, 2);
        let norm = model.spectral_summary(1.0, 8)?.max_norm;
        let rule = quadrature_rule(&kernel, 1.0, norm)?;
        let phi = &lchs_states(exec, &model, &rule, &PropagatorSpec::Exact, &psi, &[1.0])?[0];
        let mut diff = phi.clone();
        diff.axpy(c(-1.0, 0.0), &model.evolve_reference(&[1.0], &psi)?[0]);
        worst = worst.max(diff.norm());
    }
    Ok((worst <= 2e-3, format!("{worst:.3e}"), "<= 2e-3".into()))
}

fn sign_canary() -> CheckResult {
    let kernel = KernelSpec::beta(0.6, 1e-3)?;
    let mut rng = draw_rng(11, 0, 0);
    let model = random_dissipative_model(&mut rng, 2)?.with_shift(Schedule::Constant(0.0));
    let psi = random_state(&mut rng, 2);
    let rule = QuadratureRule::composite(&kernel, 0.5, 8)?;
    let plus = lchs_residual(&model, &rule, &psi, 1.0, 1.0)?;
    let minus = lchs_residual(&model, &rule, &psi, 1.0, -1.0)?;
    Ok((plus <= 2e-3 && minus > 2e-2, format!("+k {plus:.2e}, -k {minus:.2e}"), "+k <= 2e-3, -k rejected".into()))
}

fn qite<E: Executor>(exec: &E) -> CheckResult {
    let model = NonHermitianModel::from_complex_sum(&PauliSum::from_labels([(c(0.0, -1.0), "Z")])?)?;
    let obs = ObservableSpec::new(PauliSum::from_labels([(c(1.0, 0.0), "X")])?)?;
    let psi = StateVector::from_bits("+")?;
    let kernel = KernelSpec::cauchy(1e-3)?;
    let rule = quadrature_rule(&kernel, 0.5, model.spectral_summary(0.5, 8)?.max_norm)?;
    let p = Problem { model: &model, observable: &obs, state: &psi, times: &[0.5] };
    let got = estimate_quadrature(exec, &p, &rule, &PropagatorSpec::Exact)?.remove(0)?.estimate();
    let want = 1.0 / 1f64.cosh();
    Ok(((got - want).abs() <= 2e-3, format!("{got:.6}"), format!("{want:.6} ± 2e-3")))
}

fn ad_model(gamma: f64) -> nhqmc_core::error::Result<(LindbladModel, OpenSystemObservable)> {
    let model = LindbladModel::new(PauliSum::zero(1), vec![amplitude_damping(1, 0, gamma)?])?;
    let rho = pure_density(&StateVector::from_bits("1")?);
    Ok((model, OpenSystemObservable::new(&rho, &rho)?))
}

fn amplitude_damping_decay<E: Executor>(exec: &E) -> CheckResult {
    let (model, obs) = ad_model(1.5)?;
    let gen = vectorize_model(&model)?;
    let kernel = KernelSpec::beta(0.6, 1e-3)?;
    let rule = QuadratureRule::composite(&kernel, 1.0, 8)?;
    let got = expectation_quadrature(exec, &gen, &obs, &[1.0], &rule, &PropagatorSpec::Exact)?[0].value.re;
    let want = (-1.5f64).exp();
    Ok(((got - want).abs() <= 2e-3, format!("{got:.6}"), format!("{want:.6} ± 2e-3")))
}

fn trace_preservation<E: Executor>(exec: &E) -> CheckResult {
    let (model, _) = ad_model(1.5)?;
    let rho = pure_density(&StateVector::from_bits("1")?);
    let obs = OpenSystemObservable::new(&CMatrix::identity(2, 2), &rho)?;
    let gen = vectorize_model(&model)?;
    let kernel = KernelSpec::beta(0.6, 1e-3)?;
    let rule = QuadratureRule::composite(&kernel, 1.0, 8)?;
    let times = [0.25, 0.5, 1.0, 2.0];
    let est = expectation_quadrature(exec, &gen, &obs, &times, &rule, &PropagatorSpec::Exact)?;
    let worst = est.iter().map(|e| (e.value.re - 1.0).abs()).fold(0.0, f64::max);
    Ok((worst <= 2e-3, format!("max |tr - 1| = {worst:.2e}"), "<= 2e-3".into()))
}

fn gate_identity() -> CheckResult {
    let mut rng = draw_rng(12, 0, 0);
    let (mut worst, mut canary) = (0.0f64, f64::INFINITY);
    for _ in 0..100 {
        let cc = rng.random_range(-3.0..3.0);
        let tau = rng.random_range(0.01..1.5);
        let dtau = rng.random_range(1e-4..0.05);
        worst = worst.max(gate_identity_residual(cc, tau, dtau, -1.0));
        canary = canary.min(gate_identity_residual(cc, tau, dtau, 1.0));
    }
    Ok((worst <= 1e-12 && canary > 1e-8, format!("(1-p) {worst:.1e}, (1+p) min {canary:.1e}"), "(1-p) <= 1e-12, (1+p) rejected".into()))
}

fn attenuation() -> CheckResult {
    let gen = Generator::new(1, [("X".parse()?, Schedule::Constant(2.0))])?;
    let got = log_attenuation(&gen, 2.0, 0.05)?.exp();
    let want = (-4.0 * 0.025f64.tan()).exp();
    Ok(((got - want).abs() <= 1e-9, format!("{got:.9}"), format!("{want:.9}")))
}

fn planner() -> CheckResult {
    let plan = plan_samples(0.05, 0.1, 1.0, 1.0, 0.0, Growth::Bandwidth(0.0))?;
    let kc = truncation_kc(KernelFamily::Cauchy, 0.01)?;
    let kc_closed = 1.0 / (std::f64::consts::PI * 0.005).tan();
    let k_closed = 2.0 * (8.0f64 / 0.05).ln();
    let ok = plan.n_numerator == 9136 && (kc / kc_closed - 1.0).abs() < 5e-7 && (plan.k_factor / k_closed - 1.0).abs() < 5e-7;
    Ok((ok, format!("n = {}, k_c = {kc:.5}, K = {:.4}", plan.n_numerator, plan.k_factor), format!("n = 9136, k_c = {kc_closed:.5}, K = {k_closed:.4}")))
}

fn normality() -> CheckResult {
    let mut rng = draw_rng(13, 0, 0);
    let mut worst = f64::INFINITY;
    for _ in 0..10 {
        let g = random_normal(&mut rng, 2);
        worst = worst.min(dissipator_li_min(&[g])?);
    }
    let ad = dissipator_li_min(&[amplitude_damping(1, 0, 1.5)?])?;
    let want = 1.5 * (1.0 - 2f64.sqrt()) / 2.0;
    let ok = worst >= -1e-9 && (ad - want).abs() < 1e-9;
    Ok((ok, format!("normal min {worst:.2e}, AD {ad:.6}"), format!(">= -1e-9, AD {want:.6}")))
}

/// `U D U†` with a random unitary `U` and random complex diagonal `D`.
pub fn random_normal(rng: &mut DrawRng, dim: usize) -> CMatrix {
    let a = random_matrix(rng, dim, 1.0);
    let h = (&a + a.adjoint()) * c(0.5, 0.0);
    let eig = nhqmc_core::dense::HermitianEigen::new(&h).expect("Hermitian eigen");
    let d = CMatrix::from_fn(dim, dim, |r, col| if r == col { c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) } else { c(0.0, 0.0) });
    &eig.vectors * d * eig.vectors.adjoint()
}

fn vectorization() -> CheckResult {
    let mut rng = draw_rng(14, 0, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (a, b, rho) = (random_matrix(&mut rng, 4, 1.0), random_matrix(&mut rng, 4, 1.0), random_matrix(&mut rng, 4, 1.0));
        let lhs = kron(&a, &b.transpose()) * vectorize(&rho);
        worst = worst.max((lhs - vectorize(&(&a * &rho * &b))).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok((worst <= 1e-12, format!("{worst:.1e}"), "<= 1e-12".into()))
}

fn shift_invariance<E: Executor>(exec: &E) -> CheckResult {
    let base = NonHermitianModel::from_complex_sum(&PauliSum::from_labels([(c(1.0, 0.0), "X"), (c(0.0, -1.0), "Z")])?)?;
    let obs = ObservableSpec::new(PauliSum::from_labels([(c(1.0, 0.0), "Z")])?)?;
    let psi = StateVector::from_bits("0")?;
    let kernel = KernelSpec::cauchy(1e-3)?;
    let rule = QuadratureRule::composite(&kernel, 0.25, 8)?;
    let mut vals = Vec::new();
    for e in [-1.0, -1.5] {
        let m = base.clone().with_shift(Schedule::Constant(e));
        let p = Problem { model: &m, observable: &obs, state: &psi, times: &[0.7] };
        vals.push(estimate_quadrature(exec, &p, &rule, &PropagatorSpec::Exact)?.remove(0)?.estimate());
    }
    let d = (vals[0] - vals[1]).abs();
    Ok((d <= 5e-3, format!("{:.6} vs {:.6}", vals[0], vals[1]), "agree within 5e-3".into()))
}

fn hermitian_reduction<E: Executor>(exec: &E) -> CheckResult {
    let model = NonHermitianModel::from_complex_sum(&PauliSum::from_labels([(c(1.0, 0.0), "XI"), (c(0.5, 0.0), "ZZ")])?)?;
    let obs = ObservableSpec::new(PauliSum::from_labels([(c(1.0, 0.0), "ZI")])?)?;
    let psi = StateVector::from_bits("00")?;
    let times = [0.8];
    let kernel = KernelSpec::cauchy(1e-2)?;
    let p = Problem { model: &model, observable: &obs, state: &psi, times: &times };
    let want = exact_expectation(&p)?[0].re;
    let mut worst: f64 = 0.0;
    for propagator in [PropagatorSpec::Exact, PropagatorSpec::Trotter1 { dt: 0.01 }, PropagatorSpec::Continuous { tau: 0.05 }] {
        let s = McSettings { kernel: &kernel, propagator, n_numerator: 2000, n_denominator: 2000, readout: Readout::Exact, seed: 5, paired: false };
        let r = estimate_series(exec, &p, &s)?.remove(0)?;
        let z = (r.estimate() - want).abs() / (r.stderr + 1e-3);
        worst = worst.max(z);
    }
    Ok((worst <= 3.0, format!("max z = {worst:.2}"), "<= 3".into()))
}

fn determinism<E: Executor>(exec: &E) -> CheckResult {
    let model = NonHermitianModel::from_complex_sum(&PauliSum::from_labels([(c(1.0, 0.0), "X"), (c(0.0, -0.5), "Z")])?)?;
    let obs = ObservableSpec::new(PauliSum::from_labels([(c(1.0, 0.0), "Z")])?)?;
    let psi = StateVector::from_bits("0")?;
    let kernel = KernelSpec::cauchy(1e-2)?;
    let p = Problem { model: &model, observable: &obs, state: &psi, times: &[0.3, 0.6] };
    let s = McSettings {
        kernel: &kernel,
        propagator: PropagatorSpec::Continuous { tau: 0.1 },
        n_numerator: 3000,
        n_denominator: 3000,
        readout: Readout::Shots(16),
        seed: 99,
        paired: false,
    };
    let a = estimate_series(exec, &p, &s)?;
    let b = estimate_series(&Sequential, &p, &s)?;
    Ok((a == b, if a == b { "identical".into() } else { "differ".into() }, "bit-identical across executors".into()))
}

/// Runs every check; errors count as failures.
pub fn run_all<E: Executor>(exec: &E) -> Vec<Check> {
    let checks: Vec<(&'static str, Box<dyn Fn() -> CheckResult + '_>)> = vec![
        ("lchs identity", Box::new(|| lchs_identity(exec))),
        ("k-sign canary", Box::new(sign_canary)),
        ("qite limit", Box::new(|| qite(exec))),
        ("amplitude damping decay", Box::new(|| amplitude_damping_decay(exec))),
        ("trace preservation", Box::new(|| trace_preservation(exec))),
        ("gate identity", Box::new(gate_identity)),
        ("continuous attenuation", Box::new(attenuation)),
        ("planner formulas", Box::new(planner)),
        ("normal jump positivity", Box::new(normality)),
        ("vectorization convention", Box::new(vectorization)),
        ("shift invariance", Box::new(|| shift_invariance(exec))),
        ("hermitian reduction", Box::new(|| hermitian_reduction(exec))),
        ("determinism", Box::new(|| determinism(exec))),
    ];
    checks
        .into_iter()
        .map(|(name, f)| match f() {
            Ok((passed, observed, expected)) => Check { name, passed, observed, expected },
            Err(e) => Check { name, passed: false, observed: format!("error: {e}"), expected: "no error".into() },
        })
        .collect()
}
