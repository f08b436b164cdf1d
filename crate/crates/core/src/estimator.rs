//! Numerator/denominator Monte Carlo estimation of `⟨O⟩(t)` for non-Hermitian
//! dynamics, its deterministic quadrature counterpart, and sample planning.
//!
//! The numerator `N(O) = ⟨ψ|u†(t) O u(t)|ψ⟩` with `u = ∫ g(k) U(t, k) dk` is
//! sampled over `(k′, k, n)`; the denominator is `N(I)`. Every draw owns a
//! random stream keyed by `(seed, stream, draw index)` and draws are reduced in
//! fixed chunks with pairwise summation, so results do not depend on how an
//! [`Executor`] schedules the work.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{input, Error, Result};
use crate::kernel::{KSample, KernelSpec, QuadratureRule};
use crate::model::NonHermitianModel;
use crate::pauli::{PauliString, PauliSum, PauliTerm};
use crate::propagate::{propagate, PropagatorSpec, Snapshot, StateVector};
use crate::quad::trapezoid;
use crate::rng::{draw_rng, streams, DrawRng};
use crate::stats::{ComplexStat, Moments};
use crate::C64;

/// Draws per reduction chunk; fixed so chunk boundaries never depend on workers.
pub const CHUNK: usize = 1024;

/// Runs independent tasks and returns their results in task order.
pub trait Executor {
    fn run<T, F>(&self, n_tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs tasks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run<T, F>(&self, n_tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n_tasks).map(f).collect()
    }
}

/// `O = Σ o_n O_n` with term probabilities `|o_n|/‖O‖₁` and unit phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpec {
    sum: PauliSum,
    l1: f64,
    cumulative: Vec<f64>,
    phases: Vec<C64>,
}

impl ObservableSpec {
    pub fn new(sum: PauliSum) -> Result<Self> {
        let l1 = sum.l1_norm();
        if sum.is_empty() || l1 == 0.0 {
            return input("observable has no terms");
        }
        let mut acc = 0.0;
        let cumulative = sum
            .terms()
            .iter()
            .map(|t| {
                acc += t.coeff.norm() / l1;
                acc
            })
            .collect();
        let phases = sum.terms().iter().map(|t| t.coeff / t.coeff.norm()).collect();
        Ok(Self { sum, l1, cumulative, phases })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(PauliSum::identity(n_qubits)).expect("identity is nonzero")
    }

    pub fn sum(&self) -> &PauliSum {
        &self.sum
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn probability(&self, n: usize) -> f64 {
        self.sum.terms()[n].coeff.norm() / self.l1
    }

    pub fn phase(&self, n: usize) -> C64 {
        self.phases[n]
    }

    pub fn term(&self, n: usize) -> &PauliTerm {
        &self.sum.terms()[n]
    }

    pub fn sample_term<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>();
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

/// One Algorithm-1 draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleDraw {
    pub k_bra: KSample,
    pub k_ket: KSample,
    pub term: usize,
    /// `conj(phase(k′)) · phase(k) · phase_n`.
    pub combined_phase: C64,
}

impl SampleDraw {
    pub fn sample<R: Rng + ?Sized>(kernel: &KernelSpec, observable: &ObservableSpec, rng: &mut R) -> Self {
        let k_bra = kernel.sample_k(rng);
        let k_ket = kernel.sample_k(rng);
        let term = observable.sample_term(rng);
        let combined_phase = k_bra.phase.conj() * k_ket.phase * observable.phase(term);
        Self { k_bra, k_ket, term, combined_phase }
    }
}

/// Ancilla readout emulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    Exact,
    /// `m` shots each of the X and Y measurements.
    Shots(u64),
}

/// Returns the overlap, or its shot-noise estimate: `⟨X⟩ = Re v`, `⟨Y⟩ = -Im v`.
pub fn readout<R: Rng + ?Sized>(value: C64, mode: Readout, rng: &mut R) -> Result<C64> {
    let m = match mode {
        Readout::Exact => return Ok(value),
        Readout::Shots(m) => m,
    };
    if m == 0 {
        return input("shot count must be positive");
    }
    if value.re.abs() > 1.0 + 1e-9 || value.im.abs() > 1.0 + 1e-9 {
        return Err(Error::Consistency(format!("overlap {value} exceeds unit modulus per component")));
    }
    let mut measure = |mean: f64| -> Result<f64> {
        let p = (0.5 * (1.0 + mean)).clamp(0.0, 1.0);
        let dist = Binomial::new(m, p).map_err(|e| Error::Numerical(format!("{e}")))?;
        Ok(2.0 * dist.sample(rng) as f64 / m as f64 - 1.0)
    };
    let x = measure(value.re)?;
    let y = measure(-value.im)?;
    Ok(C64::new(x, -y))
}

/// Growth factor entering the Hoeffding sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth {
    /// `e^{4TΔ}` with the anti-Hermitian bandwidth `Δ`.
    Bandwidth(f64),
    /// `1/p_g²` with the ground-state overlap `p_g` (time-independent case).
    GroundOverlap(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub delta: f64,
    pub eta: f64,
    /// `K = 2 ln(8/δ)`.
    pub k_factor: f64,
    pub n_numerator: u64,
    pub n_denominator: u64,
    pub d_lower: f64,
    pub d_upper: f64,
}

impl SamplingPlan {
    /// Fixed sample counts without a Hoeffding derivation.
    pub fn fixed(n_numerator: u64, n_denominator: u64) -> Result<Self> {
        if n_numerator == 0 || n_denominator == 0 {
            return input("sample counts must be at least 1");
        }
        Ok(Self {
            delta: f64::NAN,
            eta: f64::NAN,
            k_factor: f64::NAN,
            n_numerator,
            n_denominator,
            d_lower: 0.0,
            d_upper: 1.0,
        })
    }

    pub fn with_bounds(mut self, (lower, upper): (f64, f64)) -> Self {
        self.d_lower = lower;
        self.d_upper = upper;
        self
    }
}

/// `n = ⌈2 ln(8/δ) (2‖O‖₁ + 1)² ‖g‖₁⁴ G / η²⌉` with `G = e^{4TΔ}` or `1/p_g²`.
pub fn plan_samples(delta: f64, eta: f64, o_l1: f64, g_l1: f64, horizon: f64, growth: Growth) -> Result<SamplingPlan> {
    if !(delta > 0.0 && delta < 1.0 && eta > 0.0 && eta < 1.0) {
        return input("δ and η must lie in (0, 1)");
    }
    if o_l1 <= 0.0 || g_l1 <= 0.0 {
        return input("observable and kernel norms must be positive");
    }
    let g = match growth {
        Growth::Bandwidth(d) => libm::exp(4.0 * horizon * d),
        Growth::GroundOverlap(p) if p > 0.0 && p <= 1.0 => 1.0 / (p * p),
        Growth::GroundOverlap(p) => return input(format!("ground-state overlap must lie in (0, 1], got {p}")),
    };
    let k_factor = 2.0 * libm::log(8.0 / delta);
    let base = 2.0 * o_l1 + 1.0;
    let n = k_factor * base * base * libm::pow(g_l1, 4.0) * g / (eta * eta);
    if !n.is_finite() || n > u64::MAX as f64 {
        return Err(Error::Numerical(format!("planned sample count {n:e} is not representable")));
    }
    let n = libm::ceil(n) as u64;
    Ok(SamplingPlan { delta, eta, k_factor, n_numerator: n, n_denominator: n, d_lower: 0.0, d_upper: 1.0 })
}

/// `(e^{-2∫(E_max - E_i0)}, e^{-2∫(E_min - E_i0)})` by trapezoid on the scan grid.
pub fn bound_denominator(model: &NonHermitianModel, horizon: f64, grid_points: usize) -> Result<(f64, f64)> {
    let s = model.spectral_summary(horizon, grid_points)?;
    let shift: Vec<f64> = s.times.iter().map(|&t| model.shift().value(t)).collect();
    let hi: Vec<f64> = s.e_max.iter().zip(&shift).map(|(e, z)| e - z).collect();
    let lo: Vec<f64> = s.e_min.iter().zip(&shift).map(|(e, z)| e - z).collect();
    let lower = libm::exp(-2.0 * trapezoid(&s.times, &hi));
    let upper = libm::exp(-2.0 * trapezoid(&s.times, &lo));
    Ok((lower.min(upper), upper.max(lower)))
}

/// Estimate of `⟨O⟩` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub t: f64,
    pub numerator: ComplexStat,
    pub denominator: ComplexStat,
    pub ratio: C64,
    /// Standard error of `Re ratio`.
    pub stderr: f64,
    /// Standard error of `Im ratio`.
    pub stderr_im: f64,
    pub n_numerator: u64,
    pub n_denominator: u64,
    pub seed: u64,
}

impl EstimateResult {
    /// Delta-method ratio; `cross` is the 2×2 covariance between the numerator
    /// and denominator means (`[Nr·Dr, Nr·Di, Ni·Dr, Ni·Di]`).
    pub fn from_parts(t: f64, numerator: ComplexStat, denominator: ComplexStat, cross: [f64; 4], seed: u64) -> Self {
        let d = denominator.mean;
        let ratio = if d.norm() > 0.0 { numerator.mean / d } else { C64::new(f64::NAN, f64::NAN) };
        let a = C64::new(1.0, 0.0) / d;
        let b = -ratio * a;
        let cov = [
            [numerator.stderr_re.powi(2), numerator.cov_re_im, cross[0], cross[1]],
            [numerator.cov_re_im, numerator.stderr_im.powi(2), cross[2], cross[3]],
            [cross[0], cross[2], denominator.stderr_re.powi(2), denominator.cov_re_im],
            [cross[1], cross[3], denominator.cov_re_im, denominator.stderr_im.powi(2)],
        ];
        let quad = |g: [f64; 4]| {
            let mut v = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    v += g[i] * cov[i][j] * g[j];
                }
            }
            libm::sqrt(v.max(0.0))
        };
        let stderr = quad([a.re, -a.im, b.re, -b.im]);
        let stderr_im = quad([a.im, a.re, b.im, b.re]);
        Self {
            t,
            numerator,
            denominator,
            ratio,
            stderr,
            stderr_im,
            n_numerator: numerator.n,
            n_denominator: denominator.n,
            seed,
        }
    }

    /// Fails when `|D| < 3 se(D)`.
    pub fn check_denominator(&self) -> Result<()> {
        let se = self.denominator.stderr_abs();
        let mag = self.denominator.mean.norm();
        if !(mag >= 3.0 * se) || mag == 0.0 {
            return Err(Error::DenominatorVanishes { magnitude: mag, stderr: se });
        }
        Ok(())
    }

    pub fn estimate(&self) -> f64 {
        self.ratio.re
    }
}

/// Initial state, observable and snapshot times of an estimation problem.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub model: &'a NonHermitianModel,
    pub observable: &'a ObservableSpec,
    pub state: &'a StateVector,
    pub times: &'a [f64],
}

impl Problem<'_> {
    fn check(&self) -> Result<()> {
        if self.state.n_qubits() != self.model.n_qubits() || self.observable.sum().n_qubits() != self.model.n_qubits() {
            return input("state, observable and model act on different registers");
        }
        Ok(())
    }
}

/// Monte Carlo settings shared by the sampled estimators.
#[derive(Debug, Clone, Copy)]
pub struct McSettings<'a> {
    pub kernel: &'a KernelSpec,
    pub propagator: PropagatorSpec,
    pub n_numerator: u64,
    pub n_denominator: u64,
    pub readout: Readout,
    pub seed: u64,
    /// Reuse each numerator draw's `(k′, k)` propagations for the denominator.
    pub paired: bool,
}

fn propagate_k(
    model: &NonHermitianModel,
    spec: &PropagatorSpec,
    k: f64,
    state: &StateVector,
    times: &[f64],
    rng: &mut DrawRng,
) -> Result<Vec<Snapshot>> {
    propagate(spec, &model.k_generator(k), state, times, rng)
}

/// Single-realization estimate of `⟨ψ|U†(t, k′) σ U(t, k)|ψ⟩` at each time,
/// including the continuous-method attenuation weights so it is unbiased.
pub fn overlap(
    model: &NonHermitianModel,
    k_bra: f64,
    k_ket: f64,
    term: &PauliString,
    times: &[f64],
    propagator: &PropagatorSpec,
    state: &StateVector,
    rng: &mut DrawRng,
) -> Result<Vec<C64>> {
    let bra = propagate_k(model, propagator, k_bra, state, times, rng)?;
    let ket = propagate_k(model, propagator, k_ket, state, times, rng)?;
    Ok(bra
        .iter()
        .zip(&ket)
        .map(|(b, a)| b.state.inner(&a.state.apply_pauli(term)) * libm::exp(b.log_weight + a.log_weight))
        .collect())
}

/// Per-draw contributions, `stride` values per time (`[N_re, N_im, D_re, D_im]`
/// for ratio estimates).
struct DrawValues(Vec<f64>);

fn numerator_draw(p: &Problem, s: &McSettings, index: u64) -> Result<DrawValues> {
    let mut rng = draw_rng(s.seed, streams::NUMERATOR, index);
    let draw = SampleDraw::sample(s.kernel, p.observable, &mut rng);
    let bra = propagate_k(p.model, &s.propagator, draw.k_bra.k, p.state, p.times, &mut rng)?;
    let ket = propagate_k(p.model, &s.propagator, draw.k_ket.k, p.state, p.times, &mut rng)?;
    let term = p.observable.term(draw.term).string;
    let scale = draw.combined_phase * (draw.k_bra.weight * draw.k_ket.weight * p.observable.l1());
    let dscale = draw.k_bra.phase.conj() * draw.k_ket.phase * (draw.k_bra.weight * draw.k_ket.weight);
    let mut out = vec![0.0; 4 * p.times.len()];
    for (j, (b, a)) in bra.iter().zip(&ket).enumerate() {
        let w = libm::exp(b.log_weight + a.log_weight);
        let v = scale * readout(b.state.inner(&a.state.apply_pauli(&term)), s.readout, &mut rng)? * w;
        out[4 * j] = v.re;
        out[4 * j + 1] = v.im;
        if s.paired {
            let d = dscale * readout(b.state.inner(&a.state), s.readout, &mut rng)? * w;
            out[4 * j + 2] = d.re;
            out[4 * j + 3] = d.im;
        }
    }
    Ok(DrawValues(out))
}

fn denominator_draw(p: &Problem, s: &McSettings, index: u64) -> Result<DrawValues> {
    let mut rng = draw_rng(s.seed, streams::DENOMINATOR, index);
    let k_bra = s.kernel.sample_k(&mut rng);
    let k_ket = s.kernel.sample_k(&mut rng);
    let bra = propagate_k(p.model, &s.propagator, k_bra.k, p.state, p.times, &mut rng)?;
    let ket = propagate_k(p.model, &s.propagator, k_ket.k, p.state, p.times, &mut rng)?;
    let scale = k_bra.phase.conj() * k_ket.phase * (k_bra.weight * k_ket.weight);
    let mut out = vec![0.0; 4 * p.times.len()];
    for (j, (b, a)) in bra.iter().zip(&ket).enumerate() {
        let w = libm::exp(b.log_weight + a.log_weight);
        let d = scale * readout(b.state.inner(&a.state), s.readout, &mut rng)? * w;
        out[4 * j + 2] = d.re;
        out[4 * j + 3] = d.im;
    }
    Ok(DrawValues(out))
}

/// Chunked, order-independent reduction of per-draw values into per-time
/// moments over `width` components starting at `offset` within each time's
/// block of `stride` values.
fn reduce_draws<E, F>(
    exec: &E,
    n: u64,
    n_times: usize,
    (stride, offset, width): (usize, usize, usize),
    draw: F,
) -> Result<Vec<Moments>>
where
    E: Executor,
    F: Fn(u64) -> Result<DrawValues> + Sync + Send,
{
    let chunks = (n as usize).div_ceil(CHUNK);
    let partial: Vec<Result<Vec<Moments>>> = exec.run(chunks, |c| {
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(n as usize);
        let mut per_time = vec![Vec::with_capacity((hi - lo) * width); n_times];
        for i in lo..hi {
            let v = draw(i as u64)?;
            for (j, block) in per_time.iter_mut().enumerate() {
                block.extend_from_slice(&v.0[stride * j + offset..stride * j + offset + width]);
            }
        }
        Ok(per_time.iter().map(|b| Moments::from_samples(width, b)).collect())
    });
    let partial = partial.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..n_times)
        .map(|j| {
            let blocks: Vec<Moments> = partial.iter().map(|p| p[j].clone()).collect();
            Moments::merge_all(&blocks, width)
        })
        .collect())
}

fn check_settings(s: &McSettings, needs_denominator: bool) -> Result<()> {
    s.propagator.validate()?;
    if s.n_numerator == 0 || (needs_denominator && !s.paired && s.n_denominator == 0) {
        return input("sample counts must be at least 1");
    }
    Ok(())
}

/// Monte Carlo estimate of `⟨O⟩` at every time in `p.times`. Each entry fails
/// individually when its denominator is indistinguishable from zero.
pub fn estimate_series<E: Executor>(exec: &E, p: &Problem, s: &McSettings) -> Result<Vec<Result<EstimateResult>>> {
    p.check()?;
    check_settings(s, true)?;
    let n_times = p.times.len();
    let results = if s.paired {
        let m = reduce_draws(exec, s.n_numerator, n_times, (4, 0, 4), |i| numerator_draw(p, s, i))?;
        m.iter()
            .zip(p.times)
            .map(|(m, &t)| {
                let cross = [
                    m.mean_covariance(0, 2),
                    m.mean_covariance(0, 3),
                    m.mean_covariance(1, 2),
                    m.mean_covariance(1, 3),
                ];
                EstimateResult::from_parts(
                    t,
                    ComplexStat::from_moments(m, 0),
                    ComplexStat::from_moments(m, 2),
                    cross,
                    s.seed,
                )
            })
            .collect::<Vec<_>>()
    } else {
        let num = reduce_draws(exec, s.n_numerator, n_times, (4, 0, 2), |i| numerator_draw(p, s, i))?;
        let den = reduce_draws(exec, s.n_denominator, n_times, (4, 2, 2), |i| denominator_draw(p, s, i))?;
        num.iter()
            .zip(&den)
            .zip(p.times)
            .map(|((n, d), &t)| {
                EstimateResult::from_parts(t, ComplexStat::from_moments(n, 0), ComplexStat::from_moments(d, 0), [0.0; 4], s.seed)
            })
            .collect()
    };
    Ok(results.into_iter().map(|r| r.check_denominator().map(|_| r)).collect())
}

/// Single-time Monte Carlo estimate.
pub fn estimate<E: Executor>(exec: &E, p: &Problem, s: &McSettings) -> Result<EstimateResult> {
    if p.times.len() != 1 {
        return input("estimate takes exactly one time; use estimate_series for grids");
    }
    estimate_series(exec, p, s)?.pop().expect("one time")
}

/// Continuous-method estimate with rotation angle `tau`.
pub fn estimate_continuous<E: Executor>(exec: &E, p: &Problem, s: &McSettings, tau: f64) -> Result<Vec<Result<EstimateResult>>> {
    let s = McSettings { propagator: PropagatorSpec::Continuous { tau }, ..*s };
    estimate_series(exec, p, &s)
}

/// `u(t)|ψ⟩ ≈ Σ c_q U(t, k_q)|ψ⟩` at every time, for a deterministic propagator.
pub fn lchs_states<E: Executor>(
    exec: &E,
    model: &NonHermitianModel,
    rule: &QuadratureRule,
    propagator: &PropagatorSpec,
    state: &StateVector,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    if propagator.is_stochastic() {
        return input("quadrature evaluation needs a deterministic propagator");
    }
    propagator.validate()?;
    const NODES_PER_TASK: usize = 8;
    let tasks = rule.nodes.len().div_ceil(NODES_PER_TASK);
    let partial: Vec<Result<Vec<StateVector>>> = exec.run(tasks, |c| {
        let mut acc = vec![state.zeros_like(); times.len()];
        let mut rng = draw_rng(0, streams::PROPAGATOR, c as u64);
        for &(k, w) in &rule.nodes[c * NODES_PER_TASK..((c + 1) * NODES_PER_TASK).min(rule.nodes.len())] {
            let snaps = propagate_k(model, propagator, k, state, times, &mut rng)?;
            for (a, s) in acc.iter_mut().zip(&snaps) {
                a.axpy(w, &s.state);
            }
        }
        Ok(acc)
    });
    let partial = partial.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..times.len()).map(|j| sum_states(&partial.iter().map(|p| &p[j]).collect::<Vec<_>>())).collect())
}

fn sum_states(parts: &[&StateVector]) -> StateVector {
    match parts.len() {
        1 => parts[0].clone(),
        n => {
            let (a, b) = parts.split_at(n / 2);
            let mut s = sum_states(a);
            s.axpy(C64::new(1.0, 0.0), &sum_states(b));
            s
        }
    }
}

/// Deterministic LCHS estimate `⟨φ|O|φ⟩/⟨φ|φ⟩` with `φ = Σ c_q U(t, k_q)|ψ⟩`.
pub fn estimate_quadrature<E: Executor>(
    exec: &E,
    p: &Problem,
    rule: &QuadratureRule,
    propagator: &PropagatorSpec,
) -> Result<Vec<Result<EstimateResult>>> {
    p.check()?;
    let phis = lchs_states(exec, p.model, rule, propagator, p.state, p.times)?;
    Ok(phis
        .iter()
        .zip(p.times)
        .map(|(phi, &t)| {
            let num = phi.inner(&phi.apply_sum(p.observable.sum()));
            let den = phi.inner(phi);
            let r = EstimateResult::from_parts(t, ComplexStat::exact(num), ComplexStat::exact(den), [0.0; 4], 0);
            r.check_denominator().map(|_| r)
        })
        .collect())
}

/// Reference `⟨O⟩(t)` from direct integration of `i dψ/dt = H ψ`.
pub fn exact_expectation(p: &Problem) -> Result<Vec<C64>> {
    p.check()?;
    let states = p.model.evolve_reference(p.times, p.state)?;
    Ok(states.iter().map(|phi| phi.inner(&phi.apply_sum(p.observable.sum())) / phi.inner(phi)).collect())
}

/// Monte Carlo estimates of the linear functionals `⟨bra_b| u(t) |ket⟩` at each
/// time, all bras sharing the same draws. Returns one series per bra.
pub fn estimate_linear<E: Executor>(
    exec: &E,
    model: &NonHermitianModel,
    bras: &[StateVector],
    ket: &StateVector,
    times: &[f64],
    s: &McSettings,
) -> Result<Vec<Vec<ComplexStat>>> {
    check_settings(s, false)?;
    if bras.is_empty() || bras.iter().any(|b| b.dim() != ket.dim()) {
        return input("linear estimate needs bras matching the ket dimension");
    }
    let nb = bras.len();
    let stride = 2 * nb;
    let m = reduce_draws(exec, s.n_numerator, times.len(), (stride, 0, stride), |i| {
        let mut rng = draw_rng(s.seed, streams::SINGLE, i);
        let k = s.kernel.sample_k(&mut rng);
        let snaps = propagate_k(model, &s.propagator, k.k, ket, times, &mut rng)?;
        let scale = k.phase * k.weight;
        let mut out = vec![0.0; stride * times.len()];
        for (j, snap) in snaps.iter().enumerate() {
            let w = libm::exp(snap.log_weight);
            for (b, bra) in bras.iter().enumerate() {
                let v = scale * readout(bra.inner(&snap.state), s.readout, &mut rng)? * w;
                out[stride * j + 2 * b] = v.re;
                out[stride * j + 2 * b + 1] = v.im;
            }
        }
        Ok(DrawValues(out))
    })?;
    Ok((0..nb).map(|b| m.iter().map(|m| ComplexStat::from_moments(m, 2 * b)).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn planner_examples() {
        let p = plan_samples(0.05, 0.1, 1.0, 1.0, 0.0, Growth::Bandwidth(0.0)).unwrap();
        assert!((p.k_factor - 10.150_4).abs() < 1e-4);
        assert_eq!(p.n_numerator, 9136);
        let q = plan_samples(0.05, 0.05, 1.0, 1.0, 0.0, Growth::Bandwidth(0.0)).unwrap();
        assert!((q.n_numerator as f64 / 9135.4 - 4.0).abs() < 1e-3);
        let g = plan_samples(0.05, 0.1, 1.0, 1.0, 3.0, Growth::GroundOverlap(0.5)).unwrap();
        assert_eq!(g.n_numerator, libm::ceil(p.k_factor * 900.0 * 4.0) as u64);
    }

    #[test]
    fn denominator_bounds() {
        let herm = NonHermitianModel::from_complex_sum(&PauliSum::from_labels([(c(1.0, 0.0), "X")]).unwrap()).unwrap();
        assert_eq!(bound_denominator(&herm, 1.0, 5).unwrap(), (1.0, 1.0));
        let qite = NonHermitianModel::from_complex_sum(&PauliSum::from_labels([(c(0.0, -1.0), "Z")]).unwrap()).unwrap();
        let (lo, hi) = bound_denominator(&qite, 1.0, 5).unwrap();
        assert!((lo - libm::exp(-4.0)).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14);
    }

    #[test]
    fn readout_modes() {
        let mut rng = draw_rng(1, 0, 0);
        let v = c(0.6, -0.2);
        assert_eq!(readout(v, Readout::Exact, &mut rng).unwrap(), v);
        assert_eq!(readout(c(1.0, 0.0), Readout::Shots(50), &mut rng).unwrap().re, 1.0);
        let m = 100_000;
        let r = readout(v, Readout::Shots(m), &mut rng).unwrap();
        assert!((r.re - 0.6).abs() < 3.0 * libm::sqrt((1.0 - 0.36) / m as f64));
        assert!((r.im + 0.2).abs() < 3.0 * libm::sqrt((1.0 - 0.04) / m as f64));
        assert!(matches!(readout(c(1.1, 0.0), Readout::Shots(1), &mut rng), Err(Error::Consistency(_))));
    }

    #[test]
    fn observable_sampling() {
        let o = ObservableSpec::new(PauliSum::from_labels([(c(0.5, 0.0), "Z"), (c(0.0, -1.5), "X")]).unwrap()).unwrap();
        assert_eq!(o.l1(), 2.0);
        assert!((o.probability(1) - 0.75).abs() < 1e-15);
        assert!((o.phase(1) - c(0.0, -1.0)).norm() < 1e-15);
        let mut rng = draw_rng(2, 0, 0);
        let hits = (0..10_000).filter(|_| o.sample_term(&mut rng) == 1).count();
        assert!((hits as f64 - 7500.0).abs() < 3.0 * libm::sqrt(10_000.0 * 0.75 * 0.25));
    }

    fn qite() -> (NonHermitianModel, ObservableSpec, StateVector) {
        let m = NonHermitianModel::from_complex_sum(&PauliSum::from_labels([(c(0.0, -1.0), "Z")]).unwrap()).unwrap();
        let o = ObservableSpec::new(PauliSum::from_labels([(c(1.0, 0.0), "X")]).unwrap()).unwrap();
        (m, o, StateVector::from_bits("+").unwrap())
    }

    #[test]
    fn quadrature_qite_limit() {
        let (m, o, psi) = qite();
        let kernel = KernelSpec::cauchy(1e-3).unwrap();
        let rule = QuadratureRule::composite(&kernel, 0.5, 8).unwrap();
        let p = Problem { model: &m, observable: &o, state: &psi, times: &[0.0, 0.5] };
        let r = estimate_quadrature(&Sequential, &p, &rule, &PropagatorSpec::Exact).unwrap();
        assert!((r[0].as_ref().unwrap().estimate() - 1.0).abs() < 2e-3);
        assert!((r[1].as_ref().unwrap().estimate() - 1.0 / libm::cosh(1.0)).abs() < 2e-3);
        let exact = exact_expectation(&p).unwrap();
        assert!((exact[1].re - 1.0 / libm::cosh(1.0)).abs() < 1e-9);
    }

    #[test]
    fn identity_observable_gives_one() {
        let (m, _, psi) = qite();
        let o = ObservableSpec::identity(1);
        let kernel = KernelSpec::cauchy(1e-2).unwrap();
        let rule = QuadratureRule::composite(&kernel, 0.5, 6).unwrap();
        let p = Problem { model: &m, observable: &o, state: &psi, times: &[0.7] };
        let r = estimate_quadrature(&Sequential, &p, &rule, &PropagatorSpec::Exact).unwrap();
        assert!((r[0].as_ref().unwrap().ratio - c(1.0, 0.0)).norm() < 1e-12);
        let s = McSettings {
            kernel: &kernel,
            propagator: PropagatorSpec::Exact,
            n_numerator: 2000,
            n_denominator: 2000,
            readout: Readout::Exact,
            seed: 3,
            paired: true,
        };
        let r = estimate(&Sequential, &p, &s).unwrap();
        assert!((r.ratio - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn hermitian_rabi_mc() {
        let m = NonHermitianModel::from_complex_sum(&PauliSum::from_labels([(c(1.0, 0.0), "X")]).unwrap()).unwrap();
        let o = ObservableSpec::new(PauliSum::from_labels([(c(1.0, 0.0), "Z")]).unwrap()).unwrap();
        let psi = StateVector::from_bits("0").unwrap();
        let kernel = KernelSpec::cauchy(1e-2).unwrap();
        let p = Problem { model: &m, observable: &o, state: &psi, times: &[1.0] };
        for propagator in [PropagatorSpec::Exact, PropagatorSpec::Continuous { tau: 0.05 }] {
            let s = McSettings {
                kernel: &kernel,
                propagator,
                n_numerator: 4000,
                n_denominator: 4000,
                readout: Readout::Exact,
                seed: 9,
                paired: false,
            };
            let r = estimate(&Sequential, &p, &s).unwrap();
            assert!((r.estimate() - libm::cos(2.0)).abs() < 3.0 * r.stderr + 1e-9, "{propagator:?}: {r:?}");
        }
    }

    #[test]
    fn shift_invariance_in_quadrature() {
        let h = PauliSum::from_labels([(c(0.4, -0.3), "XZ"), (c(0.0, -0.5), "ZI"), (c(0.7, 0.0), "YY")]).unwrap();
        let m = NonHermitianModel::from_complex_sum(&h).unwrap();
        let e0 = m.shift().value(0.0);
        let m2 = m.clone().with_shift(crate::schedule::Schedule::Constant(e0 - 0.4));
        let o = ObservableSpec::new(PauliSum::from_labels([(c(1.0, 0.0), "ZZ"), (c(0.5, 0.0), "XI")]).unwrap()).unwrap();
        let psi = StateVector::from_bits("0+").unwrap();
        let kernel = KernelSpec::cauchy(1e-3).unwrap();
        let rule = QuadratureRule::composite(&kernel, 0.5, 8).unwrap();
        let est = |model: &NonHermitianModel| {
            let p = Problem { model, observable: &o, state: &psi, times: &[1.0] };
            estimate_quadrature(&Sequential, &p, &rule, &PropagatorSpec::Exact).unwrap()[0].clone().unwrap().estimate()
        };
        assert!((est(&m) - est(&m2)).abs() < 5e-3);
    }

    #[test]
    fn deterministic_for_seed() {
        let (m, o, psi) = qite();
        let kernel = KernelSpec::beta(0.6, 1e-2).unwrap();
        let p = Problem { model: &m, observable: &o, state: &psi, times: &[0.3] };
        let s = McSettings {
            kernel: &kernel,
            propagator: PropagatorSpec::Exact,
            n_numerator: 1500,
            n_denominator: 1500,
            readout: Readout::Shots(4),
            seed: 17,
            paired: false,
        };
        assert_eq!(estimate(&Sequential, &p, &s).unwrap(), estimate(&Sequential, &p, &s).unwrap());
    }
}
