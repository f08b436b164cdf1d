use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::state::StateVector;
use super::{check_times, Generator, PropagatorSpec, Snapshot};
use crate::dense::{max_abs_diff, CMatrix};
use crate::error::{input, Error, Result};
use crate::pauli::PauliString;
use crate::C64;

/// One rotation `exp(-i angle σ)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateEvent {
    pub t: f64,
    pub string: PauliString,
    pub angle: f64,
}

/// A sampled continuous-method gate sequence over `[0, horizon]`.
///
/// `λ_tot⁻¹ · E[V] = T exp(-i ∫ K)`, where `V` applies `events` in order and
/// then the global phase `exp(-i phase)` carried by the identity component.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    pub events: Vec<GateEvent>,
    pub horizon: f64,
    /// `log λ_tot = -Σ_n ∫ |c_n| tan(τ/2)`.
    pub log_attenuation: f64,
    pub phase: f64,
}

impl GateSequence {
    pub fn attenuation(&self) -> f64 {
        libm::exp(self.log_attenuation)
    }
}

/// `log λ_tot(t) = -tan(τ/2) Σ_n ∫_0^t |c_n(s)| ds` over non-identity terms.
pub fn log_attenuation(gen: &Generator, t: f64, tau: f64) -> Result<f64> {
    let mut total = 0.0;
    for term in gen.terms().iter().filter(|term| !term.string.is_identity()) {
        total += term.coeff.abs_integral(0.0, t)?;
    }
    Ok(-libm::tan(0.5 * tau) * total)
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Numerical(alloc::format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Draws one gate sequence: per term a Poisson number of events with mean
/// `∫|c_n|/sin τ`, uniform times, and thinning against `max|c_n|` when the
/// coefficient varies in time.
pub fn sample_continuous_sequence<R: Rng + ?Sized>(
    gen: &Generator,
    horizon: f64,
    tau: f64,
    rng: &mut R,
) -> Result<GateSequence> {
    PropagatorSpec::Continuous { tau }.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return input("horizon must be finite and nonnegative");
    }
    let sin_tau = libm::sin(tau);
    let mut events = Vec::new();
    for term in gen.terms().iter().filter(|term| !term.string.is_identity()) {
        match term.coeff.constant_value() {
            Some(c) => {
                let count = poisson_count(rng, c.abs() * horizon / sin_tau)?;
                let angle = libm::copysign(tau, c);
                for _ in 0..count {
                    events.push(GateEvent { t: rng.random::<f64>() * horizon, string: term.string, angle });
                }
            }
            None => {
                let bound = term.coeff.abs_bound(0.0, horizon);
                let count = poisson_count(rng, bound * horizon / sin_tau)?;
                for _ in 0..count {
                    let t = rng.random::<f64>() * horizon;
                    let c = term.coeff.value(t);
                    if rng.random::<f64>() * bound < c.abs() {
                        events.push(GateEvent { t, string: term.string, angle: libm::copysign(tau, c) });
                    }
                }
            }
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(GateSequence {
        events,
        horizon,
        log_attenuation: log_attenuation(gen, horizon, tau)?,
        phase: gen.identity_integral(0.0, horizon)?,
    })
}

/// Applies the rotations in time order followed by the identity phase.
pub fn apply_sequence(seq: &GateSequence, state: &StateVector) -> StateVector {
    let mut psi = state.clone();
    for e in &seq.events {
        psi.rotate(&e.string, e.angle);
    }
    psi.scale(C64::from_polar(1.0, -seq.phase));
    psi
}

pub(super) fn snapshots<R: Rng + ?Sized>(
    gen: &Generator,
    times: &[f64],
    tau: f64,
    rng: &mut R,
    state: &StateVector,
) -> Result<Vec<Snapshot>> {
    check_times(times)?;
    let seq = sample_continuous_sequence(gen, times[times.len() - 1], tau, rng)?;
    let mut psi = state.clone();
    let mut next = 0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        while next < seq.events.len() && seq.events[next].t <= t {
            psi.rotate(&seq.events[next].string, seq.events[next].angle);
            next += 1;
        }
        let mut snap = psi.clone();
        snap.scale(C64::from_polar(1.0, -gen.identity_integral(0.0, t)?));
        out.push(Snapshot { t, state: snap, log_weight: -log_attenuation(gen, t, tau)? });
    }
    Ok(out)
}

/// Mixing probability `p` of the infinitesimal gate identity.
pub fn gate_identity_p(c: f64, tau: f64, dtau: f64) -> f64 {
    let ta = libm::tan(c.abs() * dtau);
    ta / (libm::sin(tau) + (1.0 - libm::cos(tau)) * ta)
}

/// Attenuation `λ = p sin τ / sin(|c| dτ')` of the infinitesimal gate identity.
pub fn gate_identity_lambda(c: f64, tau: f64, dtau: f64) -> f64 {
    gate_identity_p(c, tau, dtau) * libm::sin(tau) / libm::sin(c.abs() * dtau)
}

/// Max-abs residual of `(1 + s·p) I + p exp(-i sgn(c) τ X) = λ exp(-i c dτ' X)`
/// as 2×2 matrices, where `s = identity_sign`; the identity holds for `s = -1`.
pub fn gate_identity_residual(c: f64, tau: f64, dtau: f64, identity_sign: f64) -> f64 {
    let p = gate_identity_p(c, tau, dtau);
    let lambda = gate_identity_lambda(c, tau, dtau);
    let rot = |theta: f64| {
        let (s, co) = libm::sincos(theta);
        CMatrix::from_row_slice(2, 2, &[C64::new(co, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(co, 0.0)])
    };
    let lhs = CMatrix::identity(2, 2) * C64::new(1.0 + identity_sign * p, 0.0)
        + rot(libm::copysign(tau, c)) * C64::new(p, 0.0);
    let rhs = rot(c * dtau) * C64::new(lambda, 0.0);
    max_abs_diff(&lhs, &rhs)
}
