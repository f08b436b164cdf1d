use alloc::vec::Vec;

use rand::Rng;

use super::state::StateVector;
use super::{check_times, Generator, PropagatorSpec};
use crate::error::Result;
use crate::C64;

fn trotter_step(gen: &Generator, psi: &mut StateVector, t0: f64, h: f64, coeffs: &mut Vec<f64>) {
    gen.coeffs_at(t0 + 0.5 * h, coeffs);
    for (term, &c) in gen.terms().iter().zip(coeffs.iter()) {
        psi.rotate(&term.string, c * h);
    }
}

/// First-order product formula: per step, `exp(-i c_n(t_mid) σ_n h)` in declaration order.
pub fn evolve_trotter1(gen: &Generator, t: f64, dt: f64, state: &StateVector) -> Result<StateVector> {
    Ok(evolve_trotter1_at(gen, &[t], dt, state)?.pop().expect("one snapshot"))
}

pub fn evolve_trotter1_at(gen: &Generator, times: &[f64], dt: f64, state: &StateVector) -> Result<Vec<StateVector>> {
    PropagatorSpec::Trotter1 { dt }.validate()?;
    check_times(times)?;
    let mut psi = state.clone();
    let mut coeffs = Vec::new();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let len = target - now;
        let full = libm::floor(len / dt + 1e-9) as usize;
        for s in 0..full {
            trotter_step(gen, &mut psi, now + s as f64 * dt, dt, &mut coeffs);
        }
        let rem = len - full as f64 * dt;
        if rem > 1e-9 * dt {
            trotter_step(gen, &mut psi, now + full as f64 * dt, rem, &mut coeffs);
        }
        now = target;
        out.push(psi.clone());
    }
    Ok(out)
}

/// One qDrift realization: `⌈T/dt⌉` rotations by `sgn(c_j) Λ T/N` with `j ~ |c_j|/Λ`.
/// The identity component is applied exactly as a global phase.
pub fn evolve_qdrift<R: Rng + ?Sized>(
    gen: &Generator,
    t: f64,
    dt: f64,
    rng: &mut R,
    state: &StateVector,
) -> Result<StateVector> {
    Ok(evolve_qdrift_at(gen, &[t], dt, rng, state)?.pop().expect("one snapshot"))
}

pub fn evolve_qdrift_at<R: Rng + ?Sized>(
    gen: &Generator,
    times: &[f64],
    dt: f64,
    rng: &mut R,
    state: &StateVector,
) -> Result<Vec<StateVector>> {
    PropagatorSpec::Qdrift { dt }.validate()?;
    check_times(times)?;
    let mut psi = state.clone();
    let mut coeffs = Vec::new();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let len = target - now;
        if len > 0.0 {
            let n = libm::ceil(len / dt - 1e-9).max(1.0) as usize;
            let delta = len / n as f64;
            for g in 0..n {
                gen.coeffs_at(now + (g as f64 + 0.5) * delta, &mut coeffs);
                let lambda: f64 = gen
                    .terms()
                    .iter()
                    .zip(&coeffs)
                    .filter(|(term, _)| !term.string.is_identity())
                    .map(|(_, c)| c.abs())
                    .sum();
                if lambda == 0.0 {
                    continue;
                }
                let mut u = rng.random::<f64>() * lambda;
                let mut pick = None;
                for (j, (term, c)) in gen.terms().iter().zip(&coeffs).enumerate() {
                    if term.string.is_identity() || *c == 0.0 {
                        continue;
                    }
                    pick = Some(j);
                    u -= c.abs();
                    if u < 0.0 {
                        break;
                    }
                }
                let j = pick.expect("nonzero rate implies a term");
                psi.rotate(&gen.terms()[j].string, libm::copysign(lambda * delta, coeffs[j]));
            }
            let phase = gen.identity_integral(now, target)?;
            psi.scale(C64::from_polar(1.0, -phase));
        }
        now = target;
        out.push(psi.clone());
    }
    Ok(out)
}
