//! Classic fourth-order Runge–Kutta with step-halving self-convergence.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::C64;

const MAX_STEPS: usize = 1 << 22;

fn rk4_segment<F>(rhs: &mut F, y: &mut [C64], t0: f64, t1: f64, steps: usize, work: &mut [Vec<C64>; 5])
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let h = (t1 - t0) / steps as f64;
    let [k1, k2, k3, k4, tmp] = work;
    for s in 0..steps {
        let t = t0 + h * s as f64;
        rhs(t, y, k1);
        for i in 0..y.len() {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, tmp, k2);
        for i in 0..y.len() {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, tmp, k3);
        for i in 0..y.len() {
            tmp[i] = y[i] + k3[i] * h;
        }
        rhs(t + h, tmp, k4);
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

/// Integrates `y' = rhs(t, y)` from `t = 0` and returns `y` at each of the
/// nondecreasing `times`.
///
/// Each segment is recomputed with doubled step counts until two successive
/// results agree to `tol` (max-abs), starting from steps of at most `max_step`.
pub fn integrate<F>(mut rhs: F, y0: &[C64], times: &[f64], tol: f64, max_step: f64) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::Input("output times must be nonnegative and nondecreasing".into()));
    }
    let n = y0.len();
    let mut work = [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n],
        vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]];
    let mut y = y0.to_vec();
    let mut t_prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t > t_prev {
            let len = t - t_prev;
            let mut steps = libm::ceil(len / max_step).max(1.0) as usize;
            let mut coarse = y.clone();
            rk4_segment(&mut rhs, &mut coarse, t_prev, t, steps, &mut work);
            loop {
                steps *= 2;
                if steps > MAX_STEPS {
                    return Err(Error::Numerical(format!("RK4 did not self-converge to {tol:e}")));
                }
                let mut fine = y.clone();
                rk4_segment(&mut rhs, &mut fine, t_prev, t, steps, &mut work);
                let diff = coarse.iter().zip(&fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                coarse = fine;
                if diff <= tol {
                    break;
                }
            }
            y = coarse;
            t_prev = t;
        }
        out.push(y.clone());
    }
    Ok(out)
}
