//! Gauss–Legendre nodes and adaptive one-dimensional integration.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const PANEL_NODES: usize = 10;
const MAX_DEPTH: u32 = 48;

/// Adaptive bisection integrator: a panel is accepted when one 10-point
/// Gauss–Legendre estimate agrees with the sum over its two halves.
pub struct Integrator {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for Integrator {
    fn default() -> Self {
        let (nodes, weights) = gauss_legendre(PANEL_NODES);
        Self { nodes, weights }
    }
}

impl Integrator {
    fn panel(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }

    /// `∫_a^b f` to absolute tolerance `tol`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let whole = self.panel(&mut f, a, b);
        self.refine(&mut f, a, b, whole, tol, 0)
    }

    fn refine(
        &self,
        f: &mut impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = self.panel(f, a, m);
        let right = self.panel(f, m, b);
        let split = left + right;
        if !split.is_finite() {
            return Err(Error::Numerical("integrand is not finite".into()));
        }
        if (split - whole).abs() <= tol {
            return Ok(split);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::Numerical("adaptive integration did not converge".into()));
        }
        Ok(self.refine(f, a, m, left, 0.5 * tol, depth + 1)?
            + self.refine(f, m, b, right, 0.5 * tol, depth + 1)?)
    }
}

/// Trapezoidal rule over tabulated samples.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}
