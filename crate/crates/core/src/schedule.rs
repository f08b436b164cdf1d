//! Real-valued coefficient schedules `c(t)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{input, Result};
use crate::quad::Integrator;

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// Linear interpolation between knots, held constant outside them.
    PiecewiseLinear { knots: Vec<f64>, values: Vec<f64> },
    /// `offset + amplitude · sin(frequency · t + phase)`.
    Harmonic { offset: f64, amplitude: f64, frequency: f64, phase: f64 },
    Scaled(f64, Box<Schedule>),
    Sum(Vec<Schedule>),
}

impl Schedule {
    pub fn constant(v: f64) -> Self {
        Schedule::Constant(v)
    }

    pub fn piecewise_linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return input("piecewise-linear schedule needs matching, non-empty knots and values");
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return input("piecewise-linear knots must be strictly increasing");
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return input("piecewise-linear schedule has non-finite entries");
        }
        Ok(Schedule::PiecewiseLinear { knots, values })
    }

    pub fn harmonic(offset: f64, amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        if ![offset, amplitude, frequency, phase].iter().all(|v| v.is_finite()) {
            return input("harmonic schedule has non-finite parameters");
        }
        Ok(Schedule::Harmonic { offset, amplitude, frequency, phase })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::PiecewiseLinear { knots, values } => {
                let last = knots.len() - 1;
                if t <= knots[0] {
                    return values[0];
                }
                if t >= knots[last] {
                    return values[last];
                }
                let j = knots.partition_point(|&k| k <= t) - 1;
                let w = (t - knots[j]) / (knots[j + 1] - knots[j]);
                values[j] + w * (values[j + 1] - values[j])
            }
            Schedule::Harmonic { offset, amplitude, frequency, phase } => {
                offset + amplitude * libm::sin(frequency * t + phase)
            }
            Schedule::Scaled(a, s) => a * s.value(t),
            Schedule::Sum(parts) => parts.iter().map(|s| s.value(t)).sum(),
        }
    }

    /// `Some(v)` when the schedule does not depend on time.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Schedule::Constant(v) => Some(*v),
            Schedule::PiecewiseLinear { values, .. } => {
                values.iter().all(|v| *v == values[0]).then(|| values[0])
            }
            Schedule::Harmonic { offset, amplitude, frequency, phase } => {
                (*amplitude == 0.0 || *frequency == 0.0)
                    .then(|| offset + amplitude * libm::sin(*phase))
            }
            Schedule::Scaled(a, s) => s.constant_value().map(|v| a * v),
            Schedule::Sum(parts) => parts.iter().map(|s| s.constant_value()).sum(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }

    pub fn scaled(&self, a: f64) -> Schedule {
        match self.constant_value() {
            Some(v) => Schedule::Constant(a * v),
            None => match self {
                Schedule::Scaled(b, s) => Schedule::Scaled(a * b, s.clone()),
                other => Schedule::Scaled(a, Box::new(other.clone())),
            },
        }
    }

    pub fn plus(&self, other: &Schedule) -> Schedule {
        match (self.constant_value(), other.constant_value()) {
            (Some(a), Some(b)) => Schedule::Constant(a + b),
            _ => {
                let mut parts = Vec::new();
                for s in [self, other] {
                    match s {
                        Schedule::Sum(p) => parts.extend(p.iter().cloned()),
                        s => parts.push(s.clone()),
                    }
                }
                Schedule::Sum(parts)
            }
        }
    }

    /// An upper bound on `|c(t)|` over `[t0, t1]`.
    pub fn abs_bound(&self, t0: f64, t1: f64) -> f64 {
        match self {
            Schedule::Constant(v) => v.abs(),
            Schedule::PiecewiseLinear { knots, values } => {
                // extremes sit at the interval ends or at interior knots
                let mut m = self.value(t0).abs().max(self.value(t1).abs());
                for (k, v) in knots.iter().zip(values) {
                    if *k > t0 && *k < t1 {
                        m = m.max(v.abs());
                    }
                }
                m
            }
            Schedule::Harmonic { offset, amplitude, .. } => offset.abs() + amplitude.abs(),
            Schedule::Scaled(a, s) => a.abs() * s.abs_bound(t0, t1),
            Schedule::Sum(parts) => parts.iter().map(|s| s.abs_bound(t0, t1)).sum(),
        }
    }

    /// `∫_{t0}^{t1} |c(s)| ds`, exact for constants and adaptive otherwise.
    pub fn abs_integral(&self, t0: f64, t1: f64) -> Result<f64> {
        if let Some(v) = self.constant_value() {
            return Ok(v.abs() * (t1 - t0));
        }
        let scale = self.abs_bound(t0, t1).max(1.0) * (t1 - t0).abs().max(1.0);
        Integrator::default().integrate(|s| self.value(s).abs(), t0, t1, 1e-13 * scale)
    }

    /// `∫_{t0}^{t1} c(s) ds`.
    pub fn integral(&self, t0: f64, t1: f64) -> Result<f64> {
        if let Some(v) = self.constant_value() {
            return Ok(v * (t1 - t0));
        }
        let scale = self.abs_bound(t0, t1).max(1.0) * (t1 - t0).abs().max(1.0);
        Integrator::default().integrate(|s| self.value(s), t0, t1, 1e-13 * scale)
    }

    /// Checks that the schedule is finite on `[0, horizon]` at `samples` points.
    pub fn check_finite(&self, horizon: f64, samples: usize) -> Result<()> {
        let n = samples.max(2);
        for i in 0..n {
            let t = horizon * i as f64 / (n - 1) as f64;
            if !self.value(t).is_finite() {
                return input(format!("schedule is not finite at t = {t}"));
            }
        }
        Ok(())
    }
}

impl From<f64> for Schedule {
    fn from(v: f64) -> Self {
        Schedule::Constant(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn piecewise_linear_interpolates_and_holds() {
        let s = Schedule::piecewise_linear(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, -2.0]).unwrap();
        assert_eq!(s.value(-1.0), 0.0);
        assert_eq!(s.value(0.5), 1.0);
        assert_eq!(s.value(2.0), 0.0);
        assert_eq!(s.value(5.0), -2.0);
        assert!((s.abs_integral(0.0, 3.0).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(s.abs_bound(0.0, 3.0), 2.0);
    }

    #[test]
    fn knots_must_increase() {
        assert!(Schedule::piecewise_linear(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Schedule::piecewise_linear(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn harmonic_and_algebra() {
        let h = Schedule::harmonic(1.0, 1.0, 1.0, 0.0).unwrap();
        assert!((h.value(core::f64::consts::FRAC_PI_2) - 2.0).abs() < 1e-15);
        let neg = h.scaled(-1.0);
        assert!((neg.value(1.0) + 1.0 + libm::sin(1.0)).abs() < 1e-15);
        let sum = h.plus(&Schedule::Constant(0.5));
        assert!((sum.value(0.0) - 1.5).abs() < 1e-15);
        assert!(!sum.is_constant());
        assert_eq!(Schedule::Constant(2.0).plus(&Schedule::Constant(1.0)), Schedule::Constant(3.0));
        let i = h.integral(0.0, 2.0).unwrap();
        assert!((i - (2.0 + 1.0 - libm::cos(2.0))).abs() < 1e-12);
    }
}
