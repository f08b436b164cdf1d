//! Pairwise-summed sample moments.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Running first and second moments of a `dim`-component real sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: Vec<f64>,
    /// Row-major `dim × dim` sum of outer products.
    pub outer: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Self { n: 0, sum: vec![0.0; dim], outer: vec![0.0; dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    /// Moments of a block of samples, each sample a `dim`-vector stored contiguously.
    pub fn from_samples(dim: usize, samples: &[f64]) -> Self {
        assert_eq!(samples.len() % dim, 0);
        let n = samples.len() / dim;
        let mut out = Self::new(dim);
        out.n = n as u64;
        let mut col = vec![0.0; n];
        for a in 0..dim {
            for (i, slot) in col.iter_mut().enumerate() {
                *slot = samples[i * dim + a];
            }
            out.sum[a] = pairwise_sum(&col);
            for b in a..dim {
                for (i, slot) in col.iter_mut().enumerate() {
                    *slot = samples[i * dim + a] * samples[i * dim + b];
                }
                let s = pairwise_sum(&col);
                out.outer[a * dim + b] = s;
                out.outer[b * dim + a] = s;
            }
        }
        out
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        assert_eq!(self.dim(), other.dim());
        Moments {
            n: self.n + other.n,
            sum: self.sum.iter().zip(&other.sum).map(|(a, b)| a + b).collect(),
            outer: self.outer.iter().zip(&other.outer).map(|(a, b)| a + b).collect(),
        }
    }

    /// Pairwise merge of block moments in the given order.
    pub fn merge_all(blocks: &[Moments], dim: usize) -> Moments {
        match blocks.len() {
            0 => Moments::new(dim),
            1 => blocks[0].clone(),
            n => {
                let (a, b) = blocks.split_at(n / 2);
                Self::merge_all(a, dim).merge(&Self::merge_all(b, dim))
            }
        }
    }

    pub fn mean(&self, a: usize) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.sum[a] / self.n as f64
    }

    /// Unbiased sample covariance of components `a` and `b`.
    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let d = self.dim();
        (self.outer[a * d + b] - self.sum[a] * self.sum[b] / n) / (n - 1.0)
    }

    /// Covariance of the sample means of components `a` and `b`.
    pub fn mean_covariance(&self, a: usize, b: usize) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.covariance(a, b) / self.n as f64
    }

    pub fn stderr(&self, a: usize) -> f64 {
        libm::sqrt(self.mean_covariance(a, a).max(0.0))
    }
}

/// Mean of a complex sample with componentwise standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexStat {
    pub mean: C64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    /// Covariance between the real and imaginary parts of the mean.
    pub cov_re_im: f64,
    pub n: u64,
}

impl ComplexStat {
    /// Reads components `(re, im)` = `(offset, offset + 1)` of `m`.
    pub fn from_moments(m: &Moments, offset: usize) -> Self {
        Self {
            mean: C64::new(m.mean(offset), m.mean(offset + 1)),
            stderr_re: m.stderr(offset),
            stderr_im: m.stderr(offset + 1),
            cov_re_im: m.mean_covariance(offset, offset + 1),
            n: m.n,
        }
    }

    pub fn exact(value: C64) -> Self {
        Self { mean: value, stderr_re: 0.0, stderr_im: 0.0, cov_re_im: 0.0, n: 0 }
    }

    /// `sqrt(se_re² + se_im²)`.
    pub fn stderr_abs(&self) -> f64 {
        libm::hypot(self.stderr_re, self.stderr_im)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            mean: self.mean * a,
            stderr_re: self.stderr_re * a.abs(),
            stderr_im: self.stderr_im * a.abs(),
            cov_re_im: self.cov_re_im * a * a,
            n: self.n,
        }
    }
}
