//! Small dense complex linear algebra used by the oracles.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{Error, Result};
use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default qubit cap for dense realizations (1024 × 1024).
pub const DEFAULT_DENSE_CAP: usize = 10;

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Input("eigen-decomposition needs a square matrix".into()));
        }
        let eig = SymmetricEigen::try_new(m.clone(), 1e-15, 0)
            .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `exp(-i t A) v` from the decomposition of `A`.
    pub fn evolve(&self, v: &CVector, t: f64) -> CVector {
        let mut coeffs = self.vectors.ad_mul(v);
        for (c, &e) in coeffs.iter_mut().zip(&self.values) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        &self.vectors * coeffs
    }

    /// Projects `v` onto the eigenbasis once so repeated evolutions cost one product each.
    pub fn to_eigenbasis(&self, v: &CVector) -> CVector {
        self.vectors.ad_mul(v)
    }
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(HermitianEigen::new(m)?.values)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    let gram = m.ad_mul(m);
    let top = HermitianEigen::new(&gram)?.max();
    Ok(libm::sqrt(top.max(0.0)))
}

/// Eigenvalues of a general complex square matrix (complex Schur form).
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::Input("eigenvalues need a square matrix".into()));
    }
    let schur = Schur::try_new(m.clone(), 1e-14, 0)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    libm::sqrt(m.iter().map(|z| z.norm_sqr()).sum())
}

/// Row-major vectorization `|ρ⟩⟩ = Σ ρ_ij |i⟩|j⟩`, under which `A ρ B ↦ (A ⊗ Bᵀ)|ρ⟩⟩`.
pub fn vectorize(m: &CMatrix) -> CVector {
    let (r, c) = m.shape();
    CVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

/// Inverse of [`vectorize`] for a `dim × dim` matrix.
pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    assert_eq!(v.len(), dim * dim);
    CMatrix::from_fn(dim, dim, |i, j| v[i * dim + j])
}
