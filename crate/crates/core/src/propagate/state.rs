use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::CVector;
use crate::error::{input, Result};
use crate::pauli::{i_pow, PauliString, PauliSum};
use crate::C64;

/// Dense statevector on `n_qubits` qubits; basis index bit `n-1-q` is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return input(format!("basis index {index} outside a {n_qubits}-qubit register"));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Basis state from a bit label such as `"1000"` (leftmost character is qubit 1).
    pub fn from_bits(label: &str) -> Result<Self> {
        let mut index = 0usize;
        for ch in label.chars() {
            index = match ch {
                '0' => index << 1,
                '1' => (index << 1) | 1,
                '+' | '-' => return Self::product_label(label),
                c => return input(format!("'{c}' is not a basis label character")),
            };
        }
        Self::basis(label.chars().count(), index)
    }

    /// Product state over `0`, `1`, `+`, `-` single-qubit labels.
    fn product_label(label: &str) -> Result<Self> {
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for ch in label.chars() {
            let (a0, a1) = match ch {
                '0' => (1.0, 0.0),
                '1' => (0.0, 1.0),
                '+' => (r, r),
                '-' => (r, -r),
                c => return input(format!("'{c}' is not a basis label character")),
            };
            amps = amps.iter().flat_map(|&a| [a * a0, a * a1]).collect();
        }
        Ok(Self { n_qubits: label.chars().count(), amps })
    }

    /// Wraps raw amplitudes (length must be a power of two; no normalization is applied).
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return input(format!("{dim} amplitudes is not a power of two"));
        }
        if amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return input("amplitudes must be finite");
        }
        Ok(Self { n_qubits: dim.trailing_zeros() as usize, amps })
    }

    pub fn from_vector(v: &CVector) -> Result<Self> {
        Self::from_amplitudes(v.iter().copied().collect())
    }

    pub fn to_vector(&self) -> CVector {
        CVector::from_column_slice(&self.amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amps.iter().map(|a| a.norm_sqr()).sum())
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return input("cannot normalize the zero vector");
        }
        self.scale(C64::new(1.0 / n, 0.0));
        Ok(self)
    }

    pub fn scale(&mut self, a: C64) {
        for x in &mut self.amps {
            *x *= a;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: C64, other: &StateVector) {
        for (x, y) in self.amps.iter_mut().zip(&other.amps) {
            *x += a * y;
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self { n_qubits: self.n_qubits, amps: vec![C64::new(0.0, 0.0); self.dim()] }
    }

    fn check(&self, s: &PauliString) {
        assert_eq!(s.n_qubits(), self.n_qubits, "Pauli string and state act on different registers");
    }

    /// `σ|ψ⟩`.
    pub fn apply_pauli(&self, s: &PauliString) -> StateVector {
        self.check(s);
        let mut out = self.zeros_like();
        for (b, &a) in self.amps.iter().enumerate() {
            let (r, phase) = s.apply_to_basis(b);
            out.amps[r] = phase * a;
        }
        out
    }

    /// `Σ c_n σ_n |ψ⟩`.
    pub fn apply_sum(&self, h: &PauliSum) -> StateVector {
        let mut out = self.zeros_like();
        self.apply_sum_into(h, C64::new(1.0, 0.0), &mut out.amps);
        out
    }

    /// `out += scale · H|ψ⟩`.
    pub fn apply_sum_into(&self, h: &PauliSum, scale: C64, out: &mut [C64]) {
        for t in h.terms() {
            self.check(&t.string);
            accumulate_pauli(&t.string, scale * t.coeff, &self.amps, out);
        }
    }

    /// In place `exp(-i θ σ)|ψ⟩ = (cos θ − i sin θ σ)|ψ⟩`.
    pub fn rotate(&mut self, s: &PauliString, angle: f64) {
        self.check(s);
        let (sn, cs) = libm::sincos(angle);
        let x = s.x_mask() as usize;
        let z = s.z_mask() as usize;
        let m = C64::new(0.0, -sn) * i_pow((x & z).count_ones());
        if x == 0 {
            let (even, odd) = (C64::new(cs, 0.0) + m, C64::new(cs, 0.0) - m);
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= if (b & z).count_ones() % 2 == 0 { even } else { odd };
            }
            return;
        }
        let pivot = 1usize << (usize::BITS - 1 - x.leading_zeros());
        for b in 0..self.amps.len() {
            if b & pivot != 0 {
                continue;
            }
            let b2 = b ^ x;
            let (a1, a2) = (self.amps[b], self.amps[b2]);
            let s1 = if (b & z).count_ones() % 2 == 0 { m } else { -m };
            let s2 = if (b2 & z).count_ones() % 2 == 0 { m } else { -m };
            self.amps[b] = a1 * cs + s2 * a2;
            self.amps[b2] = a2 * cs + s1 * a1;
        }
    }
}

/// `out += coeff · σ · input` on raw amplitude slices.
pub(crate) fn accumulate_pauli(s: &PauliString, coeff: C64, input: &[C64], out: &mut [C64]) {
    let x = s.x_mask() as usize;
    let z = s.z_mask() as usize;
    let base = coeff * i_pow((x & z).count_ones());
    for (b, &a) in input.iter().enumerate() {
        let v = base * a;
        out[b ^ x] += if (b & z).count_ones() % 2 == 0 { v } else { -v };
    }
}

/// Free-function form of [`StateVector::rotate`].
pub fn apply_pauli_rotation(state: &StateVector, s: &PauliString, angle: f64) -> StateVector {
    let mut out = state.clone();
    out.rotate(s, angle);
    out
}
