//! Pauli strings and complex-weighted Pauli sums.
//!
//! A string is stored symplectically: one `x` bit and one `z` bit per qubit, so
//! `σ = i^{|x∧z|} X^x Z^z`. Label position 0 (leftmost character) is qubit 1 and
//! maps to the most significant bit of a basis index, matching `kron` order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dense::{CMatrix, DEFAULT_DENSE_CAP};
use crate::error::{input, Error, Result};
use crate::C64;

/// Coefficients with modulus at or below this are dropped when merging.
pub const MERGE_TOL: f64 = 1e-14;

/// Largest supported register for a [`PauliString`].
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn label(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Fourth root of unity `i^e`.
pub(crate) fn i_pow(e: u32) -> C64 {
    match e % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: u8,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        Self { n_qubits: n_qubits as u8, x: 0, z: 0 }
    }

    /// Builds a string from raw symplectic masks (bit `n-1-q` is qubit `q`).
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return input(format!("{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit"));
        }
        let mask = full_mask(n_qubits);
        if x & !mask != 0 || z & !mask != 0 {
            return input("mask has bits outside the register");
        }
        Ok(Self { n_qubits: n_qubits as u8, x, z })
    }

    /// Single-qubit Pauli `p` on qubit `qubit` (0-based, leftmost = 0).
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        if qubit >= n_qubits {
            return input(format!("qubit {qubit} outside a {n_qubits}-qubit register"));
        }
        let mut s = Self::identity(n_qubits);
        s.set(qubit, p);
        Ok(s)
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Result<Self> {
        if paulis.len() > MAX_QUBITS {
            return input("too many qubits");
        }
        let mut s = Self::identity(paulis.len());
        for (q, p) in paulis.iter().enumerate() {
            s.set(q, *p);
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    fn bit(&self, qubit: usize) -> u64 {
        1u64 << (self.n_qubits as usize - 1 - qubit)
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let b = self.bit(qubit);
        Pauli::from_bits(self.x & b != 0, self.z & b != 0)
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        let b = self.bit(qubit);
        let (x, z) = p.bits();
        self.x = if x { self.x | b } else { self.x & !b };
        self.z = if z { self.z | b } else { self.z & !b };
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Action on a computational basis state: `σ|b⟩ = phase · |b'⟩`.
    #[inline]
    pub fn apply_to_basis(&self, b: usize) -> (usize, C64) {
        let sign = ((b as u64) & self.z).count_ones();
        let phase = i_pow(self.y_count() + 2 * sign);
        ((b as u64 ^ self.x) as usize, phase)
    }

    /// Returns `(phase, r)` with `self · other = phase · r`.
    pub fn multiply(&self, other: &PauliString) -> Result<(C64, PauliString)> {
        if self.n_qubits != other.n_qubits {
            return input(format!(
                "cannot multiply strings on {} and {} qubits",
                self.n_qubits, other.n_qubits
            ));
        }
        let r = PauliString { n_qubits: self.n_qubits, x: self.x ^ other.x, z: self.z ^ other.z };
        // σ_p σ_q = i^{y_p + y_q} (-1)^{|z_p ∧ x_q|} X^{x_r} Z^{z_r}, and X^{x_r} Z^{z_r} = i^{-y_r} σ_r.
        let swaps = (self.z & other.x).count_ones();
        let e = self.y_count() + other.y_count() + 2 * swaps + 4 * 64 - r.y_count();
        Ok((i_pow(e), r))
    }

    /// Whether the two strings commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Dense `2^n × 2^n` matrix of the string.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        PauliSum::from_terms(self.n_qubits(), [(C64::new(1.0, 0.0), *self)])?.to_matrix()
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits() {
            write!(f, "{}", self.get(q).label())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let paulis = s
            .chars()
            .map(|c| match c {
                'I' | 'i' => Ok(Pauli::I),
                'X' | 'x' => Ok(Pauli::X),
                'Y' | 'y' => Ok(Pauli::Y),
                'Z' | 'z' => Ok(Pauli::Z),
                other => input(format!("'{other}' is not a Pauli label")),
            })
            .collect::<Result<Vec<_>>>()?;
        if paulis.is_empty() {
            return input("empty Pauli label");
        }
        Self::from_paulis(&paulis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coeff: C64,
    pub string: PauliString,
}

/// Complex-weighted sum of Pauli strings on a fixed register.
///
/// Terms keep first-occurrence order; equal strings are merged and coefficients
/// at or below [`MERGE_TOL`] are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut s = Self::zero(n_qubits);
        s.push(C64::new(1.0, 0.0), PauliString::identity(n_qubits));
        s
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (C64, PauliString)>,
    ) -> Result<Self> {
        let mut raw = Vec::new();
        for (c, s) in terms {
            if s.n_qubits() != n_qubits {
                return input(format!(
                    "term {s} has {} qubits, sum declares {n_qubits}",
                    s.n_qubits()
                ));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return input(format!("non-finite coefficient on {s}"));
            }
            raw.push(PauliTerm { coeff: c, string: s });
        }
        let mut out = Self { n_qubits, terms: raw };
        out.normalize();
        Ok(out)
    }

    /// Parses `(coefficient, label)` pairs such as `("-2.0+0.0i", "XIII")`.
    pub fn from_labels<'a>(terms: impl IntoIterator<Item = (C64, &'a str)>) -> Result<Self> {
        let mut n = None;
        let mut parsed = Vec::new();
        for (c, label) in terms {
            let s: PauliString = label.parse()?;
            match n {
                None => n = Some(s.n_qubits()),
                Some(m) if m != s.n_qubits() => {
                    return input(format!("label {label} has {} qubits, expected {m}", s.n_qubits()))
                }
                _ => {}
            }
            parsed.push((c, s));
        }
        let n = n.ok_or_else(|| Error::Input("no terms".into()))?;
        Self::from_terms(n, parsed)
    }

    fn push(&mut self, coeff: C64, string: PauliString) {
        self.terms.push(PauliTerm { coeff, string });
    }

    fn normalize(&mut self) {
        let mut index: BTreeMap<PauliString, usize> = BTreeMap::new();
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match index.get(&t.string) {
                Some(&i) => merged[i].coeff += t.coeff,
                None => {
                    index.insert(t.string, merged.len());
                    merged.push(t);
                }
            }
        }
        merged.retain(|t| t.coeff.norm() > MERGE_TOL);
        self.terms = merged;
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Dimension of the dense realization, `2^n`.
    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn coeff_of(&self, s: &PauliString) -> C64 {
        self.terms
            .iter()
            .find(|t| t.string == *s)
            .map_or(C64::new(0.0, 0.0), |t| t.coeff)
    }

    /// Coefficient of the all-identity string.
    pub fn identity_coeff(&self) -> C64 {
        self.coeff_of(&PauliString::identity(self.n_qubits))
    }

    pub fn scaled(&self, a: C64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= a;
        }
        out.normalize();
        out
    }

    pub fn add(&self, other: &PauliSum) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return input("cannot add sums on different registers");
        }
        let mut out = self.clone();
        out.terms.extend_from_slice(&other.terms);
        out.normalize();
        Ok(out)
    }

    /// Product of two sums, expanded term by term.
    pub fn mul(&self, other: &PauliSum) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return input("cannot multiply sums on different registers");
        }
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let (phase, r) = a.string.multiply(&b.string)?;
                terms.push((a.coeff * b.coeff * phase, r));
            }
        }
        Self::from_terms(self.n_qubits, terms)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = t.coeff.conj();
        }
        out
    }

    /// `Σ |coeff|`.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// `(H_r, H_i)` with `H = H_r - i H_i`, both real-coefficient sums.
    pub fn hermitian_split(&self) -> (PauliSum, PauliSum) {
        let part = |f: fn(C64) -> f64| {
            let mut s = Self {
                n_qubits: self.n_qubits,
                terms: self
                    .terms
                    .iter()
                    .map(|t| PauliTerm { coeff: C64::new(f(t.coeff), 0.0), string: t.string })
                    .collect(),
            };
            s.normalize();
            s
        };
        (part(|c| c.re), part(|c| -c.im))
    }

    /// True when every coefficient is real within `tol`, i.e. the sum is Hermitian.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| t.coeff.im.abs() <= tol)
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        self.to_matrix_capped(DEFAULT_DENSE_CAP)
    }

    pub fn to_matrix_capped(&self, cap: usize) -> Result<CMatrix> {
        if self.n_qubits > cap {
            return Err(Error::Resource { requested: self.n_qubits, cap });
        }
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            for b in 0..dim {
                let (r, phase) = t.string.apply_to_basis(b);
                m[(r, b)] += t.coeff * phase;
            }
        }
        Ok(m)
    }

    /// Pauli decomposition `coeff_s = tr(σ_s† m) / 2^n` of a dense matrix.
    pub fn decompose(m: &CMatrix) -> Result<Self> {
        Self::decompose_capped(m, DEFAULT_DENSE_CAP)
    }

    pub fn decompose_capped(m: &CMatrix, cap: usize) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim {
            return input(format!("matrix is {}×{}, not square", dim, m.ncols()));
        }
        if dim == 0 || !dim.is_power_of_two() {
            return input(format!("dimension {dim} is not a power of two"));
        }
        let n = dim.trailing_zeros() as usize;
        if n > cap {
            return Err(Error::Resource { requested: n, cap });
        }
        let scale = 1.0 / dim as f64;
        let mut terms = Vec::new();
        let mut v = vec![C64::new(0.0, 0.0); dim];
        for x in 0..dim {
            for (b, slot) in v.iter_mut().enumerate() {
                *slot = m[(b ^ x, b)];
            }
            // Σ_b (-1)^{|b∧z|} v_b for every z at once.
            walsh_hadamard(&mut v);
            for (z, &acc) in v.iter().enumerate() {
                if acc.norm() * scale <= MERGE_TOL {
                    continue;
                }
                let y = (x & z).count_ones();
                // conj(i^y) = i^{-y}
                let c = acc * i_pow(4 * 64 - y) * scale;
                terms.push((c, PauliString { n_qubits: n as u8, x: x as u64, z: z as u64 }));
            }
        }
        Self::from_terms(n, terms)
    }

    /// One term per line, `<coeff> <label>`, e.g. `-2+0i XIII`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&format!("{} {}\n", format_coeff(t.coeff), t.string));
        }
        out
    }

    /// Parses the line format of [`PauliSum::to_text`]. Blank lines and `#` comments are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let t = parse_term_line(line)
                .map_err(|e| Error::Input(format!("line {}: {e}", lineno + 1)))?;
            terms.push(t);
        }
        let n = match terms.first() {
            Some((_, s)) => s.n_qubits(),
            None => return input("no terms"),
        };
        Self::from_terms(n, terms)
    }
}

/// Formats a coefficient as `re±imi`.
pub fn format_coeff(c: C64) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{}{:?}i", c.re, sign, c.im.abs())
}

/// Parses a complex literal such as `-2.0+0.5i`, `3`, `-i` or `1e-3-2i`.
pub fn parse_coeff(tok: &str) -> Result<C64> {
    let t = tok.trim();
    match t {
        "i" | "+i" => return Ok(C64::new(0.0, 1.0)),
        "-i" => return Ok(C64::new(0.0, -1.0)),
        _ => {}
    }
    C64::from_str(t).map_err(|_| Error::Input(format!("'{t}' is not a complex number")))
}

/// Parses one `<coeff> <label>` line.
pub fn parse_term_line(line: &str) -> Result<(C64, PauliString)> {
    let mut parts = line.split_whitespace();
    let (Some(c), Some(l), None) = (parts.next(), parts.next(), parts.next()) else {
        return input(format!("expected '<coeff> <label>', got '{line}'"));
    };
    Ok((parse_coeff(c)?, l.parse()?))
}

fn walsh_hadamard(v: &mut [C64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::max_abs_diff;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn s(label: &str) -> PauliString {
        label.parse().unwrap()
    }

    #[test]
    fn x_times_y_is_i_z() {
        let (phase, r) = s("X").multiply(&s("Y")).unwrap();
        assert_eq!(phase, c(0.0, 1.0));
        assert_eq!(r, s("Z"));
    }

    #[test]
    fn involution() {
        let (phase, r) = s("IZ").multiply(&s("IZ")).unwrap();
        assert_eq!(phase, c(1.0, 0.0));
        assert_eq!(r, s("II"));
    }

    #[test]
    fn two_qubit_product_matches_dense() {
        let (p, q) = (s("XZ"), s("ZX"));
        let (phase, r) = p.multiply(&q).unwrap();
        assert_eq!(r, s("YY"));
        let lhs = p.to_matrix().unwrap() * q.to_matrix().unwrap();
        let rhs = r.to_matrix().unwrap() * phase;
        assert_eq!(max_abs_diff(&lhs, &rhs), 0.0);
        // XZ·ZX = (XZ)⊗(ZX) = (-iY)⊗(iY) = YY
        assert_eq!(phase, c(1.0, 0.0));
    }

    #[test]
    fn length_mismatch_is_input_error() {
        assert!(matches!(s("X").multiply(&s("XX")), Err(Error::Input(_))));
    }

    #[test]
    fn projector_matrix() {
        let h = PauliSum::from_labels([(c(0.5, 0.0), "I"), (c(-0.5, 0.0), "Z")]).unwrap();
        let m = h.to_matrix().unwrap();
        assert_eq!(m[(0, 0)], c(0.0, 0.0));
        assert_eq!(m[(1, 1)], c(1.0, 0.0));
        assert_eq!(m[(0, 1)], c(0.0, 0.0));
        let x = s("X").to_matrix().unwrap();
        assert_eq!(x[(0, 1)], c(1.0, 0.0));
        assert_eq!(x[(1, 0)], c(1.0, 0.0));
        assert_eq!(x[(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn dense_cap_is_enforced() {
        let big = PauliSum::identity(11);
        assert!(matches!(big.to_matrix(), Err(Error::Resource { requested: 11, cap: 10 })));
        assert!(big.to_matrix_capped(11).is_ok());
    }

    #[test]
    fn decompose_projector_one() {
        let mut m = CMatrix::zeros(2, 2);
        m[(1, 1)] = c(1.0, 0.0);
        let d = PauliSum::decompose(&m).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.coeff_of(&s("I")) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((d.coeff_of(&s("Z")) - c(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn decompose_lowering_operator() {
        let g = 1.5f64.sqrt();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(g, 0.0);
        let d = PauliSum::decompose(&m).unwrap();
        assert!((d.coeff_of(&s("X")) - c(g / 2.0, 0.0)).norm() < 1e-15);
        assert!((d.coeff_of(&s("Y")) - c(0.0, g / 2.0)).norm() < 1e-15);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert!(matches!(PauliSum::decompose(&CMatrix::zeros(3, 3)), Err(Error::Input(_))));
        assert!(matches!(PauliSum::decompose(&CMatrix::zeros(2, 4)), Err(Error::Input(_))));
    }

    #[test]
    fn l1_norms() {
        assert_eq!(PauliSum::identity(1).l1_norm(), 1.0);
        let mut m = CMatrix::zeros(16, 16);
        m[(8, 8)] = c(1.0, 0.0);
        let d = PauliSum::decompose(&m).unwrap();
        assert_eq!(d.len(), 16);
        assert!((d.l1_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn split_examples() {
        let h = PauliSum::from_labels([(c(1.0, -0.3), "Z")]).unwrap();
        let (hr, hi) = h.hermitian_split();
        assert_eq!(hr.coeff_of(&s("Z")), c(1.0, 0.0));
        assert!((hi.coeff_of(&s("Z")) - c(0.3, 0.0)).norm() < 1e-15);

        let herm = PauliSum::from_labels([(c(2.0, 0.0), "XY"), (c(-1.0, 0.0), "ZI")]).unwrap();
        let (hr, hi) = herm.hermitian_split();
        assert_eq!(hr, herm);
        assert!(hi.is_empty());
    }

    #[test]
    fn merging_and_dropping() {
        let h = PauliSum::from_labels([
            (c(1.0, 0.0), "XI"),
            (c(2.0, 0.0), "ZZ"),
            (c(-1.0, 0.0), "XI"),
            (c(1e-16, 0.0), "YY"),
        ])
        .unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].string, s("ZZ"));
    }

    #[test]
    fn text_round_trip() {
        let h = PauliSum::from_labels([(c(-2.0, 0.0), "XIII"), (c(0.25, -1.5), "ZZYI")]).unwrap();
        let text = h.to_text();
        assert!(text.starts_with("-2.0+0.0i XIII"));
        assert_eq!(PauliSum::parse_text(&text).unwrap(), h);
        let parsed = PauliSum::parse_text("# comment\n1e-3-2i XY\n\n-i ZZ  # trailing\n").unwrap();
        assert_eq!(parsed.coeff_of(&s("XY")), c(1e-3, -2.0));
        assert_eq!(parsed.coeff_of(&s("ZZ")), c(0.0, -1.0));
        let err = PauliSum::parse_text("1.0 XX\nfoo\n").unwrap_err();
        assert!(matches!(err, Error::Input(ref m) if m.starts_with("line 2")));
    }
}
