//! Dense row-major complex matrices.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigen;

pub type C64 = Complex64;

/// Dense complex matrix stored row-major.
///
/// Serialized as `{"rows": r, "cols": c, "entries": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    /// Builds a matrix from row-major complex entries.
    ///
    /// # Panics
    /// If `entries.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, entries: Vec<C64>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        Self { rows, cols, entries }
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        Self { rows, cols, entries: entries.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) ket.
    pub fn projector(ket: &[C64]) -> Self {
        Self::from_fn(ket.len(), ket.len(), |i, j| ket[i] * ket[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        Self::from_fn(r, c, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length does not match matrix");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut t = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                t += self[(i, k)] * other[(k, i)];
            }
        }
        t
    }

    /// Real part of `Tr(ρ O)`, the expectation value for Hermitian `O`.
    pub fn expectation(&self, op: &Self) -> f64 {
        self.trace_product(op).re
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && (self - &self.adjoint()).max_abs() < tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (&(&self.adjoint() * self) - &Self::identity(self.rows)).max_abs() < tol
    }

    /// Hermitian and no eigenvalue below `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol.max(1e-12)) && self.min_eigenvalue() >= -tol
    }

    /// Unit trace, Hermitian and PSD.
    pub fn is_density(&self, tol: f64) -> bool {
        self.is_psd(tol) && (self.trace() - C64::new(1.0, 0.0)).norm() < tol
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigen::hermitian_eigen(&self.hermitian_part()).values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Trace norm `Σ|λ|` of the Hermitian part.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).sum()
    }

    /// Applies `f` to the spectrum of the Hermitian part.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Self {
        eigen::hermitian_eigen(&self.hermitian_part()).map(f)
    }

    /// Partial trace over the second factor of a `d1·d2` bipartite operator.
    pub fn partial_trace_second(&self, d1: usize, d2: usize) -> Self {
        assert!(self.is_square() && self.rows == d1 * d2, "dimension mismatch in partial trace");
        Self::from_fn(d1, d1, |i, j| (0..d2).map(|k| self[(i * d2 + k, j * d2 + k)]).sum())
    }

    /// Partial trace over the first factor of a `d1·d2` bipartite operator.
    pub fn partial_trace_first(&self, d1: usize, d2: usize) -> Self {
        assert!(self.is_square() && self.rows == d1 * d2, "dimension mismatch in partial trace");
        Self::from_fn(d2, d2, |i, j| (0..d1).map(|k| self[(k * d2 + i, k * d2 + j)]).sum())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in matrix product");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.entries[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sum");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in difference");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

/// Pauli and basis helpers.
pub mod pauli {
    use super::{CMatrix, C64};

    pub fn sigma_x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn sigma_y() -> CMatrix {
        CMatrix::from_vec(
            2,
            2,
            vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        )
    }

    pub fn sigma_z() -> CMatrix {
        CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    /// `cos θ σ_z + sin θ σ_x`.
    pub fn zx_observable(theta: f64) -> CMatrix {
        let (s, c) = theta.sin_cos();
        CMatrix::from_real(2, 2, &[c, s, s, -c])
    }

    /// Computational basis ket `|i⟩` in dimension `d`.
    pub fn ket(d: usize, i: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[i] = C64::new(1.0, 0.0);
        v
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn phi_plus() -> Vec<C64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)]
    }

    /// `(|01⟩ - |10⟩)/√2`.
    pub fn psi_minus() -> Vec<C64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![C64::new(0.0, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(0.0, 0.0)]
    }
}

#[cfg(test)]
mod tests {
    use super::pauli::*;
    use super::*;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (sigma_x(), sigma_y(), sigma_z());
        let xy = &x * &y;
        assert!((&xy - &z.scale(C64::new(0.0, 1.0))).max_abs() < 1e-15);
        assert!((&(&x * &x) - &CMatrix::identity(2)).max_abs() < 1e-15);
        assert!(y.is_hermitian(1e-15) && y.is_unitary(1e-15));
    }

    #[test]
    fn kron_and_partial_traces() {
        let a = CMatrix::from_real(2, 2, &[0.3, 0.1, 0.1, 0.7]);
        let b = CMatrix::from_real(3, 3, &[0.5, 0.0, 0.2, 0.0, 0.25, 0.0, 0.2, 0.0, 0.25]);
        let ab = a.kron(&b);
        assert_eq!(ab.rows(), 6);
        assert!((&ab.partial_trace_second(2, 3) - &a).max_abs() < 1e-15);
        assert!((&ab.partial_trace_first(2, 3) - &b).max_abs() < 1e-15);
        assert!((ab.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn serde_pairs() {
        let m = sigma_y();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("[0.0,-1.0]"), "{s}");
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn trace_norm_of_difference() {
        let p0 = CMatrix::projector(&ket(2, 0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CMatrix::projector(&[C64::new(h, 0.0), C64::new(h, 0.0)]);
        let d = (&p0 - &plus).scale_real(0.5);
        assert!((d.trace_norm() - h).abs() < 1e-12);
    }
}
