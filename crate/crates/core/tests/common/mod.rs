//! Random states and observables shared by the integration tests.

#![allow(dead_code)]

use dw_core::quantum::{hermitian_eigen, pauli, CMatrix, C64};
use dw_core::QuantumRealization;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_matrix(d: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// `G G† / Tr` for a complex Gaussian `G`; full rank almost surely.
pub fn random_density(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_matrix(d, rng);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

/// `Σ s_k |v_k⟩⟨v_k|` over the eigenbasis of a random Hermitian matrix, with
/// random signs (`±I` included).
pub fn random_dichotomic(d: usize, rng: &mut impl Rng) -> CMatrix {
    let h = random_matrix(d, rng).hermitian_part();
    let e = hermitian_eigen(&h);
    let mut b = CMatrix::zeros(d, d);
    for k in 0..d {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        b = &b + &CMatrix::projector(&e.vector(k)).scale_real(s);
    }
    b
}

pub fn random_realization(d1: usize, d2: usize, rng: &mut impl Rng) -> QuantumRealization {
    let rho = random_density(d1 * d2, rng);
    let a = [random_dichotomic(d1, rng), random_dichotomic(d1, rng)];
    let b = [random_dichotomic(d2, rng), random_dichotomic(d2, rng)];
    QuantumRealization::new(rho, (d1, d2), a, b).expect("random realization is valid")
}

/// Entrywise complex conjugate.
pub fn conj(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].conj())
}

/// `|Φ+⟩` on qubits with `B2^x = conj(B1^x)`, so `E00 = E11 = 1`.
pub fn random_agreeing_realization(rng: &mut impl Rng) -> QuantumRealization {
    let a = [random_dichotomic(2, rng), random_dichotomic(2, rng)];
    let b = [conj(&a[0]), conj(&a[1])];
    QuantumRealization::pure(&pauli::phi_plus(), (2, 2), a, b).expect("valid")
}

/// State supported on the `+1` eigenspace of `B1^0 ⊗ B2^0`, so `E00 = 1`,
/// with random second settings.
pub fn random_e00_realization(rng: &mut impl Rng) -> QuantumRealization {
    let a0 = pauli::zx_observable(rng.random_range(-3.2..3.2));
    let b0 = pauli::zx_observable(rng.random_range(-3.2..3.2));
    let (ea, eb) = (hermitian_eigen(&a0), hermitian_eigen(&b0));
    // pairs of eigenvectors with equal eigenvalue sign
    let mut kets = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            if (ea.values[i] > 0.0) == (eb.values[j] > 0.0) {
                let (u, v) = (ea.vector(i), eb.vector(j));
                kets.push(u.iter().flat_map(|x| v.iter().map(move |y| x * y)).collect::<Vec<C64>>());
            }
        }
    }
    let w = random_density(kets.len(), rng);
    let rho = CMatrix::from_fn(4, 4, |r, c| {
        let mut s = C64::new(0.0, 0.0);
        for (k, ketk) in kets.iter().enumerate() {
            for (l, ketl) in kets.iter().enumerate() {
                s += w[(k, l)] * ketk[r] * ketl[c].conj();
            }
        }
        s
    });
    let a = [a0, random_dichotomic(2, rng)];
    let b = [b0, random_dichotomic(2, rng)];
    QuantumRealization::new(rho.hermitian_part(), (2, 2), a, b).expect("valid")
}
