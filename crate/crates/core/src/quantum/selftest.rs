//! Partial-swap extraction of a two-qubit state from a realization.

use serde::{Deserialize, Serialize};

use super::{born_behavior, pauli, sos_expectation, CMatrix, QuantumRealization};
use crate::behavior::chsh_witness;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    /// Expectation of the sum-of-squares operator; equals `5/2 − chsh`
    /// whenever `e00 = 1`.
    pub sos_residual: f64,
    pub chsh: f64,
    pub e00: f64,
    /// `⟨Φ+|ρ_anc|Φ+⟩` of the extracted ancilla pair.
    pub swap_fidelity: f64,
    /// `marginals[i][x] = p(b_i = 0 | x_i = x)`.
    pub marginals: [[f64; 2]; 2],
}

/// Unitary with the same eigenvectors and spectrum `sign(λ)`, zero mapped to +1.
fn regularize(x: &CMatrix) -> CMatrix {
    x.hermitian_map(|l| if l < 0.0 { -1.0 } else { 1.0 })
}

/// Kraus pair `K_j = ½ Z^j (1 + (−1)^j X)` of one party's swap isometry.
fn swap_kraus(z: &CMatrix, x: &CMatrix) -> [CMatrix; 2] {
    let id = CMatrix::identity(z.rows());
    let k0 = (&id + x).scale_real(0.5);
    let k1 = (z * &(&id - x)).scale_real(0.5);
    [k0, k1]
}

/// Runs the local swap isometries built from
/// `Z1 = B1^0`, `X1 = −(√3/3)(2B1^1 + B1^0)`, `Z2 = B2^0`,
/// `X2 = (√3/3)(B2^0 − 2B2^1)` and scores the extracted ancillas.
///
/// `X_j` is replaced by its sign so the circuit stays an isometry for
/// arbitrary inputs.
pub fn swap_selftest(r: &QuantumRealization) -> SelfTestReport {
    let c = 3f64.sqrt() / 3.0;
    let [a0, a1] = r.obs_a();
    let [b0, b1] = r.obs_b();
    let x1 = regularize(&(&a1.scale_real(2.0) + a0).scale_real(-c));
    let x2 = regularize(&(b0 - &b1.scale_real(2.0)).scale_real(c));
    let k1 = swap_kraus(a0, &x1);
    let k2 = swap_kraus(b0, &x2);

    let rho = r.rho();
    let mut ops = Vec::with_capacity(4);
    for ka in &k1 {
        for kb in &k2 {
            ops.push(ka.kron(kb));
        }
    }
    let anc = CMatrix::from_fn(4, 4, |i, j| (&(&ops[i] * rho) * &ops[j].adjoint()).trace());
    let phi = pauli::phi_plus();
    let fidelity = anc.apply(&phi).iter().zip(&phi).map(|(a, p)| p.conj() * a).sum::<super::C64>().re;

    let b = born_behavior(r);
    let w = chsh_witness(&b);
    let marginals = [
        [b.marginal_first(0, 0, 0), b.marginal_first(0, 1, 0)],
        [b.marginal_second(0, 0, 0), b.marginal_second(0, 0, 1)],
    ];
    SelfTestReport {
        sos_residual: sos_expectation(r).max(0.0),
        chsh: w.chsh,
        e00: w.correlators[0][0],
        swap_fidelity: fidelity.clamp(0.0, 1.0),
        marginals,
    }
}
