//! Born-rule behaviors, explicit realizations, state discrimination and the
//! swap-isometry self-test.

pub mod cmatrix;
pub mod eigen;
mod ensemble;
mod optimize;
mod selftest;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::Behavior;

pub use cmatrix::{pauli, CMatrix, C64};
pub use eigen::{hermitian_eigen, HermitianEigen};
pub use ensemble::{guessing_probability, guessing_probability_sdp, measure_and_prepare, Ensemble};
pub use optimize::{analytic_constrained_chsh, asin_criterion, optimize_constrained_chsh, ConstrainedOptimum};
pub(crate) use optimize::{plane_search, PlaneModel};
pub use selftest::{swap_selftest, SelfTestReport};

/// Tolerance for density-matrix and observable validation.
pub const VALIDATION_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a density matrix: {0}")]
    NotDensity(String),
    #[error("observable is not Hermitian with spectrum ±1: {0}")]
    NotDichotomic(String),
    #[error("POVM elements sum to identity only within {deviation:.3e}")]
    PovmIncomplete { deviation: f64 },
    #[error("agreement precondition failed: E00 = {e00}")]
    AgreementPrecondition { e00: f64 },
    #[error("optimizer did not converge: {0}")]
    NoConvergence(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Bipartite state with two dichotomic observables per party.
///
/// `rho` acts on `C^{d1} ⊗ C^{d2}`; `obs_a[x]` acts on the first factor,
/// `obs_b[x]` on the second.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RealizationFile")]
pub struct QuantumRealization {
    rho: CMatrix,
    dims: (usize, usize),
    obs_a: [CMatrix; 2],
    obs_b: [CMatrix; 2],
}

#[derive(Deserialize)]
struct RealizationFile {
    rho: CMatrix,
    dims: (usize, usize),
    obs_a: [CMatrix; 2],
    obs_b: [CMatrix; 2],
}

impl TryFrom<RealizationFile> for QuantumRealization {
    type Error = QuantumError;

    fn try_from(f: RealizationFile) -> Result<Self, Self::Error> {
        QuantumRealization::new(f.rho, f.dims, f.obs_a, f.obs_b)
    }
}

fn check_dichotomic(b: &CMatrix, d: usize, name: &str) -> Result<(), QuantumError> {
    if b.rows() != d || b.cols() != d {
        return Err(QuantumError::DimensionMismatch(format!("{name} is {}x{}, expected {d}x{d}", b.rows(), b.cols())));
    }
    if !b.is_finite() || !b.is_hermitian(VALIDATION_TOL) {
        return Err(QuantumError::NotDichotomic(format!("{name} is not Hermitian")));
    }
    if (&(b * b) - &CMatrix::identity(d)).max_abs() > VALIDATION_TOL {
        return Err(QuantumError::NotDichotomic(format!("{name}² ≠ I")));
    }
    Ok(())
}

impl QuantumRealization {
    pub fn new(
        rho: CMatrix,
        dims: (usize, usize),
        obs_a: [CMatrix; 2],
        obs_b: [CMatrix; 2],
    ) -> Result<Self, QuantumError> {
        let (d1, d2) = dims;
        if rho.rows() != d1 * d2 || !rho.is_square() {
            return Err(QuantumError::DimensionMismatch(format!(
                "state is {}x{}, dims give {}",
                rho.rows(),
                rho.cols(),
                d1 * d2
            )));
        }
        if !rho.is_finite() || !rho.is_density(VALIDATION_TOL) {
            return Err(QuantumError::NotDensity("state must be PSD with unit trace".into()));
        }
        for (x, b) in obs_a.iter().enumerate() {
            check_dichotomic(b, d1, &format!("B1^{x}"))?;
        }
        for (x, b) in obs_b.iter().enumerate() {
            check_dichotomic(b, d2, &format!("B2^{x}"))?;
        }
        Ok(Self { rho, dims, obs_a, obs_b })
    }

    /// Pure-state realization `|ψ⟩⟨ψ|`.
    pub fn pure(
        psi: &[C64],
        dims: (usize, usize),
        obs_a: [CMatrix; 2],
        obs_b: [CMatrix; 2],
    ) -> Result<Self, QuantumError> {
        Self::new(CMatrix::projector(psi), dims, obs_a, obs_b)
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn obs_a(&self) -> &[CMatrix; 2] {
        &self.obs_a
    }

    pub fn obs_b(&self) -> &[CMatrix; 2] {
        &self.obs_b
    }

    /// `(1 − v) ρ + v I/d`.
    pub fn with_white_noise(&self, v: f64) -> Result<Self, QuantumError> {
        if !(0.0..=1.0).contains(&v) {
            return Err(QuantumError::InvalidArgument(format!("noise weight {v} outside [0, 1]")));
        }
        let d = self.rho.rows();
        let rho = &self.rho.scale_real(1.0 - v) + &CMatrix::identity(d).scale_real(v / d as f64);
        Self::new(rho, self.dims, self.obs_a.clone(), self.obs_b.clone())
    }

    /// `B1^{x1} ⊗ B2^{x2}` expectation.
    pub fn correlator(&self, x1: usize, x2: usize) -> f64 {
        self.rho.expectation(&self.obs_a[x1].kron(&self.obs_b[x2]))
    }

    fn lift_a(&self, op: &CMatrix) -> CMatrix {
        op.kron(&CMatrix::identity(self.dims.1))
    }

    fn lift_b(&self, op: &CMatrix) -> CMatrix {
        CMatrix::identity(self.dims.0).kron(op)
    }
}

/// Projector `(I + (−1)^b B)/2`.
pub fn outcome_projector(obs: &CMatrix, b: usize) -> CMatrix {
    let sign = if b == 0 { 0.5 } else { -0.5 };
    &CMatrix::identity(obs.rows()).scale_real(0.5) + &obs.scale_real(sign)
}

/// `p(b1,b2|x1,x2) = Tr[ρ (Π^{b1}_{x1} ⊗ Π^{b2}_{x2})]`.
pub fn born_behavior(r: &QuantumRealization) -> Behavior {
    let mut p = [[[[0.0; 2]; 2]; 2]; 2];
    for x1 in 0..2 {
        for x2 in 0..2 {
            for b1 in 0..2 {
                let pa = outcome_projector(&r.obs_a[x1], b1);
                for b2 in 0..2 {
                    let pb = outcome_projector(&r.obs_b[x2], b2);
                    p[b1][b2][x1][x2] = r.rho.expectation(&pa.kron(&pb)).clamp(0.0, 1.0);
                }
            }
        }
    }
    Behavior::with_tol(p, 1e-9).expect("Born-rule probabilities of a validated realization are normalized")
}

/// `|Φ+⟩` with `B^0 = σ_z` for both parties, `B1^1 = −σ_z/2 − (√3/2)σ_x` and
/// `B2^1 = σ_z/2 − (√3/2)σ_x`.
pub fn make_max_violation_realization() -> QuantumRealization {
    let z = pauli::sigma_z();
    let x = pauli::sigma_x();
    let h = 3f64.sqrt() / 2.0;
    let a1 = &z.scale_real(-0.5) - &x.scale_real(h);
    let b1 = &z.scale_real(0.5) - &x.scale_real(h);
    QuantumRealization::pure(&pauli::phi_plus(), (2, 2), [z.clone(), a1], [z, b1])
        .expect("fixed realization is valid")
}

/// `|00⟩` with `σ_z` for every setting.
pub fn make_product_realization() -> QuantumRealization {
    let z = pauli::sigma_z();
    QuantumRealization::pure(&pauli::ket(4, 0), (2, 2), [z.clone(), z.clone()], [z.clone(), z])
        .expect("fixed realization is valid")
}

/// Expectation of the sum-of-squares operator
/// `(B1^0 − B2^0)² + ½((B2^1 − B2^0) − B1^1)²`, without the agreement check.
pub fn sos_expectation(r: &QuantumRealization) -> f64 {
    let a0 = r.lift_a(&r.obs_a[0]);
    let a1 = r.lift_a(&r.obs_a[1]);
    let b0 = r.lift_b(&r.obs_b[0]);
    let b1 = r.lift_b(&r.obs_b[1]);
    let t1 = &a0 - &b0;
    let t2 = &(&b1 - &b0) - &a1;
    r.rho.expectation(&(&t1 * &t1)) + 0.5 * r.rho.expectation(&(&t2 * &t2))
}

/// Sum-of-squares residual; equals `5/2 − CHSH` when `E00 = 1`.
pub fn sos_residual(r: &QuantumRealization) -> Result<f64, QuantumError> {
    let e00 = r.correlator(0, 0);
    if (e00 - 1.0).abs() > 1e-8 {
        return Err(QuantumError::AgreementPrecondition { e00 });
    }
    Ok(sos_expectation(r).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{chsh_witness, correlator, is_no_signalling};

    #[test]
    fn maximal_realization() {
        let r = make_max_violation_realization();
        let b = born_behavior(&r);
        let w = chsh_witness(&b);
        assert!((w.chsh - 2.5).abs() < 1e-12);
        assert!((w.correlators[0][0] - 1.0).abs() < 1e-12);
        assert!((correlator(&b, 1, 1) - 0.5).abs() < 1e-12);
        for x in 0..2 {
            assert!((b.marginal_first(0, x, 0) - 0.5).abs() < 1e-12);
            assert!((b.marginal_second(0, 0, x) - 0.5).abs() < 1e-12);
        }
        assert!(is_no_signalling(&b, 1e-10));
    }

    #[test]
    fn product_realization_is_classical() {
        let r = make_product_realization();
        let w = chsh_witness(&born_behavior(&r));
        assert!((w.chsh - 2.0).abs() < 1e-12);
        assert!((sos_residual(&r).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tsirelson_angles_on_phi_plus() {
        // E(θa, θb) = cos(θa − θb) for real observables on |Φ+⟩
        let q = std::f64::consts::FRAC_PI_4;
        let r = QuantumRealization::pure(
            &pauli::phi_plus(),
            (2, 2),
            [pauli::zx_observable(0.0), pauli::zx_observable(2.0 * q)],
            [pauli::zx_observable(-q), pauli::zx_observable(q)],
        )
        .unwrap();
        let w = chsh_witness(&born_behavior(&r));
        assert!((w.chsh - 2.0 * 2f64.sqrt()).abs() < 1e-10, "{}", w.chsh);
    }

    #[test]
    fn sos_identity_at_maximum() {
        let r = make_max_violation_realization();
        assert!(sos_residual(&r).unwrap() < 1e-10);
    }

    #[test]
    fn sos_precondition() {
        let z = pauli::sigma_z();
        let t = (0.9f64).acos();
        let r = QuantumRealization::pure(
            &pauli::phi_plus(),
            (2, 2),
            [z.clone(), z.clone()],
            [pauli::zx_observable(t), z],
        )
        .unwrap();
        assert!((r.correlator(0, 0) - 0.9).abs() < 1e-12);
        assert!(matches!(sos_residual(&r), Err(QuantumError::AgreementPrecondition { .. })));
    }

    #[test]
    fn validation() {
        let z = pauli::sigma_z();
        let bad = z.scale_real(0.5);
        assert!(matches!(
            QuantumRealization::pure(&pauli::phi_plus(), (2, 2), [z.clone(), bad], [z.clone(), z.clone()]),
            Err(QuantumError::NotDichotomic(_))
        ));
        assert!(matches!(
            QuantumRealization::pure(&pauli::phi_plus(), (2, 3), [z.clone(), z.clone()], [z.clone(), z]),
            Err(QuantumError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn json_roundtrip() {
        let r = make_max_violation_realization();
        let s = serde_json::to_string(&r).unwrap();
        let back: QuantumRealization = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
