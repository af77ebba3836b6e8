//! Simulated Sagnac source with a tunable dephasing plate.
//!
//! Polarization basis `|H⟩ = |0⟩`, `|V⟩ = |1⟩`; two-photon kets are ordered
//! `HH, HV, VH, VV`. The emitted state is
//!
//! `ρ_f = |Δ|² |Ψ⟩⟨Ψ| + (1 − |Δ|²) ρ_mix`, with
//! `|Ψ⟩ = (|HV⟩ − e^{iφ}|VH⟩)/√2` and `ρ_mix = (|HV⟩⟨HV| + |VH⟩⟨VH|)/2`,
//!
//! where `φ` is the pump phase plus `arg Δ`. Each arm measures with a
//! quarter-wave plate, then a half-wave plate, then a polarizing splitter:
//!
//! - `HWP(θ) = [[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]`
//! - `QWP(φ) = [[cos²φ + i sin²φ, (1 − i) sin φ cos φ], [(1 − i) sin φ cos φ, sin²φ + i cos²φ]]`
//!
//! so the measured observable is `U† σ_z U` with `U = HWP · QWP`, outcome 0
//! on the transmitted (H) port. [`ExperimentModel::ideal_expectation`] and
//! [`ExperimentModel::sample_counts`] use these raw labels; [`ExperimentBox`]
//! swaps the second detector pair so that the singlet's anticorrelation
//! reads as agreement.

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{born_behavior, pauli, plane_search, CMatrix, PlaneModel, QuantumRealization, C64};
use crate::Behavior;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhotonicsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("agreement {target} is out of reach: the largest correlation is {max}")]
    Unreachable { target: f64, max: f64 },
}

/// The dephased two-photon source and its counting statistics.
///
/// JSON form: `{"delta": 0.91, "phase": 0.0, "counts": 10000, "seed": 7,
/// "background": 0.0}`; `delta` may also be `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct ExperimentModel {
    delta: C64,
    phase: f64,
    counts_per_setting: u64,
    seed: u64,
    background: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum DeltaValue {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    delta: DeltaValue,
    #[serde(default)]
    phase: f64,
    counts: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    background: f64,
}

impl TryFrom<ModelFile> for ExperimentModel {
    type Error = PhotonicsError;

    fn try_from(f: ModelFile) -> Result<Self, Self::Error> {
        let delta = match f.delta {
            DeltaValue::Real(r) => C64::new(r, 0.0),
            DeltaValue::Complex([re, im]) => C64::new(re, im),
        };
        Self::new(delta, f.phase, f.counts, f.seed)?.with_background(f.background)
    }
}

impl From<ExperimentModel> for ModelFile {
    fn from(m: ExperimentModel) -> Self {
        let delta =
            if m.delta.im == 0.0 { DeltaValue::Real(m.delta.re) } else { DeltaValue::Complex([m.delta.re, m.delta.im]) };
        ModelFile { delta, phase: m.phase, counts: m.counts_per_setting, seed: m.seed, background: m.background }
    }
}

/// Waveplate angles `(hwp, qwp)` in radians for each arm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveplateSetting {
    pub first: (f64, f64),
    pub second: (f64, f64),
}

impl WaveplateSetting {
    pub fn new(first: (f64, f64), second: (f64, f64)) -> Self {
        Self { first, second }
    }
}

pub fn half_wave_plate(theta: f64) -> CMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    CMatrix::from_real(2, 2, &[c, s, s, -c])
}

pub fn quarter_wave_plate(phi: f64) -> CMatrix {
    let (s, c) = phi.sin_cos();
    let i = C64::new(0.0, 1.0);
    let off = C64::new(1.0, -1.0) * s * c;
    CMatrix::from_vec(2, 2, vec![c * c + i * s * s, off, off, s * s + i * c * c])
}

/// `U† σ_z U` with `U = HWP(hwp) · QWP(qwp)`.
pub fn measurement_observable(hwp: f64, qwp: f64) -> CMatrix {
    let u = &half_wave_plate(hwp) * &quarter_wave_plate(qwp);
    &(&u.adjoint() * &pauli::sigma_z()) * &u
}

/// Applies `|H⟩|0⟩ ↦ Δ|H⟩|0⟩ + √(1 − |Δ|²)|H⟩|1⟩`, `|V⟩|0⟩ ↦ |V⟩|0⟩` to
/// `(α|H⟩ + β|V⟩)|0⟩` and returns the joint density on polarization ⊗ A.
pub fn dephasing_channel(alpha: C64, beta: C64, delta: C64) -> Result<CMatrix, PhotonicsError> {
    if ((alpha.norm_sqr() + beta.norm_sqr()) - 1.0).abs() > 1e-10 {
        return Err(PhotonicsError::InvalidArgument("amplitudes must be normalized".into()));
    }
    if !(delta.norm() <= 1.0) {
        return Err(PhotonicsError::InvalidArgument(format!("|Δ| = {} exceeds 1", delta.norm())));
    }
    let zero = C64::new(0.0, 0.0);
    let leak = (1.0 - delta.norm_sqr()).max(0.0).sqrt();
    // index = pol * 2 + a
    let psi = [alpha * delta, alpha * leak, beta, zero];
    Ok(CMatrix::projector(&psi))
}

impl ExperimentModel {
    pub fn new(delta: C64, phase: f64, counts_per_setting: u64, seed: u64) -> Result<Self, PhotonicsError> {
        if !delta.is_finite() || delta.norm() > 1.0 + 1e-12 {
            return Err(PhotonicsError::InvalidModel(format!("|Δ| = {} must lie in [0, 1]", delta.norm())));
        }
        if !phase.is_finite() {
            return Err(PhotonicsError::InvalidModel("phase must be finite".into()));
        }
        if counts_per_setting == 0 {
            return Err(PhotonicsError::InvalidModel("counts per setting must be at least 1".into()));
        }
        let delta = if delta.norm() > 1.0 { delta / delta.norm() } else { delta };
        Ok(Self { delta, phase, counts_per_setting, seed, background: 0.0 })
    }

    /// Real overlap, zero phase.
    pub fn with_overlap(delta: f64, counts_per_setting: u64, seed: u64) -> Result<Self, PhotonicsError> {
        Self::new(C64::new(delta, 0.0), 0.0, counts_per_setting, seed)
    }

    /// Mean background coincidences added to every outcome cell.
    pub fn with_background(mut self, background: f64) -> Result<Self, PhotonicsError> {
        if !(background >= 0.0 && background.is_finite()) {
            return Err(PhotonicsError::InvalidModel("background must be finite and nonnegative".into()));
        }
        self.background = background;
        Ok(self)
    }

    pub fn delta(&self) -> C64 {
        self.delta
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn counts_per_setting(&self) -> u64 {
        self.counts_per_setting
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn final_state(&self) -> CMatrix {
        let w = self.delta.norm_sqr();
        let coh = C64::from_polar(1.0, self.phase + self.delta.arg());
        let mut rho = CMatrix::zeros(4, 4);
        rho[(1, 1)] = C64::new(0.5, 0.0);
        rho[(2, 2)] = C64::new(0.5, 0.0);
        rho[(1, 2)] = -coh.conj() * (0.5 * w);
        rho[(2, 1)] = -coh * (0.5 * w);
        rho
    }

    /// Realization with observables `B1^x` from `first[x]` and `B2^x` from
    /// `second[x]`, in raw detector labels.
    pub fn realization(&self, first: [(f64, f64); 2], second: [(f64, f64); 2]) -> QuantumRealization {
        let m = |(h, q): (f64, f64)| measurement_observable(h, q);
        QuantumRealization::new(self.final_state(), (2, 2), [m(first[0]), m(first[1])], [m(second[0]), m(second[1])])
            .expect("waveplate observables are dichotomic and the source state is a density")
    }

    /// Raw-label behavior for four waveplate pairs.
    pub fn behavior(&self, first: [(f64, f64); 2], second: [(f64, f64); 2]) -> Behavior {
        born_behavior(&self.realization(first, second))
    }

    /// `[p00, p01, p10, p11]` in raw labels.
    pub fn ideal_probabilities(&self, w: &WaveplateSetting) -> [f64; 4] {
        let rho = self.final_state();
        let a = measurement_observable(w.first.0, w.first.1);
        let b = measurement_observable(w.second.0, w.second.1);
        let mut p = [0.0; 4];
        for b1 in 0..2 {
            for b2 in 0..2 {
                let op = crate::quantum::outcome_projector(&a, b1).kron(&crate::quantum::outcome_projector(&b, b2));
                p[2 * b1 + b2] = rho.expectation(&op).clamp(0.0, 1.0);
            }
        }
        p
    }

    pub fn ideal_expectation(&self, w: &WaveplateSetting) -> f64 {
        let a = measurement_observable(w.first.0, w.first.1);
        let b = measurement_observable(w.second.0, w.second.1);
        self.final_state().expectation(&a.kron(&b)).clamp(-1.0, 1.0)
    }

    /// Poisson coincidences `[n00, n01, n10, n11]` with means
    /// `counts · p(b1, b2) + background`.
    pub fn sample_counts(&self, w: &WaveplateSetting, rng: &mut impl Rng) -> [u64; 4] {
        let p = self.ideal_probabilities(w);
        let mut n = [0u64; 4];
        for (k, pk) in p.iter().enumerate() {
            let lambda = self.counts_per_setting as f64 * pk + self.background;
            n[k] = poisson(lambda, rng);
        }
        n
    }

    /// Pauli correlation matrix `T_ij = Tr[ρ σ_i ⊗ σ_j]`.
    pub fn correlation_matrix(&self) -> [[f64; 3]; 3] {
        let rho = self.final_state();
        let s = [pauli::sigma_x(), pauli::sigma_y(), pauli::sigma_z()];
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = rho.expectation(&s[i].kron(&s[j]));
            }
        }
        t
    }

    fn singular_values(&self) -> [f64; 3] {
        let t = self.correlation_matrix();
        let m = Matrix3::from_fn(|i, j| t[i][j]);
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        [sv[0], sv[1], sv[2]]
    }

    /// `2 √(t1² + t2²)` from the two largest singular values of `T`.
    pub fn max_chsh_unconstrained(&self) -> f64 {
        let s = self.singular_values();
        2.0 * (s[0] * s[0] + s[1] * s[1]).sqrt()
    }

    /// Largest CHSH reachable on the exact state with `E00 = 1 − 2ε`, using
    /// measurement directions in the plane of the two dominant singular
    /// vectors of `T`.
    pub fn tomography_optimum(&self, epsilon: f64, seed: u64) -> Result<f64, PhotonicsError> {
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(PhotonicsError::InvalidArgument(format!("epsilon {epsilon} outside [0, 1/2]")));
        }
        let s = self.singular_values();
        let target = 1.0 - 2.0 * epsilon;
        if target > s[0] + 1e-12 {
            return Err(PhotonicsError::Unreachable { target, max: s[0] });
        }
        let opt = plane_search(PlaneModel::Fixed(s[0], s[1]), epsilon, seed);
        if !opt.feasible {
            return Err(PhotonicsError::Unreachable { target, max: s[0] });
        }
        Ok(opt.chsh)
    }
}

fn poisson(lambda: f64, rng: &mut impl Rng) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive finite mean").sample(rng) as u64
}

/// Source of coincidence counts for one waveplate setting, `[n00, n01, n10, n11]`.
pub trait CountSource {
    fn counts(&mut self, setting: &WaveplateSetting) -> [u64; 4];
}

/// [`ExperimentModel`] as a black box: its own generator seeded from the
/// model, and the second arm's outcome labels swapped.
#[derive(Clone, Debug)]
pub struct ExperimentBox {
    model: ExperimentModel,
    rng: ChaCha8Rng,
    noiseless: bool,
}

impl ExperimentBox {
    pub fn new(model: ExperimentModel) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(model.seed);
        Self { model, rng, noiseless: false }
    }

    /// Returns rounded expected counts instead of Poisson draws.
    pub fn noiseless(model: ExperimentModel) -> Self {
        Self { noiseless: true, ..Self::new(model) }
    }

    pub fn model(&self) -> &ExperimentModel {
        &self.model
    }
}

impl CountSource for ExperimentBox {
    fn counts(&mut self, setting: &WaveplateSetting) -> [u64; 4] {
        let raw = if self.noiseless {
            let p = self.model.ideal_probabilities(setting);
            let n = self.model.counts_per_setting as f64;
            p.map(|pk| (n * pk + self.model.background).round() as u64)
        } else {
            self.model.sample_counts(setting, &mut self.rng)
        };
        [raw[1], raw[0], raw[3], raw[2]]
    }
}

/// `(n00 + n11 − n01 − n10)/N` and its Poisson variance `4 n_same n_diff / N³`.
pub fn correlator_from_counts(n: &[u64; 4]) -> (f64, f64) {
    let same = (n[0] + n[3]) as f64;
    let diff = (n[1] + n[2]) as f64;
    let total = same + diff;
    if total == 0.0 {
        return (0.0, 0.0);
    }
    ((same - diff) / total, 4.0 * same * diff / total.powi(3))
}
