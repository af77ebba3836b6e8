//! State ensembles, guessing probability and measure-and-prepare channels.

use serde::{Deserialize, Serialize};

use super::{CMatrix, QuantumError, VALIDATION_TOL};
use crate::npa::solver::{sdp_feasible, Block, Entry, Lmi, SolverConfig, Verdict};
use crate::npa::NpaError;

/// Prior-weighted family of states `{p_i, σ_i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleFile")]
pub struct Ensemble {
    priors: Vec<f64>,
    states: Vec<CMatrix>,
}

#[derive(Deserialize)]
struct EnsembleFile {
    priors: Vec<f64>,
    states: Vec<CMatrix>,
}

impl TryFrom<EnsembleFile> for Ensemble {
    type Error = QuantumError;

    fn try_from(f: EnsembleFile) -> Result<Self, Self::Error> {
        Ensemble::new(f.priors, f.states)
    }
}

impl Ensemble {
    pub fn new(priors: Vec<f64>, states: Vec<CMatrix>) -> Result<Self, QuantumError> {
        if priors.is_empty() || priors.len() != states.len() {
            return Err(QuantumError::DimensionMismatch(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        if priors.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (priors.iter().sum::<f64>() - 1.0).abs() > VALIDATION_TOL {
            return Err(QuantumError::InvalidArgument("priors must form a probability vector".into()));
        }
        let d = states[0].rows();
        for (i, s) in states.iter().enumerate() {
            if s.rows() != d || !s.is_square() {
                return Err(QuantumError::DimensionMismatch(format!("state {i} has a different dimension")));
            }
            if !s.is_density(VALIDATION_TOL) {
                return Err(QuantumError::NotDensity(format!("state {i}")));
            }
        }
        Ok(Self { priors, states })
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[CMatrix] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].rows()
    }
}

/// Optimal success probability of identifying the index `i` by measuring
/// the prepared state.
///
/// Exact for two states (Helstrom). For more states the dual problem
/// `min Tr Y s.t. Y ⪰ p_i σ_i` is bisected to width `1e-6` with the
/// projection solver; the certified upper end is returned.
pub fn guessing_probability(e: &Ensemble) -> f64 {
    match e.states.len() {
        1 => 1.0,
        2 => {
            let diff = &e.states[0].scale_real(e.priors[0]) - &e.states[1].scale_real(e.priors[1]);
            (0.5 * (1.0 + diff.trace_norm())).min(1.0)
        }
        _ => guessing_probability_sdp(e, 1e-6).unwrap_or(1.0),
    }
}

/// Dual SDP for the guessing probability, for any number of states.
///
/// A Hermitian `Y = Yr + i·Yi` is handled through the real embedding
/// `[[Yr, −Yi], [Yi, Yr]]`, which is PSD exactly when `Y` is.
pub fn guessing_probability_sdp(e: &Ensemble, width: f64) -> Result<f64, NpaError> {
    let d = e.dim();
    let mut re = vec![vec![0usize; d]; d];
    let mut im = vec![vec![usize::MAX; d]; d];
    let mut nvars = 0;
    for i in 0..d {
        for j in i..d {
            re[i][j] = nvars;
            re[j][i] = nvars;
            nvars += 1;
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            im[i][j] = nvars;
            im[j][i] = nvars;
            nvars += 1;
        }
    }
    // Yi_rc as a signed variable reference; Yi is antisymmetric
    let yi = |r: usize, c: usize| -> Option<(usize, f64)> {
        match r.cmp(&c) {
            std::cmp::Ordering::Less => Some((im[r][c], 1.0)),
            std::cmp::Ordering::Greater => Some((im[r][c], -1.0)),
            std::cmp::Ordering::Equal => None,
        }
    };
    let base = {
        let mut lmi = Lmi::new(nvars);
        for (p, s) in e.priors.iter().zip(&e.states) {
            let s = s.hermitian_part().scale_real(*p);
            let n = 2 * d;
            let mut entries = Vec::with_capacity(n * n);
            for row in 0..n {
                for col in 0..n {
                    let (r, c) = (row % d, col % d);
                    let z = s[(r, c)];
                    let entry = match (row < d, col < d) {
                        (true, true) | (false, false) => Entry::affine(-z.re, re[r][c], 1.0),
                        (true, false) => match yi(r, c) {
                            Some((v, k)) => Entry::affine(z.im, v, -k),
                            None => Entry::constant(z.im),
                        },
                        (false, true) => match yi(r, c) {
                            Some((v, k)) => Entry::affine(-z.im, v, k),
                            None => Entry::constant(-z.im),
                        },
                    };
                    entries.push(entry);
                }
            }
            lmi.add_block(Block::new(n, entries));
        }
        lmi
    };
    let cfg = SolverConfig { tol: 1e-9, psd_tol: 1e-9, max_iters: 50_000, patience: 2_000, ..SolverConfig::default() };
    let feasible = |t: f64| {
        let mut lmi = base.clone();
        let s = lmi.add_var();
        let mut terms: Vec<(usize, f64)> = (0..d).map(|k| (re[k][k], 1.0)).collect();
        terms.push((s, -1.0));
        lmi.add_equality(terms, 0.0);
        lmi.add_box(s, f64::NEG_INFINITY, t);
        sdp_feasible(&lmi, &cfg, None).verdict == Verdict::Feasible
    };
    let mut lo = e.priors.iter().copied().fold(0.0, f64::max);
    let mut hi = 1.0;
    if feasible(lo) {
        return Ok(lo);
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `Σ_k Tr(ρ F_k) σ_k`.
pub fn measure_and_prepare(rho_a: &CMatrix, povm: &[CMatrix], prepared: &[CMatrix]) -> Result<CMatrix, QuantumError> {
    if povm.is_empty() || povm.len() != prepared.len() {
        return Err(QuantumError::DimensionMismatch(format!(
            "{} POVM elements for {} prepared states",
            povm.len(),
            prepared.len()
        )));
    }
    let d = rho_a.rows();
    if !rho_a.is_density(VALIDATION_TOL) {
        return Err(QuantumError::NotDensity("input state".into()));
    }
    let mut total = CMatrix::zeros(d, d);
    for (k, f) in povm.iter().enumerate() {
        if f.rows() != d || !f.is_square() {
            return Err(QuantumError::DimensionMismatch(format!("POVM element {k}")));
        }
        if !f.is_psd(VALIDATION_TOL) {
            return Err(QuantumError::InvalidArgument(format!("POVM element {k} is not PSD")));
        }
        total = &total + f;
    }
    let deviation = (&total - &CMatrix::identity(d)).max_abs();
    if deviation > VALIDATION_TOL {
        return Err(QuantumError::PovmIncomplete { deviation });
    }
    let out_dim = prepared[0].rows();
    let mut out = CMatrix::zeros(out_dim, out_dim);
    for (k, (f, s)) in povm.iter().zip(prepared).enumerate() {
        if s.rows() != out_dim || !s.is_density(VALIDATION_TOL) {
            return Err(QuantumError::NotDensity(format!("prepared state {k}")));
        }
        let w = rho_a.trace_product(f).re;
        out = &out + &s.scale_real(w);
    }
    Ok(out)
}
