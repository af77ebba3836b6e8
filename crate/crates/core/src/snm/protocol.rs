//! Two-stage ab-initio tuning of a photonic CHSH test from counts alone.
//!
//! Parameters are eight waveplate angles in `[0, π]`, ordered
//! `[h1⁰, q1⁰, h2⁰, q2⁰, h1¹, q1¹, h2¹, q2¹]` (arm, then setting). Stage 1
//! tunes the setting-0 plates to minimize `A = |E00 − (1 − 2ε)|`; stage 2
//! freezes them and tunes the setting-1 plates to minimize `−|CHSH|`. The
//! reported values come from one more measurement of all four setting pairs
//! at the stage-2 incumbent.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{snm_minimize, SnmConfig, SnmError, SnmResult};
use crate::photonics::{correlator_from_counts, CountSource, WaveplateSetting};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("stage 1 ended with agreement residual {residual} above {limit}")]
    Stage1Failed { residual: f64, limit: f64, stage1: Box<SnmResult>, records: Vec<ProtocolRecord> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Config(#[from] SnmError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub stage1: SnmConfig,
    pub stage2: SnmConfig,
    /// Stage-1 failure threshold on the best agreement residual.
    pub stage1_limit: f64,
}

impl ProtocolConfig {
    /// 100 evaluations with early stop at `A < 0.03`, then 250 evaluations.
    pub fn new(seed: u64) -> Self {
        let mut stage1 = SnmConfig::new(vec![(0.0, PI); 4], 100, seed);
        stage1.target = Some(0.03);
        let stage2 = SnmConfig::new(vec![(0.0, PI); 4], 250, seed.wrapping_add(1));
        Self { stage1, stage2, stage1_limit: 0.1 }
    }
}

/// One objective evaluation with the counts behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRecord {
    pub stage: u8,
    pub eval: usize,
    pub params: [f64; 8],
    pub objective: f64,
    /// `(x1, x2, [n00, n01, n10, n11])` for every setting pair measured.
    pub counts: Vec<(usize, usize, [u64; 4])>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    /// `|CHSH|` from a fresh measurement at the best stage-2 point.
    pub chsh: f64,
    pub chsh_sigma: f64,
    /// `(1 − E00)/2` from the same counts.
    pub eps_achieved: f64,
    pub eps_sigma: f64,
    pub correlators: [[f64; 2]; 2],
    pub angles: [f64; 8],
    /// Best stage-1 agreement residual.
    pub agreement_residual: f64,
    /// `(x1, x2, counts)` of the final measurement.
    pub final_counts: Vec<(usize, usize, [u64; 4])>,
    pub stage1: SnmResult,
    pub stage2: SnmResult,
    pub records: Vec<ProtocolRecord>,
}

fn setting(p: &[f64; 8], x1: usize, x2: usize) -> WaveplateSetting {
    WaveplateSetting::new((p[4 * x1], p[4 * x1 + 1]), (p[4 * x2 + 2], p[4 * x2 + 3]))
}

/// Runs both stages against `source`.
pub fn abinitio_protocol(
    source: &mut impl CountSource,
    eps_target: f64,
    cfg: &ProtocolConfig,
) -> Result<ProtocolResult, ProtocolError> {
    if !(0.0..=0.5).contains(&eps_target) {
        return Err(ProtocolError::InvalidArgument(format!("epsilon {eps_target} outside [0, 1/2]")));
    }
    if cfg.stage1.dim() != 4 || cfg.stage2.dim() != 4 {
        return Err(ProtocolError::InvalidArgument("each stage tunes exactly four angles".into()));
    }
    let target = 1.0 - 2.0 * eps_target;
    let mut records = Vec::new();

    let stage1 = {
        let mut eval = 0;
        let records = &mut records;
        let source = &mut *source;
        snm_minimize(
            |q: &[f64]| {
                let mut p = [0.0; 8];
                p[..4].copy_from_slice(q);
                let n = source.counts(&setting(&p, 0, 0));
                let a = (correlator_from_counts(&n).0 - target).abs();
                records.push(ProtocolRecord { stage: 1, eval, params: p, objective: a, counts: vec![(0, 0, n)] });
                eval += 1;
                a
            },
            &cfg.stage1,
        )?
    };
    if stage1.best_value > cfg.stage1_limit {
        return Err(ProtocolError::Stage1Failed {
            residual: stage1.best_value,
            limit: cfg.stage1_limit,
            stage1: Box::new(stage1),
            records,
        });
    }
    let frozen: Vec<f64> = stage1.best_x.clone();

    let stage2 = {
        let mut eval = 0;
        let records = &mut records;
        let source = &mut *source;
        let frozen = &frozen;
        snm_minimize(
            |q: &[f64]| {
                let mut p = [0.0; 8];
                p[..4].copy_from_slice(frozen);
                p[4..].copy_from_slice(q);
                let mut counts = Vec::with_capacity(4);
                let mut e = [[0.0; 2]; 2];
                for x1 in 0..2 {
                    for x2 in 0..2 {
                        let n = source.counts(&setting(&p, x1, x2));
                        e[x1][x2] = correlator_from_counts(&n).0;
                        counts.push((x1, x2, n));
                    }
                }
                let s = -(e[0][0] + e[0][1] - e[1][0] + e[1][1]).abs();
                records.push(ProtocolRecord { stage: 2, eval, params: p, objective: s, counts });
                eval += 1;
                s
            },
            &cfg.stage2,
        )?
    };

    // fresh counts at the incumbent, so the report is not the luckiest sample
    let mut angles = [0.0; 8];
    angles[..4].copy_from_slice(&frozen);
    angles[4..].copy_from_slice(&stage2.best_x);
    let mut e = [[0.0; 2]; 2];
    let mut var = [[0.0; 2]; 2];
    let mut final_counts = Vec::with_capacity(4);
    for x1 in 0..2 {
        for x2 in 0..2 {
            let n = source.counts(&setting(&angles, x1, x2));
            (e[x1][x2], var[x1][x2]) = correlator_from_counts(&n);
            final_counts.push((x1, x2, n));
        }
    }
    let chsh = (e[0][0] + e[0][1] - e[1][0] + e[1][1]).abs();
    let chsh_sigma = var.iter().flatten().sum::<f64>().sqrt();
    Ok(ProtocolResult {
        chsh,
        chsh_sigma,
        eps_achieved: (1.0 - e[0][0]) / 2.0,
        eps_sigma: var[0][0].sqrt() / 2.0,
        correlators: e,
        angles,
        agreement_residual: stage1.best_value,
        final_counts,
        stage1,
        stage2,
        records,
    })
}
