//! Largest CHSH value compatible with a fixed agreement correlator.
//!
//! Correlators in the z–x plane take the form
//! `E(θa, θb) = t1 cos θa cos θb + t2 sin θa sin θb`; for the pure state
//! `cos t |00⟩ + sin t |11⟩` with `cos θ σ_z + sin θ σ_x` observables this is
//! `t1 = 1`, `t2 = sin 2t`. The search runs noiseless SNM with restarts.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::{pauli, QuantumError, QuantumRealization, C64};
use crate::behavior::{chsh_witness, correlator};
use crate::quantum::born_behavior;
use crate::snm::{axis_simplex, snm_minimize, snm_minimize_from, SnmConfig};

/// `1 − 2ε + 3 sin(π/3 − asin(1 − 2ε)/3)`.
pub fn analytic_constrained_chsh(epsilon: f64) -> f64 {
    let c = 1.0 - 2.0 * epsilon;
    c + 3.0 * (FRAC_PI_3 - c.asin() / 3.0).sin()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedOptimum {
    pub realization: QuantumRealization,
    pub chsh: f64,
    pub e00: f64,
    /// `[t, θa0, θa1, θb0, θb1]`.
    pub params: [f64; 5],
    /// `asin E00 + asin E01 − asin E10 + asin E11 − π` at the optimum.
    pub criterion_residual: f64,
    pub evals: usize,
}

const PENALTY_ROUNDS: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];
const GLOBAL_STARTS: usize = 6;
const GLOBAL_EVALS: usize = 1500;
const POLISH_EVALS: usize = 1500;
const ATTEMPTS: u64 = 3;

/// Correlation weights of a plane search.
#[derive(Clone, Copy, Debug)]
pub(crate) enum PlaneModel {
    /// Pure state with free Schmidt angle.
    PureState,
    /// Fixed singular values `(t1, t2)`.
    Fixed(f64, f64),
}

/// Slack on `E00 = 1 − 2ε` below which a point counts as feasible.
const FEASIBILITY_SLACK: f64 = 1e-10;

impl PlaneModel {
    /// Search space: `[t,] θa0, θa1, θb1`; `θb0` is solved from the constraint.
    fn bounds(self) -> Vec<(f64, f64)> {
        let mut b = vec![(-PI, PI); 3];
        if let PlaneModel::PureState = self {
            b.insert(0, (0.0, FRAC_PI_4));
        }
        b
    }

    fn weights(self, p: &[f64]) -> (f64, f64, [f64; 3]) {
        match self {
            PlaneModel::PureState => (1.0, (2.0 * p[0]).sin(), [p[1], p[2], p[3]]),
            PlaneModel::Fixed(t1, t2) => (t1, t2, [p[0], p[1], p[2]]),
        }
    }

    /// Full angles `[θa0, θa1, θb0, θb1]` with `θb0` chosen so that
    /// `E00 = target`, or maximizing `E00` when that is out of reach; the
    /// second value is the shortfall.
    fn angles(self, p: &[f64], target: f64) -> ([f64; 4], f64) {
        let (t1, t2, [a0, a1, b1]) = self.weights(p);
        // E00 = r cos(θb0 − φ)
        let (x, y) = (t1 * a0.cos(), t2 * a0.sin());
        let r = x.hypot(y);
        let phi = y.atan2(x);
        let short = (target - r).max(0.0);
        let b0 = if r > 0.0 { phi + (target / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
        ([a0, a1, b0, b1], short)
    }

    fn correlators(self, p: &[f64], angles: &[f64; 4]) -> [[f64; 2]; 2] {
        let (t1, t2, _) = self.weights(p);
        let e = |a: f64, b: f64| t1 * a.cos() * b.cos() + t2 * a.sin() * b.sin();
        let [a0, a1, b0, b1] = *angles;
        [[e(a0, b0), e(a0, b1)], [e(a1, b0), e(a1, b1)]]
    }
}

pub(crate) struct PlaneOptimum {
    /// `[t, θa0, θa1, θb0, θb1]`; `t` is `π/4` for fixed weights.
    pub params: [f64; 5],
    pub chsh: f64,
    pub feasible: bool,
    pub evals: usize,
}

fn chsh(e: &[[f64; 2]; 2]) -> f64 {
    e[0][0] + e[0][1] - e[1][0] + e[1][1]
}

/// Maximizes CHSH over the plane model subject to `E00 = 1 − 2ε`.
///
/// `θb0` is eliminated through the constraint wherever it can be met; where
/// it cannot, the objective is an exact penalty `4 + w · shortfall` that
/// ranks every such point behind every feasible one.
pub(crate) fn plane_search(model: PlaneModel, epsilon: f64, seed: u64) -> PlaneOptimum {
    let target = 1.0 - 2.0 * epsilon;
    let bounds = model.bounds();
    let mut evals = 0;
    let objective = |w: f64| {
        move |p: &[f64]| {
            let (angles, short) = model.angles(p, target);
            if short > FEASIBILITY_SLACK {
                4.0 + w * short
            } else {
                -chsh(&model.correlators(p, &angles))
            }
        }
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in 0..GLOBAL_STARTS as u64 {
        let mut cfg = SnmConfig::new(bounds.clone(), GLOBAL_EVALS, seed.wrapping_mul(31).wrapping_add(s));
        cfg.initial_points = 2 * bounds.len();
        cfg.f_tol = Some(1e-13);
        cfg.x_tol = Some(1e-10);
        let r = snm_minimize(objective(PENALTY_ROUNDS[0]), &cfg).expect("static configuration is valid");
        evals += r.evals;
        if best.as_ref().map_or(true, |b| r.best_value < b.1) {
            best = Some((r.best_x, r.best_value));
        }
    }
    let (mut x, _) = best.expect("at least one start");
    for (k, &w) in PENALTY_ROUNDS.iter().enumerate() {
        let mut cfg = SnmConfig::new(bounds.clone(), POLISH_EVALS, seed ^ (0x5eed + k as u64));
        cfg.f_tol = Some(1e-15);
        cfg.x_tol = Some(1e-12);
        let r = snm_minimize_from(objective(w), &cfg, axis_simplex(&x, &bounds, 0.01))
            .expect("static configuration is valid");
        evals += r.evals;
        x = r.best_x;
    }
    let (angles, short) = model.angles(&x, target);
    let t = if let PlaneModel::PureState = model { x[0] } else { FRAC_PI_4 };
    let [a0, a1, b0, b1] = angles;
    PlaneOptimum {
        chsh: chsh(&model.correlators(&x, &angles)),
        params: [t, a0, a1, b0, b1],
        feasible: short <= FEASIBILITY_SLACK,
        evals,
    }
}

/// `asin E00 + asin E01 − asin E10 + asin E11 − π`.
pub fn asin_criterion(e: &[[f64; 2]; 2]) -> f64 {
    let s = |v: f64| v.clamp(-1.0, 1.0).asin();
    s(e[0][0]) + s(e[0][1]) - s(e[1][0]) + s(e[1][1]) - PI
}

/// Maximizes CHSH over two-qubit pure states and z–x plane observables with
/// `E00 = 1 − 2ε`. Fails with `NoConvergence` if the best value found falls
/// more than `tol` below the analytic curve or the arcsine criterion misses
/// by more than `10 tol`, after a few reseeded attempts.
pub fn optimize_constrained_chsh(epsilon: f64, tol: f64, seed: u64) -> Result<ConstrainedOptimum, QuantumError> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(QuantumError::InvalidArgument(format!("epsilon {epsilon} outside [0, 1/2]")));
    }
    if !(tol > 0.0) {
        return Err(QuantumError::InvalidArgument("tol must be positive".into()));
    }
    let reference = analytic_constrained_chsh(epsilon);
    let mut evals = 0;
    let mut last = String::new();
    for attempt in 0..ATTEMPTS {
        let opt = plane_search(PlaneModel::PureState, epsilon, seed.wrapping_add(attempt * 0x9e37_79b9));
        evals += opt.evals;
        if !opt.feasible {
            last = "no point meeting the agreement constraint was found".into();
            continue;
        }
        let p = &opt.params;
        let (c, s) = (C64::new(p[0].cos(), 0.0), C64::new(p[0].sin(), 0.0));
        let psi = [c, C64::new(0.0, 0.0), C64::new(0.0, 0.0), s];
        let obs = |t: f64| pauli::zx_observable(t);
        let realization = QuantumRealization::pure(&psi, (2, 2), [obs(p[1]), obs(p[2])], [obs(p[3]), obs(p[4])])?;
        let b = born_behavior(&realization);
        let report = chsh_witness(&b);
        let e = [[correlator(&b, 0, 0), correlator(&b, 0, 1)], [correlator(&b, 1, 0), correlator(&b, 1, 1)]];
        let criterion_residual = asin_criterion(&e);
        if report.chsh >= reference - tol && criterion_residual.abs() <= 10.0 * tol {
            return Ok(ConstrainedOptimum {
                realization,
                chsh: report.chsh,
                e00: e[0][0],
                params: *p,
                criterion_residual,
                evals,
            });
        }
        last = format!("CHSH {} vs curve {reference}, criterion residual {criterion_residual}", report.chsh);
    }
    Err(QuantumError::NoConvergence(last))
}
