//! Moment-matrix relaxations of the quantum set with an optional hidden
//! party, and bounds computed from them by bisection over feasibility.

mod bounds;
mod moment;
pub mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bounds::{
    chsh_expr, correlator_expr, delta_min_quantum, BisectionStep, moment_lmi, objectivity_expr, tsirelson_bound, verify_certificate,
    DeltaBound, LinearExpr, MomentConstraint, TsirelsonBound,
};
pub use moment::{
    build_moment_matrix, index_words, Generator, MomentMatrix, NpaLevel, OperatorWord, Party, Scenario, A0, A1, B0,
    B1, F,
};
pub use solver::{sdp_feasible, SolveOutcome, SolverConfig, Verdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NpaError {
    #[error("targets are infeasible at level {level}: {reason}")]
    Infeasible { level: NpaLevel, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("moment {0} does not appear at this level")]
    MissingMoment(String),
}

/// Solver and bisection settings for the bound computations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NpaConfig {
    pub solver: SolverConfig,
    /// Half-width of the band imposed on target equalities such as
    /// `CHSH = S` and `E00 = 1 − 2ε`.
    pub constraint_tol: f64,
    /// Half-width of the agreement band `E_xx ≥ 1 − tol` in
    /// [`tsirelson_bound`]; the bound grows like the square root of it.
    pub agreement_tol: f64,
    /// Final bracket width of every bisection.
    pub bisection_width: f64,
}

impl Default for NpaConfig {
    fn default() -> Self {
        Self { solver: SolverConfig::default(), constraint_tol: 1e-4, agreement_tol: 1e-6, bisection_width: 1e-3 }
    }
}
