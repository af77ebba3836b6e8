//! Certification, bounding and simulation of non-objective measurement
//! statistics in the two-observer environment scenario.
//!
//! The crate is organised around five modules:
//!
//! - [`behavior`]: conditional distributions `p(b1,b2|x1,x2)`, the
//!   hidden-outcome extension `p(a,b1..bn|x1..xn)`, the `CHSH_{δ,ε}` witness
//!   and the exact no-signalling bound on `δ` (dense simplex LP).
//! - [`quantum`]: small dense complex linear algebra, Born-rule behaviors,
//!   guessing probabilities and the swap-isometry self-test.
//! - [`photonics`]: a simulated Sagnac dephasing source with waveplate
//!   measurements and Poissonian coincidence counts.
//! - [`snm`]: Stochastic Nelder-Mead with adaptive random search, and the
//!   two-stage ab-initio protocol built on it.
//! - [`npa`]: moment-matrix relaxations with a hidden party and a
//!   projection-splitting SDP feasibility solver.
//!
//! Settings are binary and the "starred" setting of every observer is index 0.

pub mod behavior;
pub mod npa;
pub mod photonics;
pub mod quantum;
pub mod snm;

pub use behavior::{Behavior, BehaviorError, ExtendedBehavior, WitnessReport};
pub use npa::{MomentMatrix, NpaError, NpaLevel};
pub use photonics::{ExperimentModel, WaveplateSetting};
pub use quantum::{CMatrix, QuantumError, QuantumRealization, SelfTestReport};
pub use snm::{SnmConfig, SnmResult};
