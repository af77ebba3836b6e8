//! Stochastic Nelder-Mead: simplex moves with an adaptive random search
//! fallback, for noisy black-box objectives on a box.
//!
//! One iteration:
//!
//! 1. drop the worst points until `d + 1` remain;
//! 2. rank the simplex;
//! 3. reflect the worst point through the centroid of the others,
//!    `x_ref = (1 + α) x̄ − α x_max`;
//! 4. keep `x_ref` if `f_min ≤ f_ref < f_2nd`;
//! 5. if `f_ref < f_min`, try the expansion `x̄ + γ (x_ref − x̄)`;
//! 6. if `f_2nd ≤ f_ref < f_max`, try the outside contraction
//!    `x̄ + β (x_ref − x̄)`, kept if it is no worse than `x_ref`;
//! 7. if `f_ref ≥ f_max`, try the inside contraction `x̄ + β (x_max − x̄)`,
//!    kept if it is no worse than `x_max`;
//! 8. otherwise sample: with probability `P` uniformly over the box, else
//!    uniformly in a ball of radius `ε` around a random simplex point, until
//!    a point beats `f_max` or the draw cap is hit.
//!
//! `f_2nd` is the second-worst value. Every candidate is clamped to the box.
//! The ball radius is a fraction of each bound's width, so the ball is an
//! axis-aligned ellipsoid in parameter units.

pub mod protocol;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SnmError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnmConfig {
    /// Reflection coefficient `α > 0`.
    pub alpha: f64,
    /// Expansion coefficient `γ > 1`.
    pub gamma: f64,
    /// Contraction coefficient `β ∈ (0, 1)`.
    pub beta: f64,
    /// Probability `P` of a global draw in the random search.
    pub p_global: f64,
    /// Local search radius as a fraction of each bound's width.
    pub ars_radius: f64,
    /// Draws allowed per random-search invocation.
    pub ars_max_draws: usize,
    pub bounds: Vec<(f64, f64)>,
    pub max_evals: usize,
    pub seed: u64,
    /// Size of the initial Latin hypercube design (at least `d + 1`).
    pub initial_points: usize,
    /// Stop once the best value is strictly below this.
    pub target: Option<f64>,
    /// Stop once `f_max − f_min` falls below this (noiseless use)...
    pub f_tol: Option<f64>,
    /// ...and the simplex fits in a box of this relative width.
    pub x_tol: Option<f64>,
}

impl SnmConfig {
    /// Defaults `α = 1`, `γ = 2`, `β = 0.5`, `P = 0.1`, radius 5% of width.
    pub fn new(bounds: Vec<(f64, f64)>, max_evals: usize, seed: u64) -> Self {
        let d = bounds.len();
        Self {
            alpha: 1.0,
            gamma: 2.0,
            beta: 0.5,
            p_global: 0.1,
            ars_radius: 0.05,
            ars_max_draws: 50,
            bounds,
            max_evals,
            seed,
            initial_points: d + 1,
            target: None,
            f_tol: None,
            x_tol: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<(), SnmError> {
        let bad = |m: &str| Err(SnmError::InvalidConfig(m.to_string()));
        if self.bounds.is_empty() {
            return bad("no dimensions");
        }
        if self.bounds.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return bad("bounds must be finite, nonempty intervals");
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        if !(self.gamma > 1.0) {
            return bad("gamma must exceed 1");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.p_global) {
            return bad("p_global must lie in [0, 1]");
        }
        if !(self.ars_radius > 0.0) || self.ars_max_draws == 0 {
            return bad("random search needs a positive radius and draw cap");
        }
        Ok(())
    }

    fn clamp(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(lo, hi);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Initial,
    Reflection,
    Expansion,
    OutsideContraction,
    InsideContraction,
    ArsGlobal,
    ArsLocal,
    Shrink,
}

/// One objective evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub eval: usize,
    pub iteration: usize,
    pub kind: StepKind,
    pub x: Vec<f64>,
    pub value: f64,
    /// Whether the point entered the simplex.
    pub accepted: bool,
    /// `(f_min, f_2nd, f_max)` of the ranked simplex the move was made from.
    pub ranks: Option<[f64; 3]>,
    /// Reflection value the move was judged against.
    pub f_ref: Option<f64>,
    /// Centre of a local random-search ball.
    pub center: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnmResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    pub evals: usize,
    /// Final simplex, best first.
    pub simplex: Vec<(Vec<f64>, f64)>,
    pub trace: Vec<TraceEntry>,
    /// Simplex cardinality at the top of every iteration, after the discard.
    pub simplex_sizes: Vec<usize>,
}

/// `n` points whose coordinates each occupy `n` distinct equal-width strata.
pub fn latin_hypercube(bounds: &[(f64, f64)], n: usize, seed: u64) -> Vec<Vec<f64>> {
    latin_hypercube_with(bounds, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn latin_hypercube_with(bounds: &[(f64, f64)], n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; bounds.len()]; n];
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            strata.swap(i, rng.random_range(0..=i));
        }
        let w = (hi - lo) / n as f64;
        for (p, &s) in pts.iter_mut().zip(&strata) {
            p[k] = lo + w * (s as f64 + rng.random::<f64>());
        }
    }
    pts
}

struct Run<'a, F> {
    f: F,
    cfg: &'a SnmConfig,
    rng: ChaCha8Rng,
    trace: Vec<TraceEntry>,
    evals: usize,
    best: (Vec<f64>, f64),
    iteration: usize,
}

impl<F: FnMut(&[f64]) -> f64> Run<'_, F> {
    fn budget_left(&self) -> bool {
        self.evals < self.cfg.max_evals
    }

    fn eval(&mut self, x: Vec<f64>, kind: StepKind, ranks: Option<[f64; 3]>) -> f64 {
        let v = (self.f)(&x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < self.best.1 || self.best.0.is_empty() {
            self.best = (x.clone(), v);
        }
        self.trace.push(TraceEntry {
            eval: self.evals,
            iteration: self.iteration,
            kind,
            x,
            value: v,
            accepted: false,
            ranks,
            f_ref: None,
            center: None,
        });
        self.evals += 1;
        v
    }

    fn mark(&mut self, accepted: bool, f_ref: Option<f64>) {
        let last = self.trace.last_mut().expect("an evaluation was recorded");
        last.accepted = accepted;
        last.f_ref = f_ref;
    }

    fn done(&self, simplex: &[(Vec<f64>, f64)]) -> bool {
        if !self.budget_left() {
            return true;
        }
        if let Some(t) = self.cfg.target {
            if self.best.1 < t {
                return true;
            }
        }
        if let (Some(ft), Some(xt)) = (self.cfg.f_tol, self.cfg.x_tol) {
            let spread = simplex.last().unwrap().1 - simplex[0].1;
            let width = (0..self.cfg.dim())
                .map(|k| {
                    let (lo, hi) = self.cfg.bounds[k];
                    let (mn, mx) = simplex
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0[k]), b.max(p.0[k])));
                    (mx - mn) / (hi - lo)
                })
                .fold(0.0, f64::max);
            if spread <= ft && width <= xt {
                return true;
            }
        }
        false
    }

    fn ars(&mut self, simplex: &[(Vec<f64>, f64)], ranks: [f64; 3]) -> Option<(Vec<f64>, f64)> {
        let d = self.cfg.dim();
        for _ in 0..self.cfg.ars_max_draws {
            if !self.budget_left() {
                return None;
            }
            let (x, kind, center) = if self.rng.random::<f64>() < self.cfg.p_global {
                let x: Vec<f64> = self.cfg.bounds.iter().map(|&(lo, hi)| self.rng.random_range(lo..=hi)).collect();
                (x, StepKind::ArsGlobal, None)
            } else {
                let c = simplex[self.rng.random_range(0..simplex.len())].0.clone();
                let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut self.rng)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                let r = self.cfg.ars_radius * self.rng.random::<f64>().powf(1.0 / d as f64);
                let mut x: Vec<f64> = (0..d)
                    .map(|k| {
                        let (lo, hi) = self.cfg.bounds[k];
                        c[k] + r * (hi - lo) * dir[k] / norm
                    })
                    .collect();
                self.cfg.clamp(&mut x);
                (x, StepKind::ArsLocal, Some(c))
            };
            let v = self.eval(x.clone(), kind, Some(ranks));
            let ok = v < ranks[2];
            self.mark(ok, None);
            self.trace.last_mut().unwrap().center = center;
            if ok {
                return Some((x, v));
            }
        }
        None
    }
}

fn rank(simplex: &mut [(Vec<f64>, f64)]) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b − a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimizes `f` over `cfg.bounds` from a Latin hypercube start.
pub fn snm_minimize(f: impl FnMut(&[f64]) -> f64, cfg: &SnmConfig) -> Result<SnmResult, SnmError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = latin_hypercube_with(&cfg.bounds, cfg.initial_points.max(cfg.dim() + 1), &mut rng);
    minimize(f, cfg, start, rng, true)
}

/// Minimizes `f` starting from the given points (clamped to the box).
pub fn snm_minimize_from(
    f: impl FnMut(&[f64]) -> f64,
    cfg: &SnmConfig,
    start: Vec<Vec<f64>>,
) -> Result<SnmResult, SnmError> {
    cfg.validate()?;
    if start.is_empty() || start.iter().any(|p| p.len() != cfg.dim()) {
        return Err(SnmError::InvalidConfig("start points must match the dimension".into()));
    }
    minimize(f, cfg, start, ChaCha8Rng::seed_from_u64(cfg.seed), true)
}

/// Deterministic Nelder-Mead with shrink steps and no random search, from the
/// same Latin hypercube start; a baseline for noisy objectives.
pub fn nelder_mead(f: impl FnMut(&[f64]) -> f64, cfg: &SnmConfig) -> Result<SnmResult, SnmError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = latin_hypercube_with(&cfg.bounds, cfg.initial_points.max(cfg.dim() + 1), &mut rng);
    minimize(f, cfg, start, rng, false)
}

/// Simplex of the incumbent plus one step of `frac` of the width along each
/// axis (reflected inward at the upper bound).
pub fn axis_simplex(x: &[f64], bounds: &[(f64, f64)], frac: f64) -> Vec<Vec<f64>> {
    let mut pts = vec![x.to_vec()];
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        let mut p = x.to_vec();
        let step = frac * (hi - lo);
        p[k] = if p[k] + step <= hi { p[k] + step } else { p[k] - step };
        pts.push(p);
    }
    pts
}

fn minimize<F: FnMut(&[f64]) -> f64>(
    f: F,
    cfg: &SnmConfig,
    start: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
    stochastic: bool,
) -> Result<SnmResult, SnmError> {
    let d = cfg.dim();
    let mut run = Run { f, cfg, rng, trace: Vec::new(), evals: 0, best: (Vec::new(), f64::INFINITY), iteration: 0 };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::new();
    for mut x in start {
        if !run.budget_left() {
            break;
        }
        cfg.clamp(&mut x);
        let v = run.eval(x.clone(), StepKind::Initial, None);
        run.mark(true, None);
        simplex.push((x, v));
    }
    let mut sizes = Vec::new();

    while simplex.len() > d && !run.done(&{
        let mut s = simplex.clone();
        rank(&mut s);
        s.truncate(d + 1);
        s
    }) {
        run.iteration += 1;
        rank(&mut simplex);
        simplex.truncate(d + 1);
        sizes.push(simplex.len());
        let f_min = simplex[0].1;
        let f_2nd = simplex[d - 1].1;
        let f_max = simplex[d].1;
        let ranks = [f_min, f_2nd, f_max];
        let x_max = simplex[d].0.clone();
        let mut bar = vec![0.0; d];
        for (p, _) in &simplex[..d] {
            for (b, v) in bar.iter_mut().zip(p) {
                *b += v / d as f64;
            }
        }

        let mut x_ref = affine(&bar, &x_max, -cfg.alpha);
        cfg.clamp(&mut x_ref);
        let f_ref = run.eval(x_ref.clone(), StepKind::Reflection, Some(ranks));

        if f_min <= f_ref && f_ref < f_2nd {
            run.mark(true, None);
            simplex.push((x_ref, f_ref));
            continue;
        }
        if f_ref < f_min {
            if !run.budget_left() {
                run.mark(true, None);
                simplex.push((x_ref, f_ref));
                break;
            }
            let mut x_exp = affine(&bar, &x_ref, cfg.gamma);
            cfg.clamp(&mut x_exp);
            let f_exp = run.eval(x_exp.clone(), StepKind::Expansion, Some(ranks));
            if f_exp < f_ref {
                run.mark(true, Some(f_ref));
                simplex.push((x_exp, f_exp));
            } else {
                run.mark(false, Some(f_ref));
                // the reflection is the point that enters
                let idx = run.trace.len() - 2;
                run.trace[idx].accepted = true;
                simplex.push((x_ref, f_ref));
            }
            continue;
        }
        if !run.budget_left() {
            break;
        }
        let contracted = if f_ref < f_max {
            let mut x_c = affine(&bar, &x_ref, cfg.beta);
            cfg.clamp(&mut x_c);
            let f_c = run.eval(x_c.clone(), StepKind::OutsideContraction, Some(ranks));
            let ok = f_c <= f_ref;
            run.mark(ok, Some(f_ref));
            ok.then_some((x_c, f_c))
        } else {
            let mut x_c = affine(&bar, &x_max, cfg.beta);
            cfg.clamp(&mut x_c);
            let f_c = run.eval(x_c.clone(), StepKind::InsideContraction, Some(ranks));
            let ok = f_c <= f_max;
            run.mark(ok, Some(f_ref));
            ok.then_some((x_c, f_c))
        };
        if let Some(p) = contracted {
            simplex.push(p);
            continue;
        }
        if stochastic {
            if let Some(p) = run.ars(&simplex, ranks) {
                simplex.push(p);
            }
        } else {
            let x0 = simplex[0].0.clone();
            for i in 1..simplex.len() {
                if !run.budget_left() {
                    break;
                }
                let x = affine(&x0, &simplex[i].0, cfg.beta);
                let v = run.eval(x.clone(), StepKind::Shrink, Some(ranks));
                run.mark(true, None);
                simplex[i] = (x, v);
            }
        }
    }
    rank(&mut simplex);
    simplex.truncate(d + 1);
    Ok(SnmResult {
        best_x: run.best.0,
        best_value: run.best.1,
        evals: run.evals,
        simplex,
        trace: run.trace,
        simplex_sizes: sizes,
    })
}
