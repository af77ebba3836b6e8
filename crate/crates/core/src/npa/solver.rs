//! Projection-splitting feasibility solver for small linear matrix inequalities.
//!
//! A problem is a set of real variables `y`, symmetric blocks whose entries
//! are `const + coef·y[v]` and must be PSD, box constraints `lo ≤ y[v] ≤ hi`,
//! and linear equalities `G y = h`. Feasibility is decided by
//! Douglas-Rachford splitting between
//!
//! - `D`: the affine image `{(C + A(y), y_box) : G y = h}`, projected in
//!   closed form (diagonal normal equations plus a small KKT correction), and
//! - `K`: PSD blocks times boxes, projected by eigenvalue clamping.
//!
//! Each iteration computes `a = P_D(z)`, `c = P_K(2a − z)`, `z += c − a`.
//! The iterate `a` satisfies every equality exactly, so the run is declared
//! feasible as soon as `a` is PSD and inside its boxes to tolerance.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Block entry `constant + coef·y[var]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub constant: f64,
    pub term: Option<(usize, f64)>,
}

impl Entry {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, term: None }
    }

    pub fn var(v: usize, coef: f64) -> Self {
        Self { constant: 0.0, term: Some((v, coef)) }
    }

    pub fn affine(c: f64, v: usize, coef: f64) -> Self {
        Self { constant: c, term: Some((v, coef)) }
    }
}

/// Symmetric block, stored densely row-major.
#[derive(Clone, Debug)]
pub struct Block {
    size: usize,
    entries: Vec<Entry>,
}

impl Block {
    /// # Panics
    /// If `entries` is not `size²` long or not symmetric.
    pub fn new(size: usize, entries: Vec<Entry>) -> Self {
        assert_eq!(entries.len(), size * size, "block entry count");
        for i in 0..size {
            for j in 0..i {
                assert_eq!(entries[i * size + j], entries[j * size + i], "block must be symmetric");
            }
        }
        Self { size, entries }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> Entry {
        self.entries[i * self.size + j]
    }

    fn evaluate(&self, y: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| {
            let e = self.entry(i, j);
            e.constant + e.term.map_or(0.0, |(v, c)| c * y[v])
        })
    }
}

/// Linear equality `Σ coef·y[v] = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Equality {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// `lo ≤ y[var] ≤ hi`; either side may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxBound {
    pub var: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Lmi {
    nvars: usize,
    blocks: Vec<Block>,
    equalities: Vec<Equality>,
    boxes: Vec<BoxBound>,
}

impl Lmi {
    pub fn new(nvars: usize) -> Self {
        Self { nvars, ..Self::default() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_var(&mut self) -> usize {
        self.nvars += 1;
        self.nvars - 1
    }

    pub fn add_block(&mut self, b: Block) {
        self.blocks.push(b);
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.equalities.push(Equality { terms, rhs });
    }

    pub fn add_box(&mut self, var: usize, lo: f64, hi: f64) {
        assert!(lo <= hi, "empty box");
        self.boxes.push(BoxBound { var, lo, hi });
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn equalities(&self) -> &[Equality] {
        &self.equalities
    }

    pub fn boxes(&self) -> &[BoxBound] {
        &self.boxes
    }

    /// Smallest eigenvalue over all blocks at `y`.
    pub fn min_eigenvalue(&self, y: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.evaluate(y).symmetric_eigenvalues().min())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest equality or box violation at `y`.
    pub fn constraint_residual(&self, y: &[f64]) -> f64 {
        let eq = self
            .equalities
            .iter()
            .map(|e| (e.terms.iter().map(|&(v, c)| c * y[v]).sum::<f64>() - e.rhs).abs())
            .fold(0.0, f64::max);
        let bx = self
            .boxes
            .iter()
            .map(|b| (b.lo - y[b.var]).max(y[b.var] - b.hi).max(0.0))
            .fold(0.0, f64::max);
        eq.max(bx)
    }

    /// Matrix value of block `k` at `y`.
    pub fn block_value(&self, k: usize, y: &[f64]) -> DMatrix<f64> {
        self.blocks[k].evaluate(y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Box tolerance for the feasibility test.
    pub tol: f64,
    /// Admissible negative eigenvalue in a certificate.
    pub psd_tol: f64,
    pub max_iters: usize,
    /// Window (iterations) over which a stalled residual flags infeasibility.
    pub patience: usize,
    /// Iterations between certificate checks.
    pub check_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-7, psd_tol: 1e-7, max_iters: 200_000, patience: 20_000, check_every: 5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Feasible,
    InfeasibleSuspected,
    MaxIters,
}

/// Splitting iterate, reusable as a warm start for a neighbouring problem
/// with the same structure.
#[derive(Clone, Debug)]
pub struct WarmStart {
    blocks: Vec<DMatrix<f64>>,
    boxes: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub verdict: Verdict,
    /// Variables at the last affine iterate; a certificate when feasible.
    pub y: Vec<f64>,
    pub iterations: usize,
    /// `‖c − a‖` at the last iteration.
    pub residual: f64,
    pub min_eigenvalue: f64,
    pub constraint_residual: f64,
    /// `‖c − a‖` sampled every `patience / 10` iterations.
    pub history: Vec<f64>,
    pub warm: WarmStart,
}

struct AffineProjector {
    weights: Vec<f64>,
    g: DMatrix<f64>,
    h: DVector<f64>,
    // W⁻¹ Gᵀ (G W⁻¹ Gᵀ)⁺
    correction: DMatrix<f64>,
}

impl AffineProjector {
    fn new(lmi: &Lmi) -> Self {
        let n = lmi.nvars;
        let mut weights = vec![0.0; n];
        for b in &lmi.blocks {
            for e in &b.entries {
                if let Some((v, c)) = e.term {
                    weights[v] += c * c;
                }
            }
        }
        for bx in &lmi.boxes {
            weights[bx.var] += 1.0;
        }
        for (v, w) in weights.iter_mut().enumerate() {
            // a variable seen only by equalities is pinned by them alone
            if *w == 0.0 {
                debug_assert!(lmi.equalities.iter().any(|e| e.terms.iter().any(|t| t.0 == v)), "variable {v} unused");
                *w = 1.0;
            }
        }
        let m = lmi.equalities.len();
        let mut g = DMatrix::zeros(m, n);
        let mut h = DVector::zeros(m);
        for (r, e) in lmi.equalities.iter().enumerate() {
            for &(v, c) in &e.terms {
                g[(r, v)] += c;
            }
            h[r] = e.rhs;
        }
        let winv_gt = DMatrix::from_fn(n, m, |i, j| g[(j, i)] / weights[i]);
        let correction = if m == 0 {
            winv_gt
        } else {
            let k = &g * &winv_gt;
            winv_gt * k.pseudo_inverse(1e-12).expect("pseudo-inverse of a finite Gram matrix")
        };
        Self { weights, g, h, correction }
    }

    fn project(&self, lmi: &Lmi, z: &WarmStart) -> Vec<f64> {
        let mut acc = vec![0.0; lmi.nvars];
        for (b, zb) in lmi.blocks.iter().zip(&z.blocks) {
            for i in 0..b.size {
                for j in 0..b.size {
                    let e = b.entries[i * b.size + j];
                    if let Some((v, c)) = e.term {
                        acc[v] += c * (zb[(i, j)] - e.constant);
                    }
                }
            }
        }
        for (bx, &t) in lmi.boxes.iter().zip(&z.boxes) {
            acc[bx.var] += t;
        }
        let ybar = DVector::from_iterator(lmi.nvars, acc.iter().zip(&self.weights).map(|(a, w)| a / w));
        if self.g.nrows() == 0 {
            return ybar.iter().copied().collect();
        }
        let viol = &self.g * &ybar - &self.h;
        let y = ybar - &self.correction * viol;
        y.iter().copied().collect()
    }
}

fn psd_project(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.min() >= 0.0 {
        return m.clone();
    }
    let clamped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&clamped) * v.transpose()
}

fn sqr_dist(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cold-start iterate for `lmi`.
pub fn cold_start(lmi: &Lmi) -> WarmStart {
    WarmStart {
        blocks: lmi.blocks.iter().map(|b| DMatrix::zeros(b.size, b.size)).collect(),
        boxes: vec![0.0; lmi.boxes.len()],
    }
}

/// Decides feasibility of `lmi` by Douglas-Rachford splitting.
///
/// `warm` must come from a problem with identical block sizes and box count.
pub fn sdp_feasible(lmi: &Lmi, cfg: &SolverConfig, warm: Option<&WarmStart>) -> SolveOutcome {
    let proj = AffineProjector::new(lmi);
    let mut z = match warm {
        Some(w) if w.blocks.len() == lmi.blocks.len() && w.boxes.len() == lmi.boxes.len() => w.clone(),
        _ => cold_start(lmi),
    };
    let sample = (cfg.patience / 10).max(1);
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut window_start = f64::INFINITY;
    let mut y = proj.project(lmi, &z);

    for k in 0..cfg.max_iters {
        y = proj.project(lmi, &z);
        let a_blocks: Vec<DMatrix<f64>> = lmi.blocks.iter().map(|b| b.evaluate(&y)).collect();
        let a_boxes: Vec<f64> = lmi.boxes.iter().map(|b| y[b.var]).collect();

        let mut sq = 0.0;
        let mut next_blocks = Vec::with_capacity(a_blocks.len());
        for (ab, zb) in a_blocks.iter().zip(&z.blocks) {
            let r = ab * 2.0 - zb;
            let c = psd_project(&r);
            sq += sqr_dist(&c, ab);
            next_blocks.push(zb + (c - ab));
        }
        let mut next_boxes = Vec::with_capacity(a_boxes.len());
        let mut box_ok = true;
        for ((bx, &a), &zt) in lmi.boxes.iter().zip(&a_boxes).zip(&z.boxes) {
            if a < bx.lo - cfg.tol || a > bx.hi + cfg.tol {
                box_ok = false;
            }
            let c = (2.0 * a - zt).clamp(bx.lo, bx.hi);
            sq += (c - a) * (c - a);
            next_boxes.push(zt + c - a);
        }
        residual = sq.sqrt();

        if box_ok && k % cfg.check_every == 0 {
            let lmin = a_blocks
                .iter()
                .map(|m| m.clone().symmetric_eigenvalues().min())
                .fold(f64::INFINITY, f64::min);
            if lmin >= -cfg.psd_tol {
                return SolveOutcome {
                    verdict: Verdict::Feasible,
                    constraint_residual: lmi.constraint_residual(&y),
                    y,
                    iterations: k,
                    residual,
                    min_eigenvalue: lmin,
                    history,
                    warm: z,
                };
            }
        }
        if k % sample == 0 {
            history.push(residual);
        }
        if k > 0 && k % cfg.patience == 0 {
            if residual > 10.0 * cfg.tol && residual > 0.99 * window_start {
                return SolveOutcome {
                    verdict: Verdict::InfeasibleSuspected,
                    min_eigenvalue: lmi.min_eigenvalue(&y),
                    constraint_residual: lmi.constraint_residual(&y),
                    y,
                    iterations: k,
                    residual,
                    history,
                    warm: z,
                };
            }
            window_start = residual;
        }
        z = WarmStart { blocks: next_blocks, boxes: next_boxes };
    }
    SolveOutcome {
        verdict: Verdict::MaxIters,
        min_eigenvalue: lmi.min_eigenvalue(&y),
        constraint_residual: lmi.constraint_residual(&y),
        y,
        iterations: cfg.max_iters,
        residual,
        history,
        warm: z,
    }
}
