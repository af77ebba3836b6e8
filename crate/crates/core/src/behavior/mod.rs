//! Conditional outcome distributions and the objectivity witness.
//!
//! A [`Behavior`] is `p(b1,b2|x1,x2)` with binary outcomes and settings,
//! stored as `p[b1][b2][x1][x2]`. An [`ExtendedBehavior`] adds a hidden
//! outcome `a` and supports any number of observers:
//! `p(a,b1..bn|x1..xn)`, indexed `[a][b1]..[bn][x1]..[xn]`.
//!
//! Setting `0` is the starred setting `x_i^*` of every observer.

pub mod lp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Validity tolerance for constructed tensors.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Default tolerance for no-signalling checks.
pub const NO_SIGNALLING_TOL: f64 = 1e-10;
/// Default tolerance for LHV reconstruction.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BehaviorError {
    #[error("entry {value} outside [0, 1]")]
    InvalidProbability { value: f64 },
    #[error("setting block sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("expected {expected} entries, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("unsupported scenario: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("agreement violated: {0}")]
    AgreementViolated(String),
    #[error("reconstruction mismatch: max-norm error {error:.3e} exceeds {tol:.1e}")]
    ReconstructionMismatch { error: f64, tol: f64 },
    #[error("no no-signalling behavior satisfies the constraints")]
    Infeasible,
}

type Tensor = [[[[f64; 2]; 2]; 2]; 2];

/// `p(b1,b2|x1,x2)` for two observers with binary settings and outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BehaviorFile", into = "BehaviorFile")]
pub struct Behavior {
    p: Tensor,
}

#[derive(Clone, Serialize, Deserialize)]
struct BehaviorFile {
    settings: usize,
    outcomes: usize,
    p: Tensor,
}

impl TryFrom<BehaviorFile> for Behavior {
    type Error = BehaviorError;

    fn try_from(f: BehaviorFile) -> Result<Self, Self::Error> {
        if f.settings != 2 || f.outcomes != 2 {
            return Err(BehaviorError::Unsupported(format!(
                "{} settings, {} outcomes",
                f.settings, f.outcomes
            )));
        }
        Behavior::new(f.p)
    }
}

impl From<Behavior> for BehaviorFile {
    fn from(b: Behavior) -> Self {
        BehaviorFile { settings: 2, outcomes: 2, p: b.p }
    }
}

fn check_entry(v: f64, tol: f64) -> Result<(), BehaviorError> {
    if !v.is_finite() || v < -tol || v > 1.0 + tol {
        return Err(BehaviorError::InvalidProbability { value: v });
    }
    Ok(())
}

impl Behavior {
    /// Validates entries and per-setting normalization at [`CONSTRUCTION_TOL`].
    pub fn new(p: [[[[f64; 2]; 2]; 2]; 2]) -> Result<Self, BehaviorError> {
        Self::with_tol(p, CONSTRUCTION_TOL)
    }

    pub fn with_tol(p: [[[[f64; 2]; 2]; 2]; 2], tol: f64) -> Result<Self, BehaviorError> {
        for x1 in 0..2 {
            for x2 in 0..2 {
                let mut sum = 0.0;
                for b1 in 0..2 {
                    for b2 in 0..2 {
                        check_entry(p[b1][b2][x1][x2], tol)?;
                        sum += p[b1][b2][x1][x2];
                    }
                }
                if (sum - 1.0).abs() > tol {
                    return Err(BehaviorError::NotNormalized { sum });
                }
            }
        }
        Ok(Self { p })
    }

    /// Builds from `f(b1, b2, x1, x2)`.
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Result<Self, BehaviorError> {
        let mut p = [[[[0.0; 2]; 2]; 2]; 2];
        for (b1, pb1) in p.iter_mut().enumerate() {
            for (b2, pb2) in pb1.iter_mut().enumerate() {
                for (x1, px1) in pb2.iter_mut().enumerate() {
                    for (x2, v) in px1.iter_mut().enumerate() {
                        *v = f(b1, b2, x1, x2);
                    }
                }
            }
        }
        Self::new(p)
    }

    pub fn uniform() -> Self {
        Self { p: [[[[0.25; 2]; 2]; 2]; 2] }
    }

    pub fn p(&self, b1: usize, b2: usize, x1: usize, x2: usize) -> f64 {
        self.p[b1][b2][x1][x2]
    }

    pub fn tensor(&self) -> &[[[[f64; 2]; 2]; 2]; 2] {
        &self.p
    }

    /// `p(b1|x1,x2)`.
    pub fn marginal_first(&self, b1: usize, x1: usize, x2: usize) -> f64 {
        self.p[b1][0][x1][x2] + self.p[b1][1][x1][x2]
    }

    /// `p(b2|x1,x2)`.
    pub fn marginal_second(&self, b2: usize, x1: usize, x2: usize) -> f64 {
        self.p[0][b2][x1][x2] + self.p[1][b2][x1][x2]
    }

    /// `p(b1 = b2 | x1, x2)`.
    pub fn agreement(&self, x1: usize, x2: usize) -> f64 {
        self.p[0][0][x1][x2] + self.p[1][1][x1][x2]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for b1 in 0..2 {
            for b2 in 0..2 {
                for x1 in 0..2 {
                    for x2 in 0..2 {
                        d = d.max((self.p[b1][b2][x1][x2] - other.p[b1][b2][x1][x2]).abs());
                    }
                }
            }
        }
        d
    }

    /// Relabels outcomes and settings. `flip1[x]` flips observer 1's outcome
    /// at setting `x`; `swap1` exchanges observer 1's settings; same for 2.
    pub fn relabel(&self, flip1: [bool; 2], flip2: [bool; 2], swap1: bool, swap2: bool) -> Self {
        let mut p = [[[[0.0; 2]; 2]; 2]; 2];
        for b1 in 0..2 {
            for b2 in 0..2 {
                for x1 in 0..2 {
                    for x2 in 0..2 {
                        let nx1 = if swap1 { 1 - x1 } else { x1 };
                        let nx2 = if swap2 { 1 - x2 } else { x2 };
                        let nb1 = if flip1[x1] { 1 - b1 } else { b1 };
                        let nb2 = if flip2[x2] { 1 - b2 } else { b2 };
                        p[nb1][nb2][nx1][nx2] = self.p[b1][b2][x1][x2];
                    }
                }
            }
        }
        Self { p }
    }
}

/// Witness summary for a [`Behavior`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// `E[x1][x2] = Σ (−1)^{b1+b2} p(b1,b2|x1,x2)`.
    pub correlators: [[f64; 2]; 2],
    /// `E00 + E01 − E10 + E11`.
    pub chsh: f64,
    /// `(1 − E00)/2`.
    pub epsilon: f64,
    /// `max(ε/2, (chsh − 2 + 2ε)/4)`.
    pub delta_ns_lower: f64,
}

pub fn correlator(b: &Behavior, x1: usize, x2: usize) -> f64 {
    let mut e = 0.0;
    for b1 in 0..2 {
        for b2 in 0..2 {
            let s = if (b1 + b2) % 2 == 0 { 1.0 } else { -1.0 };
            e += s * b.p[b1][b2][x1][x2];
        }
    }
    e
}

/// CHSH combination `E00 + E01 − E10 + E11` of a correlator table.
pub fn chsh_of(e: &[[f64; 2]; 2]) -> f64 {
    e[0][0] + e[0][1] - e[1][0] + e[1][1]
}

/// Lower bound on `δ` implied by the witness value and agreement.
pub fn delta_ns_lower(chsh: f64, epsilon: f64) -> f64 {
    (epsilon / 2.0).max((chsh - 2.0 + 2.0 * epsilon) / 4.0)
}

pub fn chsh_witness(b: &Behavior) -> WitnessReport {
    let correlators = [[correlator(b, 0, 0), correlator(b, 0, 1)], [correlator(b, 1, 0), correlator(b, 1, 1)]];
    let chsh = chsh_of(&correlators);
    let epsilon = (1.0 - correlators[0][0]) / 2.0;
    WitnessReport { correlators, chsh, epsilon, delta_ns_lower: delta_ns_lower(chsh, epsilon) }
}

pub fn is_no_signalling(b: &Behavior, tol: f64) -> bool {
    for v in 0..2 {
        for x in 0..2 {
            if (b.marginal_first(v, x, 0) - b.marginal_first(v, x, 1)).abs() > tol {
                return false;
            }
            if (b.marginal_second(v, 0, x) - b.marginal_second(v, 1, x)).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// `p(b1,b2|x1,x2) = ½ δ_{b1⊕b2, x1(1−x2)}`: anticorrelated only at `(1,0)`.
pub fn make_pr_box() -> Behavior {
    let mut p = [[[[0.0; 2]; 2]; 2]; 2];
    for b1 in 0..2 {
        for b2 in 0..2 {
            for x1 in 0..2 {
                for x2 in 0..2 {
                    if b1 ^ b2 == x1 * (1 - x2) {
                        p[b1][b2][x1][x2] = 0.5;
                    }
                }
            }
        }
    }
    Behavior { p }
}

/// `p(a, b1..bn | x1..xn)` with binary hidden outcome, outcomes and settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedBehavior {
    n: usize,
    p: Vec<f64>,
}

/// Largest supported observer count (tensor size `2^(1+2n)`).
pub const MAX_OBSERVERS: usize = 10;

impl ExtendedBehavior {
    /// Validates a flat row-major tensor of length `2^(1+2n)`.
    pub fn new(n: usize, p: Vec<f64>) -> Result<Self, BehaviorError> {
        Self::with_tol(n, p, CONSTRUCTION_TOL)
    }

    pub fn with_tol(n: usize, p: Vec<f64>, tol: f64) -> Result<Self, BehaviorError> {
        if n == 0 || n > MAX_OBSERVERS {
            return Err(BehaviorError::Unsupported(format!("{n} observers")));
        }
        let expected = 1usize << (1 + 2 * n);
        if p.len() != expected {
            return Err(BehaviorError::Shape { expected, found: p.len() });
        }
        let e = Self { n, p };
        for &v in &e.p {
            check_entry(v, tol)?;
        }
        for x in 0..e.settings_count() {
            let sum: f64 = (0..2).flat_map(|a| (0..e.outcomes_count()).map(move |b| (a, b))).map(|(a, b)| e.get_bits(a, b, x)).sum();
            if (sum - 1.0).abs() > tol {
                return Err(BehaviorError::NotNormalized { sum });
            }
        }
        Ok(e)
    }

    /// Builds from `f(a, b, x)` where `b` and `x` hold one entry per observer.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, &[usize], &[usize]) -> f64) -> Result<Self, BehaviorError> {
        if n == 0 || n > MAX_OBSERVERS {
            return Err(BehaviorError::Unsupported(format!("{n} observers")));
        }
        let m = 1usize << n;
        let mut p = Vec::with_capacity(2 * m * m);
        let mut b = vec![0; n];
        let mut x = vec![0; n];
        for a in 0..2 {
            for bb in 0..m {
                unpack(bb, &mut b);
                for xx in 0..m {
                    unpack(xx, &mut x);
                    p.push(f(a, &b, &x));
                }
            }
        }
        Self::new(n, p)
    }

    pub fn observers(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    fn outcomes_count(&self) -> usize {
        1 << self.n
    }

    fn settings_count(&self) -> usize {
        1 << self.n
    }

    /// Entry with outcomes and settings packed as bit strings, observer 1 in
    /// the most significant bit.
    pub fn get_bits(&self, a: usize, b: usize, x: usize) -> f64 {
        let m = 1usize << self.n;
        self.p[(a * m + b) * m + x]
    }

    pub fn get(&self, a: usize, b: &[usize], x: &[usize]) -> f64 {
        self.get_bits(a, pack(b), pack(x))
    }

    /// `p(a | x)`.
    pub fn hidden_marginal(&self, a: usize, x: usize) -> f64 {
        (0..self.outcomes_count()).map(|b| self.get_bits(a, b, x)).sum()
    }

    /// For every observer `j`, summing out `b_j` leaves a distribution that
    /// does not depend on `x_j`.
    pub fn is_no_signalling(&self, tol: f64) -> bool {
        let n = self.n;
        let m = 1usize << n;
        for j in 0..n {
            let bit = 1 << (n - 1 - j);
            for a in 0..2 {
                for b in (0..m).filter(|b| b & bit == 0) {
                    for x in (0..m).filter(|x| x & bit == 0) {
                        let m0 = self.get_bits(a, b, x) + self.get_bits(a, b | bit, x);
                        let m1 = self.get_bits(a, b, x | bit) + self.get_bits(a, b | bit, x | bit);
                        if (m0 - m1).abs() > tol {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// `p(a | x)` independent of the settings.
    pub fn is_no_superdeterministic(&self, tol: f64) -> bool {
        let p0 = self.hidden_marginal(0, 0);
        (1..self.settings_count()).all(|x| (self.hidden_marginal(0, x) - p0).abs() <= tol)
    }

    /// Observer-1/2 behavior obtained by summing out `a` (requires `n = 2`).
    pub fn observed(&self) -> Result<Behavior, BehaviorError> {
        if self.n != 2 {
            return Err(BehaviorError::Unsupported(format!("{} observers, witness needs 2", self.n)));
        }
        Behavior::from_fn(|b1, b2, x1, x2| {
            (0..2).map(|a| self.get(a, &[b1, b2], &[x1, x2])).sum()
        })
    }
}

fn pack(bits: &[usize]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1))
}

fn unpack(mut v: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = v & 1;
        v >>= 1;
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Nested {
    Leaf(f64),
    Node(Vec<Nested>),
}

#[derive(Serialize, Deserialize)]
struct ExtendedFile {
    n: usize,
    settings: usize,
    outcomes: usize,
    p: Nested,
}

fn nest(flat: &[f64], depth: usize) -> Nested {
    if depth == 0 {
        return Nested::Leaf(flat[0]);
    }
    let half = flat.len() / 2;
    Nested::Node(vec![nest(&flat[..half], depth - 1), nest(&flat[half..], depth - 1)])
}

fn flatten(node: &Nested, depth: usize, out: &mut Vec<f64>) -> Result<(), BehaviorError> {
    match (node, depth) {
        (Nested::Leaf(v), 0) => {
            out.push(*v);
            Ok(())
        }
        (Nested::Node(children), d) if d > 0 && children.len() == 2 => {
            for c in children {
                flatten(c, d - 1, out)?;
            }
            Ok(())
        }
        _ => Err(BehaviorError::Unsupported("tensor nesting does not match n".into())),
    }
}

impl Serialize for ExtendedBehavior {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ExtendedFile { n: self.n, settings: 2, outcomes: 2, p: nest(&self.p, 1 + 2 * self.n) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtendedBehavior {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let f = ExtendedFile::deserialize(d)?;
        if f.settings != 2 || f.outcomes != 2 || f.n == 0 || f.n > MAX_OBSERVERS {
            return Err(serde::de::Error::custom("unsupported scenario"));
        }
        let mut flat = Vec::new();
        flatten(&f.p, 1 + 2 * f.n, &mut flat).map_err(serde::de::Error::custom)?;
        ExtendedBehavior::new(f.n, flat).map_err(serde::de::Error::custom)
    }
}

/// Smallest `δ` such that every observer's starred outcome matches `a` with
/// probability at least `1 − δ`; the worst observer sets the value.
pub fn delta_objectivity_violation(e: &ExtendedBehavior) -> f64 {
    let n = e.n;
    let m = 1usize << n;
    (0..n)
        .map(|i| {
            let bit = 1 << (n - 1 - i);
            let hit: f64 = (0..2)
                .map(|a| {
                    (0..m)
                        .filter(|b| ((b & bit != 0) as usize) == a)
                        .map(|b| e.get_bits(a, b, 0))
                        .sum::<f64>()
                })
                .sum();
            1.0 - hit
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `Σ_a p(a, b1 = … = bn = a | starred settings)`.
pub fn global_agreement(e: &ExtendedBehavior) -> f64 {
    let all = (1usize << e.n) - 1;
    e.get_bits(0, 0, 0) + e.get_bits(1, all, 0)
}

/// Distribution saturating the local-to-global agreement bound.
///
/// For a setting tuple with `k` starred observers, the starred outcomes follow
/// `p_δ(a, b_S)` (`(1−kδ)/2` if all equal `a`, `δ/2` if exactly one differs,
/// `0` otherwise) and the unstarred outcomes are uniform.
pub fn make_tightness_distribution(n: usize, delta: f64) -> Result<ExtendedBehavior, BehaviorError> {
    if n == 0 || n > MAX_OBSERVERS {
        return Err(BehaviorError::Unsupported(format!("{n} observers")));
    }
    if !(delta >= 0.0) || n as f64 * delta > 1.0 + CONSTRUCTION_TOL {
        return Err(BehaviorError::InvalidArgument(format!(
            "n·δ = {} must lie in [0, 1]",
            n as f64 * delta
        )));
    }
    ExtendedBehavior::from_fn(n, |a, b, x| {
        let starred: Vec<usize> = (0..n).filter(|&i| x[i] == 0).collect();
        let k = starred.len();
        let mismatches = starred.iter().filter(|&&i| b[i] != a).count();
        let pd = match mismatches {
            0 => (1.0 - k as f64 * delta) / 2.0,
            1 => delta / 2.0,
            _ => 0.0,
        };
        pd * 0.5f64.powi((n - k) as i32)
    })
}

/// Deterministic-response model rebuilt from a fully agreeing behavior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LhvModel {
    /// `p̃(a0, a1)`: joint distribution of the responses to settings 0 and 1.
    pub hidden: [[f64; 2]; 2],
    /// `Σ δ_{b1,a_{x1}} δ_{b2,a_{x2}} p̃(a0,a1)`.
    pub behavior: Behavior,
    /// Max-norm distance between `behavior` and the input.
    pub error: f64,
}

/// Rebuilds `b` from a local hidden-variable model with `p̃(a0,a1) = p(a0,a1|0,1)`.
///
/// `tol` bounds both the agreement deficit `1 − p(b1=b2|x,x)` and the
/// admissible reconstruction error.
pub fn lhv_reconstruct(b: &Behavior, tol: f64) -> Result<LhvModel, BehaviorError> {
    if !is_no_signalling(b, tol.max(NO_SIGNALLING_TOL)) {
        return Err(BehaviorError::AgreementViolated("behavior is signalling".into()));
    }
    for x in 0..2 {
        let agree = b.agreement(x, x);
        if agree < 1.0 - tol {
            return Err(BehaviorError::AgreementViolated(format!("p(b1=b2|{x},{x}) = {agree}")));
        }
    }
    let hidden = [[b.p(0, 0, 0, 1), b.p(0, 1, 0, 1)], [b.p(1, 0, 0, 1), b.p(1, 1, 0, 1)]];
    let mut p = [[[[0.0; 2]; 2]; 2]; 2];
    for (a0, row) in hidden.iter().enumerate() {
        for (a1, &w) in row.iter().enumerate() {
            let resp = [a0, a1];
            for x1 in 0..2 {
                for x2 in 0..2 {
                    p[resp[x1]][resp[x2]][x1][x2] += w;
                }
            }
        }
    }
    let rebuilt = Behavior::with_tol(p, tol.max(CONSTRUCTION_TOL))?;
    let error = rebuilt.max_abs_diff(b);
    let limit = tol.max(RECONSTRUCTION_TOL);
    if error > limit {
        return Err(BehaviorError::ReconstructionMismatch { error, tol: limit });
    }
    Ok(LhvModel { hidden, behavior: rebuilt, error })
}

/// Exact minimal `δ` over no-signalling, no-superdeterministic extended
/// behaviors with `E00 = 1 − 2ε` and `CHSH = chsh_target`.
///
/// Variables are the 32 entries `p(a,b1,b2|x1,x2)`, `δ`, and one slack per
/// objectivity inequality; the problem is solved by the dense simplex in
/// [`lp`].
pub fn delta_min_ns_lp(chsh_target: f64, epsilon: f64) -> Result<f64, BehaviorError> {
    if !(chsh_target.abs() <= 4.0) || !(0.0..=0.5).contains(&epsilon) {
        return Err(BehaviorError::InvalidArgument(format!(
            "need |chsh| ≤ 4 and ε ∈ [0, 1/2], got ({chsh_target}, {epsilon})"
        )));
    }
    let idx = |a: usize, b1: usize, b2: usize, x1: usize, x2: usize| (((a * 2 + b1) * 2 + b2) * 2 + x1) * 2 + x2;
    const DELTA: usize = 32;
    const NV: usize = 35;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    let bits3 = || (0..8).map(|k| (k >> 2, (k >> 1) & 1, k & 1));

    for (x1, x2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut r = vec![0.0; NV];
        for (a, b1, b2) in bits3() {
            r[idx(a, b1, b2, x1, x2)] = 1.0;
        }
        rows.push(r);
        rhs.push(1.0);
    }
    for (x1, x2) in [(0, 1), (1, 0), (1, 1)] {
        let mut r = vec![0.0; NV];
        for (b1, b2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            r[idx(0, b1, b2, x1, x2)] += 1.0;
            r[idx(0, b1, b2, 0, 0)] -= 1.0;
        }
        rows.push(r);
        rhs.push(0.0);
    }
    for (a, b, x) in bits3() {
        let mut r1 = vec![0.0; NV];
        let mut r2 = vec![0.0; NV];
        for o in 0..2 {
            // observer 1's marginal may not depend on x2
            r1[idx(a, b, o, x, 0)] += 1.0;
            r1[idx(a, b, o, x, 1)] -= 1.0;
            // observer 2's marginal may not depend on x1
            r2[idx(a, o, b, 0, x)] += 1.0;
            r2[idx(a, o, b, 1, x)] -= 1.0;
        }
        rows.push(r1);
        rows.push(r2);
        rhs.push(0.0);
        rhs.push(0.0);
    }
    let corr = |x1: usize, x2: usize, s: f64, r: &mut Vec<f64>| {
        for (a, b1, b2) in bits3() {
            let sign = if b1 == b2 { 1.0 } else { -1.0 };
            r[idx(a, b1, b2, x1, x2)] += s * sign;
        }
    };
    let mut r = vec![0.0; NV];
    corr(0, 0, 1.0, &mut r);
    rows.push(r);
    rhs.push(1.0 - 2.0 * epsilon);
    let mut r = vec![0.0; NV];
    corr(0, 0, 1.0, &mut r);
    corr(0, 1, 1.0, &mut r);
    corr(1, 0, -1.0, &mut r);
    corr(1, 1, 1.0, &mut r);
    rows.push(r);
    rhs.push(chsh_target);
    for observer in 0..2 {
        // Σ_a p(a, b_i = a | 0, 0) + δ − s = 1
        let mut r = vec![0.0; NV];
        for a in 0..2 {
            for o in 0..2 {
                let (b1, b2) = if observer == 0 { (a, o) } else { (o, a) };
                r[idx(a, b1, b2, 0, 0)] += 1.0;
            }
        }
        r[DELTA] = 1.0;
        r[DELTA + 1 + observer] = -1.0;
        rows.push(r);
        rhs.push(1.0);
    }
    let mut c = vec![0.0; NV];
    c[DELTA] = 1.0;
    match lp::solve(&c, &rows, &rhs) {
        lp::LpOutcome::Optimal { objective, .. } => Ok(objective),
        lp::LpOutcome::Infeasible => Err(BehaviorError::Infeasible),
        lp::LpOutcome::Unbounded => unreachable!("δ is bounded below by zero"),
    }
}
