//! Linear moment expressions and bisection bounds.

use serde::Serialize;

use super::moment::{build_moment_matrix, Generator, MomentMatrix, NpaLevel, Scenario, A0, A1, B0, B1, F};
use super::solver::{sdp_feasible, Block, Entry, Lmi, SolveOutcome, Verdict, WarmStart};
use super::{NpaConfig, NpaError};
use crate::behavior::delta_min_ns_lp;
use crate::quantum::{hermitian_eigen, CMatrix};

/// `constant + Σ coef·⟨word⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearExpr {
    pub constant: f64,
    pub terms: Vec<(Vec<Generator>, f64)>,
}

impl LinearExpr {
    fn add(mut self, other: LinearExpr, s: f64) -> Self {
        self.constant += s * other.constant;
        self.terms.extend(other.terms.into_iter().map(|(w, c)| (w, s * c)));
        self
    }

    /// Resolves words to moment classes.
    fn resolve(&self, m: &MomentMatrix) -> Result<(f64, Vec<(usize, f64)>), NpaError> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (w, c) in &self.terms {
            let id = m.class_of(w).ok_or_else(|| {
                NpaError::MissingMoment(w.iter().map(|g| g.to_string()).collect::<String>())
            })?;
            match out.iter_mut().find(|(k, _)| *k == id) {
                Some(slot) => slot.1 += c,
                None => out.push((id, *c)),
            }
        }
        Ok((self.constant, out))
    }

    /// Value at moment vector `y`.
    pub fn evaluate(&self, m: &MomentMatrix, y: &[f64]) -> Result<f64, NpaError> {
        let (c, terms) = self.resolve(m)?;
        Ok(c + terms.iter().map(|&(v, k)| k * y[v]).sum::<f64>())
    }
}

const OBS_A: [Generator; 2] = [A0, A1];
const OBS_B: [Generator; 2] = [B0, B1];

/// `E_xy = 1 − 2⟨A_x⟩ − 2⟨B_y⟩ + 4⟨A_x B_y⟩`.
pub fn correlator_expr(x: usize, y: usize) -> LinearExpr {
    let (a, b) = (OBS_A[x], OBS_B[y]);
    LinearExpr { constant: 1.0, terms: vec![(vec![a], -2.0), (vec![b], -2.0), (vec![a, b], 4.0)] }
}

/// `E00 + E01 − E10 + E11`.
pub fn chsh_expr() -> LinearExpr {
    correlator_expr(0, 0)
        .add(correlator_expr(0, 1), 1.0)
        .add(correlator_expr(1, 0), -1.0)
        .add(correlator_expr(1, 1), 1.0)
}

/// `Σ_a ⟨F_a Π^{b_i = a}_{x_i = 0}⟩ = 1 − ⟨F⟩ − ⟨X0⟩ + 2⟨F X0⟩` for observer
/// `i ∈ {0, 1}`.
pub fn objectivity_expr(observer: usize) -> LinearExpr {
    let x0 = if observer == 0 { A0 } else { B0 };
    LinearExpr { constant: 1.0, terms: vec![(vec![F], -1.0), (vec![x0], -1.0), (vec![F, x0], 2.0)] }
}

/// `lo ≤ expr ≤ hi`; equal bounds give an exact equality.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentConstraint {
    pub expr: LinearExpr,
    pub lo: f64,
    pub hi: f64,
}

impl MomentConstraint {
    pub fn band(expr: LinearExpr, value: f64, half_width: f64) -> Self {
        Self { expr, lo: value - half_width, hi: value + half_width }
    }

    pub fn at_least(expr: LinearExpr, lo: f64) -> Self {
        Self { expr, lo, hi: f64::INFINITY }
    }
}

/// Feasibility problem "Γ ⪰ 0, Γ_11 = 1, constraints" over moment classes.
///
/// Variables `0..class_count` are the moments; one slack per non-equality
/// constraint follows.
pub fn moment_lmi(m: &MomentMatrix, constraints: &[MomentConstraint]) -> Result<Lmi, NpaError> {
    let n = m.size();
    let mut lmi = Lmi::new(m.class_count());
    let entries = (0..n * n).map(|k| Entry::var(m.class_at(k / n, k % n), 1.0)).collect();
    lmi.add_block(Block::new(n, entries));
    lmi.add_equality(vec![(m.identity_class(), 1.0)], 1.0);
    for c in constraints {
        let (constant, mut terms) = c.expr.resolve(m)?;
        if c.lo == c.hi {
            lmi.add_equality(terms, c.lo - constant);
        } else {
            let s = lmi.add_var();
            terms.push((s, -1.0));
            lmi.add_equality(terms, -constant);
            lmi.add_box(s, c.lo, c.hi);
        }
    }
    Ok(lmi)
}

/// Independent re-check of a certificate: smallest eigenvalue of Γ(y) from
/// the Jacobi solver, and the largest constraint violation.
pub fn verify_certificate(
    m: &MomentMatrix,
    constraints: &[MomentConstraint],
    y: &[f64],
) -> Result<(f64, f64), NpaError> {
    let n = m.size();
    let gamma: Vec<f64> = (0..n * n).map(|k| y[m.class_at(k / n, k % n)]).collect();
    let lmin = hermitian_eigen(&CMatrix::from_real(n, n, &gamma)).values[0];
    let mut viol = (y[m.identity_class()] - 1.0).abs();
    for c in constraints {
        let v = c.expr.evaluate(m, y)?;
        viol = viol.max(c.lo - v).max(v - c.hi);
    }
    Ok((lmin, viol.max(0.0)))
}

/// One feasibility call of a bisection.
#[derive(Clone, Debug, Serialize)]
pub struct BisectionStep {
    pub value: f64,
    pub verdict: Verdict,
    pub iterations: usize,
    pub residual: f64,
}

/// Result of [`delta_min_quantum`].
#[derive(Clone, Debug, Serialize)]
pub struct DeltaBound {
    /// Smallest certified `δ` (upper end of the final bracket).
    pub delta: f64,
    /// Largest `δ` not certified (lower end of the final bracket).
    pub lower: f64,
    /// Exact no-signalling bound, where the bisection starts.
    pub ns_bound: f64,
    pub level: NpaLevel,
    pub size: usize,
    /// `(λ_min, constraint violation)` of the returned certificate,
    /// recomputed outside the solver.
    pub certificate_check: (f64, f64),
    pub steps: Vec<BisectionStep>,
}

fn delta_constraints(chsh: f64, epsilon: f64, delta: f64, band: f64) -> Vec<MomentConstraint> {
    vec![
        MomentConstraint::band(correlator_expr(0, 0), 1.0 - 2.0 * epsilon, band),
        MomentConstraint::band(chsh_expr(), chsh, band),
        MomentConstraint::at_least(objectivity_expr(0), 1.0 - delta),
        MomentConstraint::at_least(objectivity_expr(1), 1.0 - delta),
    ]
}

/// Minimal `δ` compatible with `CHSH = chsh_target` and `E00 = 1 − 2ε` over
/// the moment relaxation at `level`.
///
/// Bisection runs on `[δ_NS, 1/2]`, so the result never falls below the
/// no-signalling bound. Target equalities hold within `cfg.constraint_tol`.
pub fn delta_min_quantum(chsh_target: f64, epsilon: f64, level: NpaLevel, cfg: &NpaConfig) -> Result<DeltaBound, NpaError> {
    if !(0.0..=0.5).contains(&epsilon) || !(chsh_target.abs() <= 4.0) {
        return Err(NpaError::InvalidArgument(format!("targets ({chsh_target}, {epsilon}) out of range")));
    }
    let ns = delta_min_ns_lp(chsh_target, epsilon).map_err(|e| NpaError::Infeasible {
        level,
        reason: format!("no-signalling: {e}"),
    })?;
    let m = build_moment_matrix(level, Scenario::HiddenParty);
    let mut steps = Vec::new();
    let mut run = |delta: f64, warm: Option<&WarmStart>| -> Result<SolveOutcome, NpaError> {
        let lmi = moment_lmi(&m, &delta_constraints(chsh_target, epsilon, delta, cfg.constraint_tol))?;
        let out = sdp_feasible(&lmi, &cfg.solver, warm);
        steps.push(BisectionStep { value: delta, verdict: out.verdict, iterations: out.iterations, residual: out.residual });
        Ok(out)
    };

    let top = run(0.5, None)?;
    if top.verdict != Verdict::Feasible {
        return Err(NpaError::Infeasible {
            level,
            reason: format!("δ = 1/2 not certified ({:?}, residual {:.3e})", top.verdict, top.residual),
        });
    }
    let mut best = top;
    let mut hi = 0.5;
    let mut lo = ns;
    let bottom = run(ns, Some(&best.warm))?;
    if bottom.verdict == Verdict::Feasible {
        hi = ns;
        best = bottom;
    }
    while hi - lo > cfg.bisection_width {
        let mid = 0.5 * (lo + hi);
        let out = run(mid, Some(&best.warm))?;
        if out.verdict == Verdict::Feasible {
            hi = mid;
            best = out;
        } else {
            lo = mid;
        }
    }
    let check = verify_certificate(&m, &delta_constraints(chsh_target, epsilon, hi, cfg.constraint_tol), &best.y)?;
    Ok(DeltaBound { delta: hi, lower: lo.min(hi), ns_bound: ns, level, size: m.size(), certificate_check: check, steps })
}

/// Result of [`tsirelson_bound`].
#[derive(Clone, Debug, Serialize)]
pub struct TsirelsonBound {
    /// Largest certified CHSH value.
    pub chsh: f64,
    /// Smallest value not certified.
    pub upper: f64,
    pub level: NpaLevel,
    pub steps: Vec<BisectionStep>,
}

/// Largest CHSH value certified feasible for the two observers at `level`.
///
/// With `full_agreement`, `E00 = E11 = 1` is imposed (within
/// `cfg.agreement_tol`).
pub fn tsirelson_bound(level: NpaLevel, full_agreement: bool, cfg: &NpaConfig) -> Result<TsirelsonBound, NpaError> {
    let m = build_moment_matrix(level, Scenario::ObserversOnly);
    let constraints = |s: f64| {
        let mut c = vec![MomentConstraint::at_least(chsh_expr(), s)];
        if full_agreement {
            for x in 0..2 {
                c.push(MomentConstraint { expr: correlator_expr(x, x), lo: 1.0 - cfg.agreement_tol, hi: 1.0 });
            }
        }
        c
    };
    let mut steps = Vec::new();
    let (mut lo, mut hi) = (2.0, 4.0);
    let mut warm: Option<WarmStart> = None;
    while hi - lo > cfg.bisection_width {
        let mid = 0.5 * (lo + hi);
        let out = sdp_feasible(&moment_lmi(&m, &constraints(mid))?, &cfg.solver, warm.as_ref());
        steps.push(BisectionStep { value: mid, verdict: out.verdict, iterations: out.iterations, residual: out.residual });
        if out.verdict == Verdict::Feasible {
            lo = mid;
            warm = Some(out.warm);
        } else {
            hi = mid;
        }
    }
    Ok(TsirelsonBound { chsh: lo, upper: hi, level, steps })
}
