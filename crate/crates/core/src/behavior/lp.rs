//! Dense two-phase simplex for small equality-form linear programs.
//!
//! Solves `min cᵀx  s.t.  A x = b, x ≥ 0` with Bland's anti-cycling rule.
//! Intended for problems with a few dozen rows and columns.

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

struct Tableau {
    // rows × (cols + 1); last column is the right-hand side
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs of `cost` for the current basis.
    fn reduced(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, &bi) in self.basis.iter().enumerate() {
            let cb = cost[bi];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.t[i][j];
                }
            }
        }
        d
    }

    /// Runs Bland-rule simplex iterations over columns `< allowed`.
    /// Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> bool {
        let rhs = self.cols;
        loop {
            let d = self.reduced(cost);
            let Some(enter) = (0..allowed).find(|&j| d[j] < -PIVOT_TOL) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][enter];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][rhs] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }
}

/// Solves `min cᵀx  s.t.  A x = b, x ≥ 0`.
///
/// # Panics
/// If the row lengths of `a` differ from `c.len()` or `b.len() != a.len()`.
pub fn solve(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m);
    assert!(a.iter().all(|r| r.len() == n));

    // phase 1: one artificial per row, rhs made nonnegative
    let cols = n + m;
    let mut t = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; cols + 1];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = 1.0;
        row[cols] = sign * b[i];
        t.push(row);
    }
    let mut tab = Tableau { t, basis: (n..n + m).collect(), cols };
    let mut phase1 = vec![0.0; cols];
    for v in phase1.iter_mut().skip(n) {
        *v = 1.0;
    }
    tab.optimize(&phase1, cols);
    let infeas: f64 = tab.basis.iter().enumerate().filter(|(_, &bj)| bj >= n).map(|(i, _)| tab.t[i][cols]).sum();
    if infeas > FEAS_TOL {
        return LpOutcome::Infeasible;
    }

    // drive remaining artificials out; rows that cannot pivot are redundant
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= n {
            match (0..n).find(|&j| tab.t[i][j].abs() > 1e-9) {
                Some(j) => {
                    tab.pivot(i, j);
                    i += 1;
                }
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(c);
    if !tab.optimize(&cost, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bi) in tab.basis.iter().enumerate() {
        if bi < n {
            x[bi] = tab.t[i][cols].max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, objective }
}
