//! Cyclic complex Jacobi eigendecomposition for small Hermitian matrices.

use super::cmatrix::{CMatrix, C64};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)].conj()).sum()
        })
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.values.len()).map(|i| self.vectors[(i, k)]).collect()
    }
}

fn off_norm_sqr(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

/// Diagonalizes a Hermitian matrix by cyclic Jacobi rotations.
///
/// Pivots are visited in row-major order `(0,1), (0,2), …, (n-2,n-1)` every
/// sweep, so the result is deterministic. Only the Hermitian part of the input
/// is meaningful; the strictly lower triangle is read as the conjugate of the
/// upper one after the first rotation.
///
/// # Panics
/// If `a` is not square.
pub fn hermitian_eigen(a: &CMatrix) -> HermitianEigen {
    assert!(a.is_square(), "eigendecomposition needs a square matrix");
    let n = a.rows();
    let mut a = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let threshold = (f64::EPSILON * scale).powi(2);

    for _ in 0..MAX_SWEEPS {
        if off_norm_sqr(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let e = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let eb = e.conj();
                // J restricted to (p, q): [[c, s], [-s·ē, c·ē]].
                let j_pp = C64::new(c, 0.0);
                let j_pq = C64::new(s, 0.0);
                let j_qp = eb * -s;
                let j_qq = eb * c;

                // A ← A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * j_pp + akq * j_qp;
                    a[(k, q)] = akp * j_pq + akq * j_qq;
                }
                // A ← J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                // V ← V J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * j_pp + vkq * j_qp;
                    v[(k, q)] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermitianEigen { values, vectors }
}
