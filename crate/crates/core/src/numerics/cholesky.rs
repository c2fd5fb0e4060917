//! Hermitian Cholesky with diagonal pivoting for ill-conditioned Gram matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `D^{-1/2} G D^{-1/2}` restricted to `pivots` equals `factor · factorᴴ`,
/// with `D = diag(G)` and `factor` lower triangular.
#[derive(Clone, Debug)]
pub struct PivotedCholesky {
    pub pivots: Vec<usize>,
    pub factor: DMatrix<Complex64>,
    /// `sqrt(G_ii)` for every original index.
    pub scale: Vec<f64>,
}

impl PivotedCholesky {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Factorizes the Hermitian PSD matrix `gram`.
///
/// Pivots greedily on the largest remaining diagonal of the unit-diagonal
/// scaled matrix. Elimination stops once the largest remaining pivot falls
/// to `drop_tol`, so near-dependent columns are dropped rather than
/// amplified. A remaining diagonal below `-drop_tol` is reported as
/// indefiniteness.
pub fn pivoted_cholesky(gram: &DMatrix<Complex64>, drop_tol: f64) -> Result<PivotedCholesky> {
    let n = gram.nrows();
    assert_eq!(n, gram.ncols(), "Gram matrix must be square");
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let d = gram[(i, i)].re;
        if d < 0.0 || !d.is_finite() {
            return Err(Error::IndefiniteGram { pivot: d, index: i });
        }
        scale.push(d.sqrt());
    }
    let mut work = DMatrix::from_fn(n, n, |i, j| {
        if scale[i] == 0.0 || scale[j] == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            gram[(i, j)] / (scale[i] * scale[j])
        }
    });
    let mut perm: Vec<usize> = (0..n).collect();
    let mut lower = DMatrix::<Complex64>::zeros(n, n);
    let mut rank = 0;
    for k in 0..n {
        let (mut best, mut best_val) = (k, f64::NEG_INFINITY);
        let (mut worst, mut worst_val) = (k, f64::INFINITY);
        for j in k..n {
            let v = work[(j, j)].re;
            if v > best_val {
                best = j;
                best_val = v;
            }
            if v < worst_val {
                worst = j;
                worst_val = v;
            }
        }
        if worst_val < -drop_tol {
            return Err(Error::IndefiniteGram {
                pivot: worst_val,
                index: perm[worst],
            });
        }
        if best_val <= drop_tol {
            break;
        }
        if best != k {
            work.swap_rows(k, best);
            work.swap_columns(k, best);
            lower.swap_rows(k, best);
            perm.swap(k, best);
        }
        let pivot = work[(k, k)].re.sqrt();
        lower[(k, k)] = Complex64::new(pivot, 0.0);
        for i in (k + 1)..n {
            lower[(i, k)] = work[(i, k)] / pivot;
        }
        for j in (k + 1)..n {
            let ljk = lower[(j, k)].conj();
            for i in (k + 1)..n {
                let update = lower[(i, k)] * ljk;
                work[(i, j)] -= update;
            }
        }
        rank = k + 1;
    }
    Ok(PivotedCholesky {
        pivots: perm[..rank].to_vec(),
        factor: lower.view((0, 0), (rank, rank)).into_owned(),
        scale,
    })
}

/// Inverse of a nonsingular lower-triangular matrix by forward substitution.
pub fn lower_inverse(lower: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = lower.nrows();
    let mut inv = DMatrix::<Complex64>::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut acc = if i == col {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for k in col..i {
                acc -= lower[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = acc / lower[(i, i)];
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reconstruct(ch: &PivotedCholesky, gram: &DMatrix<Complex64>) -> f64 {
        let llh = &ch.factor * ch.factor.adjoint();
        let mut err: f64 = 0.0;
        for (a, &i) in ch.pivots.iter().enumerate() {
            for (b, &j) in ch.pivots.iter().enumerate() {
                let g = gram[(i, j)] / (ch.scale[i] * ch.scale[j]);
                err = err.max((llh[(a, b)] - g).norm());
            }
        }
        err
    }

    #[test]
    fn factorizes_hermitian_positive_matrix() {
        let g = DMatrix::from_row_slice(
            3,
            3,
            &[c(4.0, 0.0), c(1.0, 1.0), c(0.0, -0.5), c(1.0, -1.0), c(3.0, 0.0), c(0.2, 0.0), c(0.0, 0.5), c(0.2, 0.0), c(2.0, 0.0)],
        );
        let ch = pivoted_cholesky(&g, 1e-10).unwrap();
        assert_eq!(ch.rank(), 3);
        assert!(reconstruct(&ch, &g) < 1e-14);
        let inv = lower_inverse(&ch.factor);
        let id = &inv * &ch.factor;
        assert!((id - DMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn drops_dependent_columns() {
        // third column duplicates the first
        let v = [[c(1.0, 0.0), c(0.5, 0.1)], [c(0.0, 1.0), c(2.0, 0.0)], [c(1.0, 0.0), c(0.5, 0.1)]];
        let g = DMatrix::from_fn(3, 3, |i, j| v[i].iter().zip(&v[j]).map(|(a, b)| a * b.conj()).sum());
        let ch = pivoted_cholesky(&g, 1e-10).unwrap();
        assert_eq!(ch.rank(), 2);
        assert!(reconstruct(&ch, &g) < 1e-14);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let g = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(pivoted_cholesky(&g, 1e-10), Err(Error::IndefiniteGram { .. })));
        let neg = DMatrix::from_row_slice(1, 1, &[c(-1.0, 0.0)]);
        assert!(matches!(pivoted_cholesky(&neg, 1e-10), Err(Error::IndefiniteGram { index: 0, .. })));
    }

    #[test]
    fn hilbert_like_gram_stays_accurate() {
        // Gram of x^j on [0, 1]: the Hilbert matrix, condition ~1e13 at n = 10
        let n = 10;
        let g = DMatrix::from_fn(n, n, |i, j| c(1.0 / (i + j + 1) as f64, 0.0));
        let ch = pivoted_cholesky(&g, 1e-10).unwrap();
        assert!(ch.rank() <= n);
        assert!(reconstruct(&ch, &g) < 1e-12);
    }
}
