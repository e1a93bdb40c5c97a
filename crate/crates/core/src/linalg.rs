//! Small dense helpers for complex Hermitian matrices.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Frobenius inner product `Tr(a* b)`.
pub fn inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise deviation from Hermitian symmetry, `max |a - a*|`.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Replaces `a` with `(a + a*) / 2`; returns the defect before symmetrization.
pub fn hermitize(a: &mut CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let d = a[(j, j)];
        worst = worst.max(d.im.abs() * 2.0);
        a[(j, j)] = Complex64::new(d.re, 0.0);
        for i in 0..j {
            let x = a[(i, j)];
            let y = a[(j, i)];
            worst = worst.max((x - y.conj()).norm());
            let avg = (x + y.conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    worst
}

pub fn hermitized(mut a: CMatrix) -> CMatrix {
    hermitize(&mut a);
    a
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| x.total_cmp(y));
    v
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(f64::NAN)
}

/// Cholesky factorization, failing if `a` is not numerically positive definite.
pub fn cholesky(a: &CMatrix, context: &str) -> Result<Cholesky<Complex64, Dyn>> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NotPositiveDefinite {
            context: format!("{context}: non-finite entries"),
        });
    }
    // Complex square roots never fail, so negative pivots must be caught here.
    Cholesky::new(a.clone())
        .filter(|c| {
            c.l_dirty()
                .diagonal()
                .iter()
                .all(|d| d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re)
        })
        .ok_or_else(|| Error::NotPositiveDefinite {
            context: context.to_string(),
        })
}

pub fn is_positive_definite(a: &CMatrix) -> bool {
    cholesky(a, "").is_ok()
}

/// `ln det a` for a positive definite `a`.
pub fn ln_det_pd(chol: &Cholesky<Complex64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|z| z.re.ln()).sum::<f64>()
}

/// Inverse of a positive definite matrix, Hermitized.
pub fn inverse_pd(a: &CMatrix, context: &str) -> Result<CMatrix> {
    Ok(hermitized(cholesky(a, context)?.inverse()))
}

/// Column-stacking vectorization.
pub fn vec_of(a: &CMatrix) -> CVector {
    CVector::from_iterator(a.len(), a.iter().copied())
}

pub fn unvec(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_iterator(n, n, v.iter().copied())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for q in 0..bc {
                for p in 0..br {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitize_reports_defect() {
        let mut a = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -0.8),
                Complex64::new(2.0, 0.0),
            ],
        );
        let defect = hermitize(&mut a);
        assert!((defect - 0.2).abs() < 1e-15);
        assert_eq!(hermitian_defect(&a), 0.0);
        assert!((a[(0, 1)].im - 0.9).abs() < 1e-15);
    }

    #[test]
    fn kron_matches_vec_identity() {
        // vec(A X B) = (B^T ⊗ A) vec(X)
        let a = CMatrix::from_fn(2, 2, |i, j| Complex64::new(i as f64 + 1.0, j as f64 - 0.5));
        let b = CMatrix::from_fn(2, 2, |i, j| Complex64::new(0.3 * j as f64, 1.0 + i as f64));
        let x = CMatrix::from_fn(2, 2, |i, j| Complex64::new((i * 2 + j) as f64, 0.1));
        let lhs = vec_of(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec_of(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn ln_det_of_diagonal() {
        let a = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(3.0, 0.0),
        ]));
        let chol = cholesky(&a, "test").unwrap();
        assert!((ln_det_pd(&chol) - 3.0f64.ln()).abs() < 1e-14);
        assert!(cholesky(&(-a), "neg").is_err());
    }
}
