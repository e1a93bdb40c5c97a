//! The operators `𝒜` and `F_S = 𝒜 + μ S⁻¹(·)S⁻¹` on Hermitian matrices.
//!
//! `F_S` is the Hessian of the barrier-regularized proximity and also the
//! matrix driving the SDM ODE, so both the static solver and the dynamics
//! use [`FSolver`]. Its inverse is applied through the rank-`L` structure
//! of `𝒜 = U U*` (`U = [vec E_ℓ]`):
//!
//! ```text
//! F_S⁻¹(Y) = μ⁻¹ S (Y − Σ_m c_m E_m) S,   (I + G) c = b,
//! G_{ℓm} = μ⁻¹ ⟨E_ℓ, S E_m S⟩,          b_ℓ = μ⁻¹ ⟨E_ℓ, S Y S⟩,
//! ```
//!
//! which needs no inverse of `S` and only an `L × L` solve. The explicit
//! `N² × N²` vectorized matrix is available through [`vectorized_f_matrix`]
//! and [`solve_f_dense`].

use nalgebra::linalg::LU;
use nalgebra::Dyn;
use num_complex::Complex64;

use crate::basis::StructureTable;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::sdm::coefficients_of;

/// Condition bound beyond which [`solve_f`] reports ill-conditioning.
pub const MAX_CONDITION: f64 = 1e14;

fn check_square(x: &CMatrix, n: usize) -> Result<()> {
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x.nrows().max(x.ncols()),
        });
    }
    Ok(())
}

/// `𝒜(X) = Σ_ℓ ⟨E_ℓ, X⟩ E_ℓ`, Hermitized.
pub fn apply_a(table: &StructureTable, x: &CMatrix) -> Result<CMatrix> {
    check_square(x, table.n_basis())?;
    let c = coefficients_of(x, table);
    Ok(linalg::hermitized(combine(table, &c)))
}

/// `Σ_ℓ c_ℓ E_ℓ` (not Hermitized).
pub fn combine(table: &StructureTable, c: &CVector) -> CMatrix {
    let n = table.n_basis();
    let mut out = CMatrix::zeros(n, n);
    for (e, &cl) in table.matrices().iter().zip(c.iter()) {
        if cl != ZERO {
            e.axpy(cl, &mut out);
        }
    }
    out
}

/// `F_S(X) = 𝒜(X) + μ S⁻¹ X S⁻¹`, Hermitized.
pub fn apply_f(s: &CMatrix, table: &StructureTable, mu: f64, x: &CMatrix) -> Result<CMatrix> {
    check_square(x, table.n_basis())?;
    check_square(s, table.n_basis())?;
    let s_inv = linalg::inverse_pd(s, "F_S requires S ≻ 0")?;
    let a = apply_a(table, x)?;
    Ok(linalg::hermitized(
        a + (&s_inv * x * &s_inv) * Complex64::new(mu, 0.0),
    ))
}

/// Factorized inverse of `F_S` for a fixed `S ≻ 0` and `μ > 0`.
pub struct FSolver<'a> {
    table: &'a StructureTable,
    s: CMatrix,
    s_inv: CMatrix,
    mu: f64,
    capacitance: LU<Complex64, Dyn, Dyn>,
}

impl<'a> FSolver<'a> {
    pub fn new(table: &'a StructureTable, s: &CMatrix, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("barrier μ = {mu} must be > 0")));
        }
        check_square(s, table.n_basis())?;
        let s_inv = linalg::inverse_pd(s, "F_S requires S ≻ 0")?;
        let l = table.n_moments();
        let inv_mu = 1.0 / mu;
        // G_{ℓm} = μ⁻¹ Σ_{(a,b) ∈ E_ℓ} Σ_{(c,d) ∈ E_m} conj(e_ab) e_cd S_ac S_db
        let mut cap = CMatrix::identity(l, l);
        for (li, el) in table.matrices().iter().enumerate() {
            for (mi, em) in table.matrices().iter().enumerate() {
                let mut acc = ZERO;
                for &(a, b, va) in el.entries() {
                    let mut inner = ZERO;
                    for &(c, d, vc) in em.entries() {
                        inner += vc * s[(a, c)] * s[(d, b)];
                    }
                    acc += va.conj() * inner;
                }
                cap[(li, mi)] += acc * inv_mu;
            }
        }
        Ok(FSolver {
            table,
            s: s.clone(),
            s_inv,
            mu,
            capacitance: cap.lu(),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sdm_matrix(&self) -> &CMatrix {
        &self.s
    }

    /// The unique Hermitian `X` with `F_S(X) = Y`.
    pub fn solve(&self, y: &CMatrix) -> Result<CMatrix> {
        check_square(y, self.table.n_basis())?;
        let inv_mu = Complex64::new(1.0 / self.mu, 0.0);
        let z = &self.s * y * &self.s * inv_mu;
        let b = coefficients_of(&z, self.table);
        let c = self
            .capacitance
            .solve(&b)
            .ok_or_else(|| Error::Consistency("capacitance matrix is singular".into()))?;
        let rhs = y - combine(self.table, &c);
        Ok(linalg::hermitized(&self.s * rhs * &self.s * inv_mu))
    }

    /// `F_S(X)` with the stored factor `S⁻¹`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let a = apply_a(self.table, x)?;
        Ok(linalg::hermitized(
            a + (&self.s_inv * x * &self.s_inv) * Complex64::new(self.mu, 0.0),
        ))
    }

    /// [`FSolver::solve`] followed by one step of iterative refinement,
    /// for `S` close to singular.
    pub fn solve_refined(&self, y: &CMatrix) -> Result<CMatrix> {
        let x = self.solve(y)?;
        let r = y - self.apply(&x)?;
        Ok(x + self.solve(&r)?)
    }

    /// Upper bound on the condition number of `F_S`:
    /// `(μ/λ_min² + ‖𝒜‖) / (μ/λ_max²)` with `‖𝒜‖` bounded by Gershgorin on
    /// the Gram matrix.
    pub fn condition_bound(&self) -> f64 {
        let eig = linalg::hermitian_eigenvalues(&self.s);
        let (lo, hi) = (eig[0], eig[eig.len() - 1]);
        let gram = crate::basis::gram_matrix(self.table);
        let a_norm = (0..gram.nrows())
            .map(|i| gram.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        (self.mu / (lo * lo) + a_norm) / (self.mu / (hi * hi))
    }
}

/// Solves `F_S(X) = Y`, reporting ill-conditioning beyond [`MAX_CONDITION`].
pub fn solve_f(s: &CMatrix, table: &StructureTable, mu: f64, y: &CMatrix) -> Result<CMatrix> {
    let solver = FSolver::new(table, s, mu)?;
    let condition = solver.condition_bound();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    solver.solve(y)
}

/// The `N² × N²` matrix `Σ_ℓ vec(E_ℓ) vec(E_ℓ)* + μ conj(S⁻¹) ⊗ S⁻¹`
/// representing `F_S` on column-stacked matrices.
pub fn vectorized_f_matrix(s: &CMatrix, table: &StructureTable, mu: f64) -> Result<CMatrix> {
    check_square(s, table.n_basis())?;
    let n = table.n_basis();
    let s_inv = linalg::inverse_pd(s, "F_S requires S ≻ 0")?;
    let mut m = linalg::kron(&s_inv.map(|z| z.conj()), &s_inv) * Complex64::new(mu, 0.0);
    for e in table.matrices() {
        let v = linalg::vec_of(&e.to_dense(n));
        m += &v * v.adjoint();
    }
    Ok(m)
}

/// Dense solve of `F_S(X) = Y` on the vectorized space.
pub fn solve_f_dense(s: &CMatrix, table: &StructureTable, mu: f64, y: &CMatrix) -> Result<CMatrix> {
    check_square(y, table.n_basis())?;
    let m = vectorized_f_matrix(s, table, mu)?;
    let x = m
        .lu()
        .solve(&linalg::vec_of(y))
        .ok_or_else(|| Error::Consistency("vectorized F_S is singular".into()))?;
    Ok(linalg::hermitized(linalg::unvec(&x, table.n_basis())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{cube_table, Family};
    use crate::sdm::Sdm;
    use crate::testutil::{random_hermitian, random_sdm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn a_of_identity_fourier() {
        let table = cube_table(Family::Fourier, 2, 1).unwrap();
        let a = apply_a(&table, &CMatrix::identity(9, 9)).unwrap();
        assert!((a - CMatrix::identity(9, 9) * Complex64::new(9.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn a_is_positive_and_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for family in [Family::Fourier, Family::Hermite] {
            let table = cube_table(family, 2, 1).unwrap();
            let n = table.n_basis();
            for _ in 0..10 {
                let x = random_hermitian(n, &mut rng);
                let y = random_hermitian(n, &mut rng);
                let ax = apply_a(&table, &x).unwrap();
                let ay = apply_a(&table, &y).unwrap();
                let quad = linalg::inner(&x, &ax);
                let sos: f64 = coefficients_of(&x, &table).iter().map(|z| z.norm_sqr()).sum();
                assert!((quad.re - sos).abs() < 1e-10 * sos.max(1.0));
                assert!(quad.re >= 0.0);
                let lhs = linalg::inner(&y, &ax);
                let rhs = linalg::inner(&ay, &x);
                assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn f_at_uniform_sdm() {
        let table = cube_table(Family::Fourier, 1, 1).unwrap();
        let mu = 0.3;
        let s = Sdm::maximally_mixed(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_hermitian(3, &mut rng);
        let f = apply_f(s.matrix(), &table, mu, &x).unwrap();
        let expected = apply_a(&table, &x).unwrap() + &x * Complex64::new(mu * 9.0, 0.0);
        assert!((f - expected).norm() < 1e-12);
    }

    #[test]
    fn solve_f_identity_closed_form() {
        let table = cube_table(Family::Fourier, 2, 1).unwrap();
        let n = 9.0;
        let mu = 0.01;
        let s = Sdm::maximally_mixed(9);
        let x = solve_f(s.matrix(), &table, mu, &CMatrix::identity(9, 9)).unwrap();
        let want = CMatrix::identity(9, 9) / Complex64::new(n + mu * n * n, 0.0);
        assert!((x - want).norm() < 1e-13);
    }

    #[test]
    fn woodbury_matches_dense_vectorized_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for family in [Family::Fourier, Family::Hermite] {
            let table = cube_table(family, 2, 1).unwrap();
            let n = table.n_basis();
            let s = random_sdm(n, &mut rng);
            for mu in [1e-3, 0.01, 1.0] {
                let y = random_hermitian(n, &mut rng);
                let a = solve_f(s.matrix(), &table, mu, &y).unwrap();
                let b = solve_f_dense(s.matrix(), &table, mu, &y).unwrap();
                assert!((&a - &b).norm() < 1e-9 * b.norm(), "{family} μ={mu}");
                assert!(linalg::hermitian_defect(&a) < 1e-11);
            }
        }
    }

    #[test]
    fn f_round_trip_and_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let table = cube_table(Family::Fourier, 2, 1).unwrap();
        let s = random_sdm(9, &mut rng);
        let mu = 0.01;
        let solver = FSolver::new(&table, s.matrix(), mu).unwrap();
        for _ in 0..5 {
            let x0 = random_hermitian(9, &mut rng);
            let y = apply_f(s.matrix(), &table, mu, &x0).unwrap();
            assert!(linalg::inner(&x0, &y).re > 0.0);
            let x = solver.solve(&y).unwrap();
            assert!((&x - &x0).norm() < 1e-9 * x0.norm());
        }
        let eig = linalg::hermitian_eigenvalues(&vectorized_f_matrix(s.matrix(), &table, mu).unwrap());
        assert!(eig[0] > 0.0);
    }

    #[test]
    fn singular_sdm_rejected() {
        let table = cube_table(Family::Fourier, 1, 1).unwrap();
        let u = CVector::from_element(3, Complex64::new(1.0, 0.0));
        let s = Sdm::pure(&u).unwrap();
        assert!(matches!(
            FSolver::new(&table, s.matrix(), 0.1),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(FSolver::new(&table, Sdm::maximally_mixed(3).matrix(), 0.0).is_err());
    }

    #[test]
    fn ill_conditioning_reported() {
        let table = cube_table(Family::Fourier, 1, 1).unwrap();
        let s = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(1.0 - 2e-9, 0.0),
            Complex64::new(1e-9, 0.0),
            Complex64::new(1e-9, 0.0),
        ]));
        let r = solve_f(&s, &table, 1e-6, &CMatrix::identity(3, 3));
        assert!(matches!(r, Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn refined_solve_inverts_near_singular_f() {
        let table = cube_table(Family::Fourier, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base = random_sdm(9, &mut rng);
        // Push one eigenvalue towards zero.
        let eig = base.matrix().clone().symmetric_eigen();
        let mut vals = eig.eigenvalues.clone();
        vals[0] = 1e-6;
        let s = &eig.eigenvectors * CMatrix::from_diagonal(&vals.map(|v| Complex64::new(v, 0.0))) * eig.eigenvectors.adjoint();
        let s = Sdm::normalized(linalg::hermitized(s)).unwrap().into_matrix();
        let solver = FSolver::new(&table, &s, 1e-3).unwrap();
        let y = random_hermitian(9, &mut rng);
        let x = solver.solve_refined(&y).unwrap();
        let r = linalg::frobenius_norm(&(solver.apply(&x).unwrap() - &y));
        let plain = solver.solve(&y).unwrap();
        let r0 = linalg::frobenius_norm(&(solver.apply(&plain).unwrap() - &y));
        assert!(r < r0, "refined {r:e} vs plain {r0:e}");
        assert!(r <= 1e-6 * linalg::frobenius_norm(&y), "{r}");
        let direct = apply_f(&s, &table, 1e-3, &x).unwrap();
        assert!(linalg::frobenius_norm(&(direct - solver.apply(&x).unwrap())) <= 1e-6 * linalg::frobenius_norm(&y));
    }
}
