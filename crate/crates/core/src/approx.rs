//! Barrier-regularized quadratic fitting of an SDM to a target density.
//!
//! The target enters only through its generalized moments `E_f φ_ℓ`. The fit
//! minimizes
//!
//! ```text
//! J(S) = ½⟨S, 𝒜(S)⟩ − Re⟨ℬ(f), S⟩ − μ ln det S   subject to Tr S = 1,
//! ```
//!
//! whose stationarity condition is `𝒜(S) − μS⁻¹ = λI + ℬ(f)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{Family, IndexSet, IndexSetKind, MultiIndex, StructureTable};
use crate::error::{Error, Result};
use crate::fpke_ref::DensityGrid;
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::operators::{apply_a, combine, FSolver};
use crate::sdm::{coefficients_of, renyi_vs_weight, Sdm};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100;

/// Generalized moments `E_f φ_ℓ` of a target density over an index set.
#[derive(Debug, Clone)]
pub struct MomentVector {
    indices: IndexSet,
    values: Vec<Complex64>,
    lookup: HashMap<MultiIndex, usize>,
}

impl MomentVector {
    pub fn new(indices: IndexSet, values: Vec<Complex64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                actual: values.len(),
            });
        }
        let lookup = indices
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        Ok(MomentVector {
            indices,
            values,
            lookup,
        })
    }

    /// Moments of the weight itself: one at `ℓ = 0`, zero elsewhere.
    pub fn of_weight(table: &StructureTable) -> Self {
        let mut values = vec![ZERO; table.n_moments()];
        values[table.zero_position()] = Complex64::new(1.0, 0.0);
        MomentVector::new(table.mho().clone(), values).expect("sizes agree")
    }

    /// Moments of `p_S`, `E_{p_S} φ_ℓ = ⟨E_ℓ, S⟩`.
    pub fn of_sdm(s: &Sdm, table: &StructureTable) -> Self {
        let c = coefficients_of(s.matrix(), table);
        MomentVector::new(table.mho().clone(), c.iter().copied().collect()).expect("sizes agree")
    }

    pub fn indices(&self) -> &IndexSet {
        &self.indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `E_f φ_ℓ`, zero for indices outside the stored set.
    pub fn get(&self, l: &MultiIndex) -> Complex64 {
        self.lookup.get(l).map(|&i| self.values[i]).unwrap_or(ZERO)
    }

    /// Moments reordered to the `℧` order of `table`.
    pub fn aligned(&self, table: &StructureTable) -> CVector {
        CVector::from_iterator(table.n_moments(), table.mho().iter().map(|l| self.get(l)))
    }

    /// Largest `|E_f φ_{-ℓ} − conj(E_f φ_ℓ)|` over stored pairs.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .filter_map(|(k, v)| self.lookup.get(&k.neg()).map(|&j| (self.values[j] - v.conj()).norm()))
            .fold(0.0, f64::max)
    }
}

/// `ℬ(f) = Σ_ℓ (E_f φ_ℓ) E_ℓ`, Hermitized.
pub fn moments_to_b(table: &StructureTable, mv: &MomentVector) -> CMatrix {
    linalg::hermitized(combine(table, &mv.aligned(table)))
}

/// `ln ∫ f²/ν` for a density tabulated on a torus mesh.
pub fn renyi_of_grid(grid: &DensityGrid) -> Result<f64> {
    let mesh = grid.mesh();
    let sq: Vec<f64> = grid.values.iter().map(|v| v * v).collect();
    let value = (2.0 * PI).powi(grid.n as i32) * mesh.integrate(&sq);
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::InvalidArgument(format!("∫f²/ν = {value} is not positive")));
    }
    Ok(value.ln())
}

/// `D(f, p_S) = ½‖(f − p_S)/ν‖²_H`, with `renyi_f = ln ∫ f²/ν`.
pub fn proximity(table: &StructureTable, mv: &MomentVector, renyi_f: f64, s: &Sdm) -> Result<f64> {
    if !renyi_f.is_finite() {
        return Err(Error::InvalidArgument(format!("Renyi entropy {renyi_f} is not finite")));
    }
    let c = coefficients_of(s.matrix(), table);
    let cross: Complex64 = c
        .iter()
        .zip(mv.aligned(table).iter())
        .map(|(cl, ml)| cl * ml.conj())
        .sum();
    if cross.im.abs() > 1e-10 * cross.re.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "cross term has imaginary part {:.3e}",
            cross.im
        )));
    }
    let value = 0.5 * (renyi_f.exp() + renyi_vs_weight(s, table)?.exp()) - cross.re;
    // Cancellation can leave a tiny negative number.
    Ok(value.max(0.0))
}

/// Rectangle-rule moments `∫ f φ_ℓ dx`, `ℓ ∈ ℧`, of a Fourier-family grid.
pub fn moments_from_grid(grid: &DensityGrid, table: &StructureTable) -> Result<MomentVector> {
    if table.family() != Family::Fourier {
        return Err(Error::InvalidArgument(
            "grid moments are defined for the Fourier family only".into(),
        ));
    }
    let required = 2 * table.mho().max_abs() as usize;
    if grid.m <= required {
        return Err(Error::MeshTooCoarse {
            points: grid.m,
            required,
        });
    }
    moments_on_set(grid, table.mho().clone())
}

/// Rectangle-rule moments of a grid over an arbitrary index set.
pub fn moments_on_set(grid: &DensityGrid, set: IndexSet) -> Result<MomentVector> {
    if set.dim() != grid.n {
        return Err(Error::DimensionMismatch {
            expected: grid.n,
            actual: set.dim(),
        });
    }
    let values = grid.mesh().fourier_moments(&grid.values, &set)?;
    MomentVector::new(set, values)
}

/// Orthogonal projection onto `span{E_ℓ}`, the part of an SDM that the
/// density actually depends on.
pub fn project_to_span(table: &StructureTable, x: &CMatrix) -> CMatrix {
    let gram = crate::basis::gram_matrix(table);
    let rhs = coefficients_of(x, table);
    let eps = linalg::frobenius_norm(&gram) * 1e-13;
    let c = gram
        .svd(true, true)
        .solve(&rhs, eps)
        .unwrap_or_else(|_| CVector::zeros(table.n_moments()));
    combine(table, &c)
}

/// Outcome of [`solve_static`].
#[derive(Debug, Clone)]
pub struct StaticFitResult {
    pub sdm: Sdm,
    pub lagrange: f64,
    pub residual: f64,
    pub iterations: usize,
    pub barrier: f64,
    pub converged: bool,
    /// `J` at the start and after every accepted step.
    pub objective_history: Vec<f64>,
}

impl StaticFitResult {
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(self.sdm.matrix())
    }

    pub fn report(&self, proximity_value: Option<f64>) -> FitReport {
        FitReport {
            iterations: self.iterations,
            residual: self.residual,
            lagrange: self.lagrange,
            barrier: self.barrier,
            min_eigenvalue: self.min_eigenvalue(),
            proximity_value,
            converged: self.converged,
        }
    }
}

/// JSON summary of a fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: usize,
    pub residual: f64,
    pub lagrange: f64,
    pub barrier: f64,
    pub min_eigenvalue: f64,
    pub proximity_value: Option<f64>,
    pub converged: bool,
}

/// `J(S)`; fails if `S` is not positive definite.
pub fn objective(table: &StructureTable, b: &CMatrix, mu: f64, s: &CMatrix) -> Result<f64> {
    let chol = linalg::cholesky(s, "barrier objective")?;
    let c = coefficients_of(s, table);
    let quad: f64 = 0.5 * c.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok(quad - linalg::inner(b, s).re - mu * linalg::ln_det_pd(&chol))
}

/// `∇J(S) = 𝒜(S) − ℬ − μS⁻¹`.
pub fn gradient(table: &StructureTable, b: &CMatrix, mu: f64, s: &CMatrix) -> Result<CMatrix> {
    let s_inv = linalg::inverse_pd(s, "barrier gradient")?;
    Ok(linalg::hermitized(
        apply_a(table, s)? - b - s_inv * Complex64::new(mu, 0.0),
    ))
}

/// Multiplier and Frobenius residual of the stationarity condition for a
/// gradient `g`: `λ = Tr g / N`, residual `‖g − λI‖_F`.
fn stationarity(g: &CMatrix) -> (f64, f64) {
    let n = g.nrows();
    let lambda = linalg::trace(g).re / n as f64;
    let mut d = g.clone();
    for i in 0..n {
        d[(i, i)] -= Complex64::new(lambda, 0.0);
    }
    (lambda, linalg::frobenius_norm(&d))
}

/// Fits an SDM to `mv` starting from `I_N/N`.
pub fn solve_static(
    table: &StructureTable,
    mv: &MomentVector,
    mu: f64,
    tol: f64,
    max_iter: usize,
) -> Result<StaticFitResult> {
    solve_static_from(table, mv, mu, tol, max_iter, &Sdm::maximally_mixed(table.n_basis()))
}

/// Largest barrier at which the continuation path starts.
pub const CONTINUATION_START: f64 = 0.1;
/// Ratio between successive barriers on the continuation path.
pub const CONTINUATION_FACTOR: f64 = 0.1;

/// Feasible-start Newton on `{Tr S = 1}` from an arbitrary positive
/// definite `start`.
///
/// Small barriers are reached by continuation: the problem is solved for
/// `μ_0 = 0.1, μ_0/10, …` down to `μ`, each stage warm-started from the
/// previous one. Without it damped Newton crawls when the optimum sits
/// close to the boundary of the cone. `iterations` counts every stage;
/// `objective_history` covers only the final one.
pub fn solve_static_from(
    table: &StructureTable,
    mv: &MomentVector,
    mu: f64,
    tol: f64,
    max_iter: usize,
    start: &Sdm,
) -> Result<StaticFitResult> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("barrier μ = {mu} must be > 0")));
    }
    if start.size() != table.n_basis() {
        return Err(Error::DimensionMismatch {
            expected: table.n_basis(),
            actual: start.size(),
        });
    }
    let b = moments_to_b(table, mv);
    let mut s = start.matrix().clone();
    let mut iterations = 0;
    let mut stage_mu = CONTINUATION_START;
    while stage_mu > mu * (1.0 + 1e-12) {
        let stage = newton(table, &b, stage_mu, tol.max(1e-8), max_iter, s)?;
        iterations += stage.iterations;
        s = stage.sdm.into_matrix();
        stage_mu *= CONTINUATION_FACTOR;
    }
    let mut fit = newton(table, &b, mu, tol, max_iter, s)?;
    fit.iterations += iterations;
    Ok(fit)
}

fn newton(
    table: &StructureTable,
    b: &CMatrix,
    mu: f64,
    tol: f64,
    max_iter: usize,
    mut s: CMatrix,
) -> Result<StaticFitResult> {
    let n = table.n_basis();
    let identity = linalg::identity(n);
    let mut j = objective(table, b, mu, &s)?;
    let mut g = gradient(table, b, mu, &s)?;
    let (mut lambda, mut residual) = stationarity(&g);
    let mut history = vec![j];
    let mut iterations = 0;
    let mut converged = residual <= tol;

    while !converged && iterations < max_iter {
        let solver = FSolver::new(table, &s, mu)?;
        let u = solver.solve_refined(&g)?;
        let w = solver.solve_refined(&identity)?;
        let shift = linalg::trace(&u).re / linalg::trace(&w).re;
        let delta = linalg::hermitized(-u + w * Complex64::new(shift, 0.0));

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut candidate = &s + &delta * Complex64::new(step, 0.0);
            linalg::hermitize(&mut candidate);
            let tr = linalg::trace(&candidate).re;
            candidate /= Complex64::new(tr, 0.0);
            if let Ok(jc) = objective(table, b, mu, &candidate) {
                let gc = gradient(table, b, mu, &candidate)?;
                let (lc, rc) = stationarity(&gc);
                let decrease = jc < j;
                // Near the optimum J is flat to round-off; accept if the
                // residual still improves.
                let tie = (jc - j).abs() <= 1e-12 * (1.0 + j.abs()) && rc < residual;
                if decrease || tie {
                    accepted = Some((candidate, jc, gc, lc, rc));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((sc, jc, gc, lc, rc)) = accepted else {
            break;
        };
        s = sc;
        j = jc;
        g = gc;
        lambda = lc;
        residual = rc;
        history.push(j);
        iterations += 1;
        converged = residual <= tol;
    }

    Ok(StaticFitResult {
        sdm: Sdm::from_matrix_unchecked(s),
        lagrange: lambda,
        residual,
        iterations,
        barrier: mu,
        converged,
        objective_history: history,
    })
}

/// The `℧` index set of a table, copied as a plain set for moment storage.
pub fn mho_set(table: &StructureTable) -> Result<IndexSet> {
    IndexSet::from_indices(IndexSetKind::Mho, table.mho().indices().to_vec())
}
