//! Stochastic density matrices and the densities they define.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{eval_basis_vector, weight, Family, MultiIndex, StructureTable};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::mesh::{scatter_to_cube, Mesh};

/// `max |S - S*|` allowed for a valid SDM.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// `|Tr S - 1|` allowed for a valid SDM.
pub const TRACE_TOLERANCE: f64 = 1e-9;
/// Most negative eigenvalue accepted as PSD round-off.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Imaginary residue of `Φ* S Φ` discarded silently.
pub const IMAGINARY_TOLERANCE: f64 = 1e-12;

/// A Hermitian, positive semi-definite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Sdm {
    matrix: CMatrix,
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub hermitian_defect: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    /// Eigenvalues above `PSD_TOLERANCE · max eigenvalue`.
    pub rank: usize,
    pub passed: bool,
}

/// Checks Hermiticity, unit trace and positive semi-definiteness of a matrix
/// meant to act on `n_basis` basis functions.
pub fn validate(matrix: &CMatrix, n_basis: usize) -> Result<ValidationReport> {
    if matrix.nrows() != n_basis || matrix.ncols() != n_basis {
        return Err(Error::DimensionMismatch {
            expected: n_basis,
            actual: matrix.nrows().max(matrix.ncols()),
        });
    }
    let hermitian_defect = linalg::hermitian_defect(matrix);
    let trace_deviation = (linalg::trace(matrix) - Complex64::new(1.0, 0.0)).norm();
    let eig = linalg::hermitian_eigenvalues(&linalg::hermitized(matrix.clone()));
    let min_eigenvalue = eig.first().copied().unwrap_or(f64::NAN);
    let max_eigenvalue = eig.last().copied().unwrap_or(f64::NAN);
    let rank = eig
        .iter()
        .filter(|&&v| v > PSD_TOLERANCE * max_eigenvalue.abs().max(1e-300))
        .count();
    let passed = hermitian_defect <= HERMITIAN_TOLERANCE
        && trace_deviation <= TRACE_TOLERANCE
        && min_eigenvalue >= -PSD_TOLERANCE;
    Ok(ValidationReport {
        hermitian_defect,
        trace_deviation,
        min_eigenvalue,
        rank,
        passed,
    })
}

impl Sdm {
    /// Wraps a matrix after validating it.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let report = validate(&matrix, matrix.nrows())?;
        if !report.passed {
            return Err(Error::InvalidSdm(format!(
                "hermitian defect {:.3e}, trace deviation {:.3e}, min eigenvalue {:.3e}",
                report.hermitian_defect, report.trace_deviation, report.min_eigenvalue
            )));
        }
        Ok(Sdm { matrix })
    }

    /// Wraps a matrix without checks. Used on hot paths that maintain the
    /// invariants themselves (the integrator and the Newton solver).
    pub fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Sdm { matrix }
    }

    /// Hermitizes and rescales to unit trace, then validates.
    pub fn normalized(mut matrix: CMatrix) -> Result<Self> {
        linalg::hermitize(&mut matrix);
        let tr = linalg::trace(&matrix).re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::InvalidSdm(format!("trace {tr} cannot be normalized")));
        }
        matrix /= Complex64::new(tr, 0.0);
        Sdm::new(matrix)
    }

    /// `I_N / N`.
    pub fn maximally_mixed(n: usize) -> Self {
        Sdm {
            matrix: CMatrix::identity(n, n) / Complex64::new(n as f64, 0.0),
        }
    }

    /// The rank-one SDM `u u* / |u|²`.
    pub fn pure(u: &CVector) -> Result<Self> {
        let norm2 = u.norm_squared();
        if norm2 == 0.0 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        Sdm::new(u * u.adjoint() / Complex64::new(norm2, 0.0))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.matrix, self.size()).expect("square by construction")
    }

    /// Convex combination `α self + (1 - α) other`.
    pub fn mix(&self, alpha: f64, other: &Sdm) -> Result<Sdm> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                actual: other.size(),
            });
        }
        Ok(Sdm {
            matrix: &self.matrix * Complex64::new(alpha, 0.0)
                + &other.matrix * Complex64::new(1.0 - alpha, 0.0),
        })
    }
}

fn check_dims(s: &Sdm, table: &StructureTable) -> Result<()> {
    if s.size() != table.n_basis() {
        return Err(Error::DimensionMismatch {
            expected: table.n_basis(),
            actual: s.size(),
        });
    }
    Ok(())
}

/// `p_S(x) = ν(x) Φ(x)* S Φ(x)`.
pub fn eval_pdf(s: &Sdm, table: &StructureTable, x: &[f64]) -> Result<f64> {
    check_dims(s, table)?;
    let phi = eval_basis_vector(table.family(), table.lambda(), x)?;
    let q = (phi.adjoint() * s.matrix() * &phi)[(0, 0)];
    if q.im.abs() > IMAGINARY_TOLERANCE * q.re.abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "quadratic form has imaginary part {:.3e}",
            q.im
        )));
    }
    let mut value = weight(table.family(), x) * q.re;
    if value < 0.0 && value >= -1e-12 {
        value = 0.0;
    }
    Ok(value)
}

/// `C(S) = (⟨E_ℓ, S⟩)_{ℓ ∈ ℧}`.
pub fn coefficient_map(s: &Sdm, table: &StructureTable) -> Result<CVector> {
    check_dims(s, table)?;
    Ok(coefficients_of(s.matrix(), table))
}

/// `(⟨E_ℓ, X⟩)_{ℓ ∈ ℧}` for any square matrix.
pub fn coefficients_of(x: &CMatrix, table: &StructureTable) -> CVector {
    CVector::from_iterator(
        table.n_moments(),
        table.matrices().iter().map(|e| e.inner(x)),
    )
}

/// Generalized moment `E_p φ_m = ⟨E_m, S⟩`, exactly zero for `m ∉ ℧`.
pub fn moment(s: &Sdm, table: &StructureTable, m: &MultiIndex) -> Result<Complex64> {
    check_dims(s, table)?;
    Ok(table
        .matrix_for(m)
        .map(|e| e.inner(s.matrix()))
        .unwrap_or(ZERO))
}

/// Second-order Renyi entropy of `p_S` relative to the weight,
/// `ln(1 + Σ_{ℓ ≠ 0} |⟨E_ℓ, S⟩|²)`.
pub fn renyi_vs_weight(s: &Sdm, table: &StructureTable) -> Result<f64> {
    let c = coefficient_map(s, table)?;
    let zero = table.zero_position();
    let tail: f64 = c
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != zero)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    Ok(tail.ln_1p())
}

/// Spectral mixture form `S = U diag(σ) U*`.
#[derive(Debug, Clone)]
pub struct SosDecomposition {
    /// Eigenvalues, clamped to `[0, 1]`, descending.
    pub weights: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub mixers: CMatrix,
}

impl SosDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let diag = CVector::from_iterator(
            self.weights.len(),
            self.weights.iter().map(|&w| Complex64::new(w, 0.0)),
        );
        &self.mixers * CMatrix::from_diagonal(&diag) * self.mixers.adjoint()
    }

    /// `θ(x) = U* Φ(x)`, i.e. `θ_j = Σ_k conj(u_kj) φ_k`.
    pub fn theta(&self, table: &StructureTable, x: &[f64]) -> Result<CVector> {
        let phi = eval_basis_vector(table.family(), table.lambda(), x)?;
        Ok(self.mixers.adjoint() * phi)
    }

    /// `ν(x) Σ_j σ_j |θ_j(x)|²`.
    pub fn eval_pdf(&self, table: &StructureTable, x: &[f64]) -> Result<f64> {
        let theta = self.theta(table, x)?;
        let q: f64 = self
            .weights
            .iter()
            .zip(theta.iter())
            .map(|(w, t)| w * t.norm_sqr())
            .sum();
        Ok(weight(table.family(), x) * q)
    }
}

/// Eigendecomposition with eigenvalues clamped to `[0, 1]` in descending
/// order; each eigenvector's first non-negligible component is made real
/// positive.
pub fn sos_decomposition(s: &Sdm) -> SosDecomposition {
    let eig = linalg::hermitized(s.matrix().clone()).symmetric_eigen();
    let n = s.size();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut mixers = CMatrix::zeros(n, n);
    let mut weights = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        weights.push(eig.eigenvalues[src].clamp(0.0, 1.0));
        let mut v = eig.eigenvectors.column(src).into_owned();
        if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = Complex64::from_polar(1.0, -pivot.arg());
            v *= phase;
        }
        mixers.set_column(col, &v);
    }
    SosDecomposition { weights, mixers }
}

/// Fourier SDM density on a periodic mesh, `p = (2π)^{-n} Σ_ℓ ⟨S, E_ℓ⟩ e^{iℓᵀx}`.
pub fn pdf_on_mesh(s: &Sdm, table: &StructureTable, mesh: &Mesh) -> Result<Vec<f64>> {
    check_dims(s, table)?;
    if table.family() != Family::Fourier {
        return Err(Error::InvalidArgument(
            "mesh evaluation is defined for the Fourier family only".into(),
        ));
    }
    if mesh.n != table.dim() {
        return Err(Error::DimensionMismatch {
            expected: table.dim(),
            actual: mesh.n,
        });
    }
    let c = coefficients_of(s.matrix(), table);
    let kmax = table.mho().max_abs() as usize;
    let cube = scatter_to_cube(
        table.dim(),
        kmax,
        table.mho().iter().zip(c.iter().map(|z| z.conj())),
    );
    let scale = (2.0 * PI).powi(-(table.dim() as i32));
    Ok(mesh
        .synthesize(kmax, &cube)
        .into_iter()
        .map(|z| z.re * scale)
        .collect())
}
