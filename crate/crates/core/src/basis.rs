//! Orthonormal basis families, lattice index sets and structure matrices.
//!
//! Two families are supported:
//!
//! * `Fourier`: `φ_k(x) = exp(i kᵀx)` on the torus `[0, 2π)^n` with the
//!   uniform weight `(2π)^{-n}`, indexed by `k ∈ Z^n`.
//! * `Hermite`: `φ_k(x) = He_k(x) / sqrt(k!)` (probabilists' Hermite
//!   polynomials, tensorized) on `R^n` with the standard normal weight,
//!   indexed by `k ∈ Z_+^n`.
//!
//! Both satisfy `φ_j conj(φ_k) = Σ_ℓ e_{jkℓ} φ_ℓ` with finitely many nonzero
//! terms. The coefficients are gathered into the structure matrices
//! `E_ℓ = (e_{jkℓ})_{j,k ∈ Λ}`, which are sparse and stored as triplets.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, ZERO};

/// Basis family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Fourier,
    Hermite,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Fourier => write!(f, "fourier"),
            Family::Hermite => write!(f, "hermite"),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fourier" => Ok(Family::Fourier),
            "hermite" => Ok(Family::Hermite),
            other => Err(Error::Parse(format!("unknown basis family `{other}`"))),
        }
    }
}

/// A lattice label `k ∈ Z^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<i32>);

impl MultiIndex {
    pub fn new(entries: impl Into<Vec<i32>>) -> Self {
        MultiIndex(entries.into())
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }

    pub fn dot(&self, other: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as f64 * b as f64)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn max_abs(&self) -> i32 {
        self.0.iter().map(|e| e.abs()).max().unwrap_or(0)
    }

    /// Entries joined by underscores, as used in file names.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("_")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Which role an index set plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexSetKind {
    /// Labels of the basis functions entering the SDM.
    Lambda,
    /// Labels of the nonzero structure matrices (moment support).
    Mho,
    /// Any other lattice set (e.g. extended moment supports).
    Other,
}

/// A lexicographically ordered set of multi-indices with O(1) position lookup.
#[derive(Debug, Clone)]
pub struct IndexSet {
    kind: IndexSetKind,
    dim: usize,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
}

impl IndexSet {
    /// Builds a set from arbitrary indices; duplicates are removed and the
    /// result is sorted lexicographically.
    pub fn from_indices(kind: IndexSetKind, indices: Vec<MultiIndex>) -> Result<Self> {
        let dim = indices
            .first()
            .map(MultiIndex::dim)
            .ok_or_else(|| Error::InvalidArgument("empty index set".into()))?;
        if dim == 0 {
            return Err(Error::InvalidArgument("zero-dimensional multi-index".into()));
        }
        if let Some(bad) = indices.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.dim(),
            });
        }
        let mut indices = indices;
        indices.sort();
        indices.dedup();
        let positions = indices
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i))
            .collect();
        Ok(IndexSet {
            kind,
            dim,
            indices,
            positions,
        })
    }

    /// The cube `([lo, hi] ∩ Z)^n` in lexicographic order.
    pub fn cube(kind: IndexSetKind, n: usize, lo: i32, hi: i32) -> Result<Self> {
        if n == 0 || hi < lo {
            return Err(Error::InvalidArgument(format!(
                "empty cube: n = {n}, range [{lo}, {hi}]"
            )));
        }
        let side = (hi - lo + 1) as usize;
        let total = side.pow(n as u32);
        let mut indices = Vec::with_capacity(total);
        let mut cur = vec![lo; n];
        for _ in 0..total {
            indices.push(MultiIndex(cur.clone()));
            for d in (0..n).rev() {
                if cur[d] < hi {
                    cur[d] += 1;
                    break;
                }
                cur[d] = lo;
            }
        }
        Self::from_indices(kind, indices)
    }

    pub fn kind(&self) -> IndexSetKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, pos: usize) -> &MultiIndex {
        &self.indices[pos]
    }

    pub fn position(&self, k: &MultiIndex) -> Option<usize> {
        self.positions.get(k).copied()
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        self.positions.contains_key(k)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }

    /// Largest absolute entry over all indices.
    pub fn max_abs(&self) -> i32 {
        self.indices.iter().map(MultiIndex::max_abs).max().unwrap_or(0)
    }

    /// `{a + b}` over `a ∈ self`, `b ∈ other`.
    pub fn minkowski_sum(&self, other: &IndexSet, kind: IndexSetKind) -> Result<IndexSet> {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.indices {
            for b in &other.indices {
                out.push(a.add(b));
            }
        }
        IndexSet::from_indices(kind, out)
    }

    /// `{a - b}` over `a ∈ self`, `b ∈ other`.
    pub fn minkowski_difference(&self, other: &IndexSet, kind: IndexSetKind) -> Result<IndexSet> {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.indices {
            for b in &other.indices {
                out.push(a.sub(b));
            }
        }
        IndexSet::from_indices(kind, out)
    }
}

/// Family plus dimension; the weight is implied by the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: Family,
    pub dimension: usize,
}

impl BasisSpec {
    pub fn new(family: Family, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("basis dimension must be ≥ 1".into()));
        }
        Ok(BasisSpec { family, dimension })
    }

    pub fn weight(&self, x: &[f64]) -> f64 {
        weight(self.family, x)
    }
}

/// Builds `(Λ, ℧)` for the cube convention: Fourier `Λ = [-r, r]^n`,
/// `℧ = [-2r, 2r]^n`; Hermite `Λ = [0, r]^n`, `℧ = [0, 2r]^n`.
pub fn build_index_set(family: Family, n: usize, r: i32) -> Result<(IndexSet, IndexSet)> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("dimension n = {n} must be ≥ 1")));
    }
    if r < 1 {
        return Err(Error::InvalidArgument(format!("order r = {r} must be ≥ 1")));
    }
    match family {
        Family::Fourier => Ok((
            IndexSet::cube(IndexSetKind::Lambda, n, -r, r)?,
            IndexSet::cube(IndexSetKind::Mho, n, -2 * r, 2 * r)?,
        )),
        Family::Hermite => Ok((
            IndexSet::cube(IndexSetKind::Lambda, n, 0, r)?,
            IndexSet::cube(IndexSetKind::Mho, n, 0, 2 * r)?,
        )),
    }
}

const EXACT_FACTORIAL_MAX: u32 = 20;

/// `ln(k!)`, exact through 20! and via log-gamma beyond.
pub fn ln_factorial(k: u32) -> f64 {
    if k <= EXACT_FACTORIAL_MAX {
        factorial(k).ln()
    } else {
        statrs::function::gamma::ln_gamma(k as f64 + 1.0)
    }
}

fn factorial(k: u32) -> f64 {
    if k <= EXACT_FACTORIAL_MAX {
        (1..=k as u64).product::<u64>() as f64
    } else {
        ln_factorial(k).exp()
    }
}

/// One-dimensional Hermite structure coefficient `E_ν(φ_j φ_k φ_ℓ)`.
pub fn hermite_coefficient_1d(j: u32, k: u32, l: u32) -> f64 {
    let s = j + k + l;
    if s % 2 != 0 {
        return 0.0;
    }
    let m = s / 2;
    if m < j || m < k || m < l {
        return 0.0;
    }
    if j.max(k).max(l) <= EXACT_FACTORIAL_MAX && m <= EXACT_FACTORIAL_MAX {
        (factorial(j) * factorial(k) * factorial(l)).sqrt()
            / (factorial(m - j) * factorial(m - k) * factorial(m - l))
    } else {
        (0.5 * (ln_factorial(j) + ln_factorial(k) + ln_factorial(l))
            - ln_factorial(m - j)
            - ln_factorial(m - k)
            - ln_factorial(m - l))
            .exp()
    }
}

/// Structure coefficient `e_{jkℓ}` with `φ_j conj(φ_k) = Σ_ℓ e_{jkℓ} φ_ℓ`.
///
/// Indices of the wrong dimension, or negative Hermite indices, give zero.
pub fn structure_coefficient(
    family: Family,
    j: &MultiIndex,
    k: &MultiIndex,
    l: &MultiIndex,
) -> Complex64 {
    if j.dim() != k.dim() || j.dim() != l.dim() {
        return ZERO;
    }
    match family {
        Family::Fourier => {
            if j.sub(k) == *l {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        }
        Family::Hermite => {
            let mut value = 1.0;
            for ((&a, &b), &c) in j.0.iter().zip(&k.0).zip(&l.0) {
                if a < 0 || b < 0 || c < 0 {
                    return ZERO;
                }
                value *= hermite_coefficient_1d(a as u32, b as u32, c as u32);
                if value == 0.0 {
                    return ZERO;
                }
            }
            Complex64::new(value, 0.0)
        }
    }
}

/// A sparse structure matrix stored as `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMatrix {
    entries: Vec<(usize, usize, Complex64)>,
}

impl StructureMatrix {
    pub fn from_entries(mut entries: Vec<(usize, usize, Complex64)>) -> Self {
        entries.retain(|e| e.2 != ZERO);
        entries.sort_by_key(|e| (e.1, e.0));
        StructureMatrix { entries }
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self, n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for &(j, k, v) in &self.entries {
            m[(j, k)] = v;
        }
        m
    }

    /// `⟨E, X⟩ = Tr(E* X)`.
    pub fn inner(&self, x: &CMatrix) -> Complex64 {
        self.entries
            .iter()
            .map(|&(j, k, v)| v.conj() * x[(j, k)])
            .sum()
    }

    /// `x += c E`.
    pub fn axpy(&self, c: Complex64, x: &mut CMatrix) {
        for &(j, k, v) in &self.entries {
            x[(j, k)] += c * v;
        }
    }

    /// `⟨self, other⟩` between two sparse structure matrices.
    pub fn inner_sparse(&self, other: &StructureMatrix) -> Complex64 {
        let mut acc = ZERO;
        let (mut a, mut b) = (0, 0);
        let key = |e: &(usize, usize, Complex64)| (e.1, e.0);
        while a < self.entries.len() && b < other.entries.len() {
            let (ka, kb) = (key(&self.entries[a]), key(&other.entries[b]));
            match ka.cmp(&kb) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.entries[a].2.conj() * other.entries[b].2;
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }
}

/// The nonzero structure matrices `E_ℓ`, `ℓ ∈ ℧`, aligned with `mho` order.
#[derive(Debug, Clone)]
pub struct StructureTable {
    family: Family,
    lambda: IndexSet,
    mho: IndexSet,
    matrices: Vec<StructureMatrix>,
    zero_pos: usize,
}

impl StructureTable {
    /// Assembles a table from parts. `mho` and `matrices` must align and
    /// `mho` must contain the zero index. No check that the matrices match
    /// the family's coefficients is performed.
    pub fn from_parts(
        family: Family,
        lambda: IndexSet,
        mho: IndexSet,
        matrices: Vec<StructureMatrix>,
    ) -> Result<Self> {
        if mho.len() != matrices.len() {
            return Err(Error::DimensionMismatch {
                expected: mho.len(),
                actual: matrices.len(),
            });
        }
        let zero_pos = mho
            .position(&MultiIndex::zero(mho.dim()))
            .ok_or_else(|| Error::InvalidArgument("℧ must contain the zero index".into()))?;
        Ok(StructureTable {
            family,
            lambda,
            mho,
            matrices,
            zero_pos,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.lambda.dim()
    }

    pub fn lambda(&self) -> &IndexSet {
        &self.lambda
    }

    pub fn mho(&self) -> &IndexSet {
        &self.mho
    }

    /// `N = #Λ`.
    pub fn n_basis(&self) -> usize {
        self.lambda.len()
    }

    /// `L = #℧`.
    pub fn n_moments(&self) -> usize {
        self.mho.len()
    }

    pub fn matrices(&self) -> &[StructureMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, pos: usize) -> &StructureMatrix {
        &self.matrices[pos]
    }

    pub fn matrix_for(&self, l: &MultiIndex) -> Option<&StructureMatrix> {
        self.mho.position(l).map(|p| &self.matrices[p])
    }

    pub fn zero_position(&self) -> usize {
        self.zero_pos
    }

    pub fn dense(&self, pos: usize) -> CMatrix {
        self.matrices[pos].to_dense(self.n_basis())
    }

    /// Largest entry of `Λ` in absolute value (the `r` of a cube).
    pub fn order(&self) -> i32 {
        self.lambda.max_abs()
    }

    /// Writes one CSV per `E_ℓ`, named `E_<ℓ joined by _>.csv`, row-major
    /// with each cell written as a `re,im` pair.
    pub fn write_csv_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let n = self.n_basis();
        for (l, e) in self.mho.iter().zip(&self.matrices) {
            let dense = e.to_dense(n);
            let path = dir.join(format!("E_{}.csv", l.label()));
            let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
            for j in 0..n {
                let row: Vec<String> = (0..n)
                    .map(|k| format!("{},{}", dense[(j, k)].re, dense[(j, k)].im))
                    .collect();
                writeln!(w, "{}", row.join(","))?;
            }
        }
        Ok(())
    }
}

/// Builds every nonzero `E_ℓ` for the given `Λ`. The returned `℧` contains
/// exactly the labels with `E_ℓ ≠ 0`.
pub fn build_structure_table(family: Family, lambda: &IndexSet) -> Result<StructureTable> {
    if family == Family::Hermite {
        if let Some(bad) = lambda.iter().find(|k| k.0.iter().any(|&e| e < 0)) {
            return Err(Error::InvalidArgument(format!(
                "Hermite index {bad} has a negative entry"
            )));
        }
    }
    let mut by_label: BTreeMap<MultiIndex, Vec<(usize, usize, Complex64)>> = BTreeMap::new();
    for (jp, j) in lambda.iter().enumerate() {
        for (kp, k) in lambda.iter().enumerate() {
            match family {
                Family::Fourier => {
                    by_label
                        .entry(j.sub(k))
                        .or_default()
                        .push((jp, kp, Complex64::new(1.0, 0.0)));
                }
                Family::Hermite => {
                    // ℓ_d ranges over |j_d - k_d|, ..., j_d + k_d in steps of 2.
                    let ranges: Vec<(i32, i32)> = j
                        .0
                        .iter()
                        .zip(&k.0)
                        .map(|(a, b)| ((a - b).abs(), a + b))
                        .collect();
                    let mut cur: Vec<i32> = ranges.iter().map(|r| r.0).collect();
                    loop {
                        let l = MultiIndex(cur.clone());
                        let v = structure_coefficient(family, j, k, &l);
                        if v != ZERO {
                            by_label.entry(l).or_default().push((jp, kp, v));
                        }
                        if !advance_odometer(&mut cur, &ranges, 2) {
                            break;
                        }
                    }
                }
            }
        }
    }
    by_label.retain(|_, v| !v.is_empty());
    let labels: Vec<MultiIndex> = by_label.keys().cloned().collect();
    let mho = IndexSet::from_indices(IndexSetKind::Mho, labels)?;
    let matrices = by_label
        .into_values()
        .map(StructureMatrix::from_entries)
        .collect();
    StructureTable::from_parts(family, lambda.clone(), mho, matrices)
}

/// Steps `cur` through the box `ranges` (inclusive) with the given stride,
/// last axis fastest. Returns `false` once every point has been visited.
fn advance_odometer(cur: &mut [i32], ranges: &[(i32, i32)], step: i32) -> bool {
    for d in (0..cur.len()).rev() {
        if cur[d] + step <= ranges[d].1 {
            cur[d] += step;
            return true;
        }
        cur[d] = ranges[d].0;
    }
    false
}

/// Convenience: `build_index_set` followed by `build_structure_table`.
pub fn cube_table(family: Family, n: usize, r: i32) -> Result<StructureTable> {
    let (lambda, _) = build_index_set(family, n, r)?;
    build_structure_table(family, &lambda)
}

/// Normalized probabilists' Hermite values `He_k(x)/sqrt(k!)` for `k = 0..=kmax`,
/// by the three-term recurrence.
pub fn hermite_normalized(x: f64, kmax: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(kmax + 1);
    h.push(1.0);
    if kmax >= 1 {
        h.push(x);
    }
    for k in 1..kmax {
        let next = (x * h[k] - (k as f64).sqrt() * h[k - 1]) / ((k + 1) as f64).sqrt();
        h.push(next);
    }
    h
}

/// `φ_k(x)` for a single index.
pub fn eval_basis_function(family: Family, k: &MultiIndex, x: &[f64]) -> Complex64 {
    match family {
        Family::Fourier => {
            let phase: f64 = k.0.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
            Complex64::from_polar(1.0, phase)
        }
        Family::Hermite => {
            let mut v = 1.0;
            for (&a, &b) in k.0.iter().zip(x) {
                v *= hermite_normalized(b, a.max(0) as usize)[a.max(0) as usize];
            }
            Complex64::new(v, 0.0)
        }
    }
}

/// Per-axis tables of `φ` values for `|k_d| ≤ kmax`, offset so that entry
/// `kmax + k` holds `k` (Fourier) or entry `k` holds `k` (Hermite).
fn axis_tables(family: Family, x: &[f64], kmax: usize) -> Vec<Vec<Complex64>> {
    x.iter()
        .map(|&xd| match family {
            Family::Fourier => (0..=2 * kmax)
                .map(|i| Complex64::from_polar(1.0, (i as f64 - kmax as f64) * xd))
                .collect(),
            Family::Hermite => hermite_normalized(xd, kmax)
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect(),
        })
        .collect()
}

/// Evaluates `(φ_k(x))_{k ∈ set}`.
pub fn eval_basis_vector(family: Family, set: &IndexSet, x: &[f64]) -> Result<CVector> {
    if x.len() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            actual: x.len(),
        });
    }
    let kmax = set.max_abs() as usize;
    let tables = axis_tables(family, x, kmax);
    let offset = match family {
        Family::Fourier => kmax as i32,
        Family::Hermite => 0,
    };
    Ok(CVector::from_iterator(
        set.len(),
        set.iter().map(|k| {
            k.0.iter()
                .enumerate()
                .map(|(d, &kd)| tables[d][(kd + offset) as usize])
                .product()
        }),
    ))
}

/// The weight `ν(x)`: `(2π)^{-n}` (Fourier) or the standard normal density.
pub fn weight(family: Family, x: &[f64]) -> f64 {
    let n = x.len() as f64;
    match family {
        Family::Fourier => (2.0 * PI).powf(-n),
        Family::Hermite => {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            (2.0 * PI).powf(-n / 2.0) * (-0.5 * r2).exp()
        }
    }
}

/// Gram matrix `(⟨E_ℓ, E_m⟩)_{ℓ,m ∈ ℧}`.
pub fn gram_matrix(table: &StructureTable) -> CMatrix {
    let l = table.n_moments();
    let mut g = CMatrix::zeros(l, l);
    for a in 0..l {
        for b in a..l {
            let v = table.matrix(a).inner_sparse(table.matrix(b));
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    g
}

/// Relative singular-value threshold used by [`effective_dimension`].
pub const RANK_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Number of effective SDM parameters: numerical rank of the Gram matrix.
pub fn effective_dimension(table: &StructureTable) -> usize {
    let g = gram_matrix(table);
    numerical_rank(&g, RANK_RELATIVE_TOLERANCE)
}

pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * largest).count()
}

/// Real view of a structure matrix (Hermite tables are real).
pub fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}
