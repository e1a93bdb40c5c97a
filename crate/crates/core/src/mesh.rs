//! Uniform periodic meshes on the torus and separable trigonometric
//! transforms between mesh values and coefficient cubes.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::basis::{IndexSet, MultiIndex};
use crate::error::{Error, Result};
use crate::linalg::ZERO;

/// The mesh `x_i = 2π i / M`, `i = 0..M-1`, in each of `n` dimensions.
/// Flat storage is row-major with the last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mesh {
    pub n: usize,
    pub m: usize,
}

impl Mesh {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument(format!("empty mesh n = {n}, M = {m}")));
        }
        Ok(Mesh { n, m })
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Per-axis integer coordinates of a flat index.
    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for d in (0..self.n).rev() {
            out[d] = idx % self.m;
            idx /= self.m;
        }
        out
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.unflatten(idx)
            .into_iter()
            .map(|i| self.coordinate(i))
            .collect()
    }

    /// Flat-index stride of axis `d`.
    pub fn stride(&self, d: usize) -> usize {
        self.m.pow((self.n - 1 - d) as u32)
    }

    /// Rectangle-rule integral of mesh values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Values of `Σ_k c_k exp(i kᵀx)` on the mesh, with `c` a dense cube
    /// `[-kmax, kmax]^n` in lexicographic order.
    pub fn synthesize(&self, kmax: usize, coeffs: &[Complex64]) -> Vec<Complex64> {
        let side = 2 * kmax + 1;
        assert_eq!(coeffs.len(), side.pow(self.n as u32));
        // table[x][k] = exp(i (k - kmax) x)
        let table: Vec<Vec<Complex64>> = (0..self.m)
            .map(|x| {
                (0..side)
                    .map(|k| {
                        Complex64::from_polar(1.0, (k as f64 - kmax as f64) * self.coordinate(x))
                    })
                    .collect()
            })
            .collect();
        let mut shape = vec![side; self.n];
        let mut data = coeffs.to_vec();
        for d in 0..self.n {
            data = contract_axis(&data, &mut shape, d, &table);
        }
        data
    }

    /// Rectangle-rule quadrature `∫ f(x) exp(i kᵀx) dx` for every `k` in the
    /// cube `[-kmax, kmax]^n`, returned in lexicographic order.
    pub fn analyze(&self, kmax: usize, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len());
        let side = 2 * kmax + 1;
        let table: Vec<Vec<Complex64>> = (0..side)
            .map(|k| {
                (0..self.m)
                    .map(|x| {
                        Complex64::from_polar(1.0, (k as f64 - kmax as f64) * self.coordinate(x))
                    })
                    .collect()
            })
            .collect();
        let mut shape = vec![self.m; self.n];
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for d in 0..self.n {
            data = contract_axis(&data, &mut shape, d, &table);
        }
        let vol = self.cell_volume();
        data.iter_mut().for_each(|z| *z *= vol);
        data
    }

    /// Quadrature moments `∫ f φ_k dx` (Fourier `φ_k`) for the indices of `set`.
    ///
    /// Fails if the mesh cannot resolve the set without aliasing.
    pub fn fourier_moments(&self, values: &[f64], set: &IndexSet) -> Result<Vec<Complex64>> {
        let kmax = set.max_abs() as usize;
        if self.m <= 2 * kmax {
            return Err(Error::MeshTooCoarse {
                points: self.m,
                required: 2 * kmax,
            });
        }
        let cube = self.analyze(kmax, values);
        Ok(set.iter().map(|k| cube[cube_position(k, kmax)]).collect())
    }
}

/// Position of `k` inside the lexicographic cube `[-kmax, kmax]^n`.
pub fn cube_position(k: &MultiIndex, kmax: usize) -> usize {
    let side = 2 * kmax + 1;
    k.0.iter()
        .fold(0, |acc, &e| acc * side + (e + kmax as i32) as usize)
}

/// Scatters `(index, value)` pairs into a dense cube `[-kmax, kmax]^n`.
pub fn scatter_to_cube<'a>(
    n: usize,
    kmax: usize,
    items: impl Iterator<Item = (&'a MultiIndex, Complex64)>,
) -> Vec<Complex64> {
    let mut cube = vec![ZERO; (2 * kmax + 1).pow(n as u32)];
    for (k, v) in items {
        cube[cube_position(k, kmax)] += v;
    }
    cube
}

/// Replaces axis `d` (current extent `shape[d]`) by `table.len()` entries:
/// `out[.., x, ..] = Σ_k in[.., k, ..] table[x][k]`.
fn contract_axis(
    data: &[Complex64],
    shape: &mut [usize],
    d: usize,
    table: &[Vec<Complex64>],
) -> Vec<Complex64> {
    let outer: usize = shape[..d].iter().product();
    let inner: usize = shape[d + 1..].iter().product();
    let old = shape[d];
    let new = table.len();
    let mut out = vec![ZERO; outer * new * inner];
    for o in 0..outer {
        for (x, row) in table.iter().enumerate() {
            let dst = &mut out[(o * new + x) * inner..(o * new + x + 1) * inner];
            for (k, &w) in row.iter().enumerate().take(old) {
                if w == ZERO {
                    continue;
                }
                let src = &data[(o * old + k) * inner..(o * old + k + 1) * inner];
                for (a, &b) in dst.iter_mut().zip(src) {
                    *a += w * b;
                }
            }
        }
    }
    shape[d] = new;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::IndexSetKind;

    #[test]
    fn synthesize_matches_direct_sum() {
        let mesh = Mesh::new(2, 7).unwrap();
        let kmax = 1;
        let coeffs: Vec<Complex64> = (0..9)
            .map(|i| Complex64::new(i as f64 * 0.1, 0.05 * i as f64 - 0.2))
            .collect();
        let vals = mesh.synthesize(kmax, &coeffs);
        let set = IndexSet::cube(IndexSetKind::Other, 2, -1, 1).unwrap();
        for idx in [0, 5, 17, 48] {
            let x = mesh.point(idx);
            let direct: Complex64 = set
                .iter()
                .zip(&coeffs)
                .map(|(k, c)| c * Complex64::from_polar(1.0, k.0[0] as f64 * x[0] + k.0[1] as f64 * x[1]))
                .sum();
            assert!((direct - vals[idx]).norm() < 1e-13);
        }
    }

    #[test]
    fn analyze_inverts_synthesis_for_resolved_polynomials() {
        let mesh = Mesh::new(2, 8).unwrap();
        let kmax = 2;
        let side = 5;
        let mut coeffs = vec![ZERO; side * side];
        coeffs[cube_position(&MultiIndex::new(vec![0, 0]), kmax)] = Complex64::new(1.0, 0.0);
        coeffs[cube_position(&MultiIndex::new(vec![1, -2]), kmax)] = Complex64::new(0.3, 0.2);
        coeffs[cube_position(&MultiIndex::new(vec![-1, 2]), kmax)] = Complex64::new(0.3, -0.2);
        let vals: Vec<f64> = mesh.synthesize(kmax, &coeffs).iter().map(|z| z.re).collect();
        let moments = mesh.analyze(kmax, &vals);
        // ∫ f e^{ikx} = (2π)^2 c_{-k}
        let scale = (2.0 * PI).powi(2);
        let m = moments[cube_position(&MultiIndex::new(vec![-1, 2]), kmax)];
        assert!((m - Complex64::new(0.3, 0.2) * scale).norm() < 1e-12);
    }

    #[test]
    fn coarse_mesh_rejected() {
        let mesh = Mesh::new(1, 8).unwrap();
        let set = IndexSet::cube(IndexSetKind::Mho, 1, -4, 4).unwrap();
        assert!(mesh.fourier_moments(&vec![1.0; 8], &set).is_err());
    }
}
