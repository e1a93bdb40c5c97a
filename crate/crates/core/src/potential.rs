//! Real trigonometric potentials on the torus.
//!
//! Coefficients are stored on the half-lattice (first nonzero entry of `k`
//! positive) and mirrored on read, so `V_{-k} = conj(V_k)` holds exactly.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::basis::{IndexSet, IndexSetKind, MultiIndex};
use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::mesh::Mesh;

/// Default mean of the exponential amplitude distribution.
pub const DEFAULT_AMPLITUDE_MEAN: f64 = 0.25;

/// `V(x) = Σ_k V_k exp(i kᵀx)` over `|k| ≤ R` (Euclidean), real-valued.
#[derive(Debug, Clone)]
pub struct Potential {
    n: usize,
    cutoff: f64,
    constant: f64,
    half: Vec<(MultiIndex, Complex64)>,
    lookup: HashMap<MultiIndex, usize>,
    seed: Option<u64>,
    amplitude_mean: Option<f64>,
}

/// Sidecar metadata written next to the coefficient CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialMeta {
    pub n: usize,
    pub cutoff: f64,
    pub seed: Option<u64>,
    pub amplitude_mean: Option<f64>,
    pub harmonics: usize,
}

/// True when the first nonzero entry of `k` is positive.
pub fn is_half_lattice_representative(k: &MultiIndex) -> bool {
    k.0.iter().find(|&&e| e != 0).is_some_and(|&e| e > 0)
}

/// Lattice points `0 < |k| ≤ R` on the half-lattice, lexicographic.
fn half_disk(n: usize, cutoff: f64) -> Result<Vec<MultiIndex>> {
    let r = cutoff.floor() as i32;
    let cube = IndexSet::cube(IndexSetKind::Other, n, -r, r)?;
    Ok(cube
        .iter()
        .filter(|k| k.norm_sqr() <= cutoff * cutoff + 1e-9 && is_half_lattice_representative(k))
        .cloned()
        .collect())
}

impl Potential {
    /// Builds a potential from half-lattice coefficients. Entries off the
    /// half-lattice are folded onto their representative by conjugation.
    pub fn from_half_coefficients(
        n: usize,
        constant: f64,
        coefficients: Vec<(MultiIndex, Complex64)>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("potential dimension must be ≥ 1".into()));
        }
        let mut half: Vec<(MultiIndex, Complex64)> = Vec::with_capacity(coefficients.len());
        let mut lookup: HashMap<MultiIndex, usize> = HashMap::new();
        for (k, v) in coefficients {
            if k.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: k.dim(),
                });
            }
            if k.is_zero() {
                return Err(Error::InvalidArgument(
                    "pass the constant term separately".into(),
                ));
            }
            let (k, v) = if is_half_lattice_representative(&k) {
                (k, v)
            } else {
                (k.neg(), v.conj())
            };
            if let Some(&pos) = lookup.get(&k) {
                half[pos].1 += v;
            } else {
                lookup.insert(k.clone(), half.len());
                half.push((k, v));
            }
        }
        half.sort_by(|a, b| a.0.cmp(&b.0));
        let lookup = half
            .iter()
            .enumerate()
            .map(|(i, (k, _))| (k.clone(), i))
            .collect();
        let cutoff = half
            .iter()
            .map(|(k, _)| k.norm_sqr().sqrt())
            .fold(0.0, f64::max);
        Ok(Potential {
            n,
            cutoff,
            constant,
            half,
            lookup,
            seed: None,
            amplitude_mean: None,
        })
    }

    /// The zero potential.
    pub fn zero(n: usize) -> Self {
        Potential {
            n,
            cutoff: 0.0,
            constant: 0.0,
            half: Vec::new(),
            lookup: HashMap::new(),
            seed: None,
            amplitude_mean: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn amplitude_mean(&self) -> Option<f64> {
        self.amplitude_mean
    }

    /// Largest `|k_d|` among nonzero harmonics.
    pub fn max_frequency(&self) -> usize {
        self.half.iter().map(|(k, _)| k.max_abs()).max().unwrap_or(0) as usize
    }

    pub fn half_coefficients(&self) -> &[(MultiIndex, Complex64)] {
        &self.half
    }

    /// `V_k`, mirrored from the half-lattice.
    pub fn coefficient(&self, k: &MultiIndex) -> Complex64 {
        if k.dim() != self.n {
            return ZERO;
        }
        if k.is_zero() {
            return Complex64::new(self.constant, 0.0);
        }
        if let Some(&p) = self.lookup.get(k) {
            return self.half[p].1;
        }
        self.lookup
            .get(&k.neg())
            .map(|&p| self.half[p].1.conj())
            .unwrap_or(ZERO)
    }

    /// All `(k, V_k)` with `k ≠ 0` and `V_k ≠ 0`, both signs.
    pub fn support(&self) -> Vec<(MultiIndex, Complex64)> {
        let mut out = Vec::with_capacity(2 * self.half.len());
        for (k, v) in &self.half {
            if *v != ZERO {
                out.push((k.clone(), *v));
                out.push((k.neg(), v.conj()));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    fn phase(k: &MultiIndex, x: &[f64]) -> f64 {
        k.0.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum()
    }

    /// `V(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant
            + self
                .half
                .iter()
                .map(|(k, v)| 2.0 * (v * Complex64::from_polar(1.0, Self::phase(k, x))).re)
                .sum::<f64>()
    }

    /// `∇V(x)`.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for (k, v) in &self.half {
            // 2 Re(i k V_k e^{ikx})
            let w = v * Complex64::from_polar(1.0, Self::phase(k, x));
            for (gd, &kd) in g.iter_mut().zip(&k.0) {
                *gd += -2.0 * kd as f64 * w.im;
            }
        }
        g
    }

    /// `ΔV(x)`.
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        self.half
            .iter()
            .map(|(k, v)| -2.0 * k.norm_sqr() * (v * Complex64::from_polar(1.0, Self::phase(k, x))).re)
            .sum()
    }

    /// `V` on every mesh point.
    pub fn eval_mesh(&self, mesh: &Mesh) -> Vec<f64> {
        self.mesh_map(mesh, |k, w| {
            let _ = k;
            2.0 * w.re
        }, self.constant)
    }

    /// `ΔV` on every mesh point.
    pub fn laplacian_mesh(&self, mesh: &Mesh) -> Vec<f64> {
        self.mesh_map(mesh, |k, w| -2.0 * k.norm_sqr() * w.re, 0.0)
    }

    /// `∂V/∂x_d` at the shifted mesh `x + (h/2) e_d` (flux midpoints).
    pub fn grad_component_midpoints(&self, mesh: &Mesh, d: usize) -> Vec<f64> {
        let shift = 0.5 * mesh.spacing();
        (0..mesh.len())
            .map(|idx| {
                let mut x = mesh.point(idx);
                x[d] += shift;
                self.grad(&x)[d]
            })
            .collect()
    }

    fn mesh_map(&self, mesh: &Mesh, term: impl Fn(&MultiIndex, Complex64) -> f64, base: f64) -> Vec<f64> {
        let h = mesh.spacing();
        // per-axis tables e^{i k_d x_d}
        let kmax = self.max_frequency() as i32;
        let tables: Vec<Vec<Complex64>> = (-kmax..=kmax)
            .map(|k| (0..mesh.m).map(|i| Complex64::from_polar(1.0, k as f64 * i as f64 * h)).collect())
            .collect();
        (0..mesh.len())
            .map(|idx| {
                let coords = mesh.unflatten(idx);
                base + self
                    .half
                    .iter()
                    .map(|(k, v)| {
                        let e: Complex64 = k
                            .0
                            .iter()
                            .zip(&coords)
                            .map(|(&kd, &i)| tables[(kd + kmax) as usize][i])
                            .product();
                        term(k, v * e)
                    })
                    .sum::<f64>()
            })
            .collect()
    }

    /// `max_x |ΔV(x)|` estimated on a mesh with `m` points per dimension.
    pub fn laplacian_sup_norm(&self, m: usize) -> Result<f64> {
        let mesh = Mesh::new(self.n, m)?;
        Ok(self
            .laplacian_mesh(&mesh)
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max))
    }

    /// `Σ_k |k|² |V_k|`, an upper bound on `‖ΔV‖_∞`.
    pub fn laplacian_spectral_bound(&self) -> f64 {
        self.half
            .iter()
            .map(|(k, v)| 2.0 * k.norm_sqr() * v.norm())
            .sum()
    }

    pub fn meta(&self) -> PotentialMeta {
        PotentialMeta {
            n: self.n,
            cutoff: self.cutoff,
            seed: self.seed,
            amplitude_mean: self.amplitude_mean,
            harmonics: 2 * self.half.len() + 1,
        }
    }

    /// Writes `k1,…,kn,re,im` rows for the stored half-lattice (plus the
    /// constant term) and a JSON metadata sidecar.
    pub fn write_files(&self, csv_path: &Path, meta_path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
        let header: Vec<String> = (1..=self.n).map(|d| format!("k{d}")).collect();
        writeln!(w, "{},re,im", header.join(","))?;
        let zero = MultiIndex::zero(self.n);
        let rows = std::iter::once((&zero, Complex64::new(self.constant, 0.0)))
            .chain(self.half.iter().map(|(k, v)| (k, *v)));
        for (k, v) in rows {
            let ks: Vec<String> = k.0.iter().map(|e| e.to_string()).collect();
            writeln!(w, "{},{:e},{:e}", ks.join(","), v.re, v.im)?;
        }
        std::fs::write(meta_path, serde_json::to_string_pretty(&self.meta())?)?;
        Ok(())
    }

    /// Reads the CSV written by [`Potential::write_files`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty potential file".into()))?;
        let n = header.split(',').count().saturating_sub(2);
        let mut constant = 0.0;
        let mut coeffs = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != n + 2 {
                return Err(Error::Parse(format!("bad potential row `{line}`")));
            }
            let k: Vec<i32> = cells[..n]
                .iter()
                .map(|c| c.trim().parse::<i32>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<_>>()?;
            let re: f64 = cells[n].trim().parse().map_err(|e: std::num::ParseFloatError| Error::Parse(e.to_string()))?;
            let im: f64 = cells[n + 1].trim().parse().map_err(|e: std::num::ParseFloatError| Error::Parse(e.to_string()))?;
            let k = MultiIndex(k);
            if k.is_zero() {
                constant = re;
            } else {
                coeffs.push((k, Complex64::new(re, im)));
            }
        }
        Potential::from_half_coefficients(n, constant, coeffs)
    }
}

/// Samples `V_k = |V_k| e^{iφ_k}` for every half-lattice `k` with
/// `0 < |k| ≤ R`, with `|V_k| ~ Exponential(mean)` and `φ_k ~ U[0, 2π)`,
/// drawn in lexicographic order from a ChaCha8 stream keyed by `seed`.
/// The constant term is zero.
pub fn sample_potential(n: usize, cutoff: f64, seed: u64, amplitude_mean: f64) -> Result<Potential> {
    if cutoff < 1.0 {
        return Err(Error::InvalidArgument(format!("cutoff R = {cutoff} must be ≥ 1")));
    }
    if !(amplitude_mean > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "amplitude mean {amplitude_mean} must be > 0"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exp = Exp::new(1.0 / amplitude_mean).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut coeffs = Vec::new();
    for k in half_disk(n, cutoff)? {
        let amplitude: f64 = exp.sample(&mut rng);
        let phase: f64 = rng.random_range(0.0..2.0 * PI);
        coeffs.push((k, Complex64::from_polar(amplitude, phase)));
    }
    let mut v = Potential::from_half_coefficients(n, 0.0, coeffs)?;
    v.cutoff = cutoff;
    v.seed = Some(seed);
    v.amplitude_mean = Some(amplitude_mean);
    Ok(v)
}
