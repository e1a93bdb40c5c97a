//! Reference solutions of `∂_t f = div(f ∇V) + (σ²/2) Δf` on the torus:
//! an explicit finite-difference solver, the Fourier-Galerkin truncation,
//! the Gibbs-Boltzmann invariant density and the dissipation diagnostics.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::basis::MultiIndex;
use crate::error::{Error, Result};
use crate::linalg::ZERO;
use crate::mesh::{cube_position, Mesh};
use crate::potential::Potential;

/// Real part of the RK4 stability region along the negative real axis.
pub const RK4_REAL_STABILITY: f64 = 2.785;
/// Extent of the RK4 stability region along the imaginary axis.
pub const RK4_IMAG_STABILITY: f64 = 2.828;
/// Safety factor applied to both stability limits.
pub const STABILITY_SAFETY: f64 = 1.1;
/// Pointwise floor below which the solver aborts.
pub const NEGATIVITY_TOLERANCE: f64 = -1e-8;

/// A density tabulated on the mesh `x_i = 2π i / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub n: usize,
    pub m: usize,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        let mesh = Mesh::new(n, m)?;
        if values.len() != mesh.len() {
            return Err(Error::DimensionMismatch {
                expected: mesh.len(),
                actual: values.len(),
            });
        }
        Ok(DensityGrid { n, m, values })
    }

    /// `f ≡ (2π)^{-n}`.
    pub fn uniform(n: usize, m: usize) -> Result<Self> {
        let mesh = Mesh::new(n, m)?;
        Ok(DensityGrid {
            n,
            m,
            values: vec![(2.0 * PI).powi(-(n as i32)); mesh.len()],
        })
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mesh = Mesh::new(n, m)?;
        let values = (0..mesh.len()).map(|i| f(&mesh.point(i))).collect();
        Ok(DensityGrid { n, m, values })
    }

    pub fn mesh(&self) -> Mesh {
        Mesh { n: self.n, m: self.m }
    }

    pub fn mass(&self) -> f64 {
        self.mesh().integrate(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `‖f‖²_H = (2π)^{-n} ∫ f²`.
    pub fn h_norm_sqr(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        (2.0 * PI).powi(-(self.n as i32)) * self.mesh().integrate(&sq)
    }

    /// `∫ f²` by the rectangle rule.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.mesh().cell_volume()
    }

    fn check_same_mesh(&self, other: &DensityGrid) -> Result<()> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                actual: other.values.len(),
            });
        }
        Ok(())
    }

    /// `‖f − g‖ / ‖g‖` in `L²`.
    pub fn relative_l2_distance(&self, reference: &DensityGrid) -> Result<f64> {
        self.check_same_mesh(reference)?;
        Ok(relative_l2(&self.values, &reference.values))
    }

    /// Writes `x1,…,xn,f` rows after a `#` line recording the metadata.
    pub fn write_csv(&self, path: &Path, t: f64, sigma: f64, seed: Option<u64>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let seed = seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
        writeln!(w, "# M={} t={} sigma={} seed={}", self.m, t, sigma, seed)?;
        let cols: Vec<String> = (1..=self.n).map(|d| format!("x{d}")).collect();
        writeln!(w, "{},f", cols.join(","))?;
        let mesh = self.mesh();
        for (i, v) in self.values.iter().enumerate() {
            let x: Vec<String> = mesh.point(i).iter().map(|c| format!("{c:.17e}")).collect();
            writeln!(w, "{},{:.17e}", x.join(","), v)?;
        }
        Ok(())
    }

    /// Reads a grid written by [`DensityGrid::write_csv`]; the mesh size is
    /// inferred from the row count.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut n = None;
        let mut values = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('x') {
                n = Some(line.split(',').count() - 1);
                continue;
            }
            let last = line
                .rsplit(',')
                .next()
                .ok_or_else(|| Error::Parse(format!("bad grid row `{line}`")))?;
            values.push(
                last.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("`{last}`: {e}")))?,
            );
        }
        let n = n.ok_or_else(|| Error::Parse("grid file has no header".into()))?;
        let m = (values.len() as f64).powf(1.0 / n as f64).round() as usize;
        DensityGrid::new(n, m, values)
    }
}

/// `‖a − b‖ / ‖b‖` for equally sized arrays.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// `β = 2/σ²`.
pub fn beta_from_sigma(sigma: f64) -> f64 {
    2.0 / (sigma * sigma)
}

/// `f_* = e^{−βV}/Z` on the mesh, normalized by the rectangle rule.
pub fn gibbs_invariant(potential: &Potential, beta: f64, m: usize) -> Result<DensityGrid> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("β = {beta} must be > 0")));
    }
    let mesh = Mesh::new(potential.dim(), m)?;
    let v = potential.eval_mesh(&mesh);
    // Shift by the minimum so the exponentials cannot overflow.
    let vmin = v.iter().copied().fold(f64::INFINITY, f64::min);
    let mut values: Vec<f64> = v.iter().map(|x| (-beta * (x - vmin)).exp()).collect();
    let z = mesh.integrate(&values);
    values.iter_mut().for_each(|x| *x /= z);
    DensityGrid::new(potential.dim(), m, values)
}

/// `ln ∫ f²/g`.
pub fn renyi_relative(f: &DensityGrid, g: &DensityGrid) -> Result<f64> {
    f.check_same_mesh(g)?;
    let mut acc = 0.0;
    for (a, b) in f.values.iter().zip(&g.values) {
        if !(*b >= 1e-300) {
            return Err(Error::InvalidArgument(format!(
                "reference density {b:e} too small for the Renyi ratio"
            )));
        }
        acc += a * a / b;
    }
    Ok((acc * f.mesh().cell_volume()).ln())
}

/// Explicit conservative finite-difference discretization with RK4 stepping.
#[derive(Debug, Clone)]
pub struct FdSolver {
    mesh: Mesh,
    dt: f64,
    diffusion: f64,
    /// `∂_d V` at `x + (h/2) e_d`, per axis.
    drift: Vec<Vec<f64>>,
    /// Flat index of the `+e_d` neighbour, per axis.
    plus: Vec<Vec<usize>>,
    /// Flat index of the `−e_d` neighbour, per axis.
    minus: Vec<Vec<usize>>,
}

/// Largest RK4-stable step for the diffusion part, `2.785 h² / (2nσ² · 1.1)`.
pub fn diffusion_step_bound(n: usize, m: usize, sigma: f64) -> f64 {
    let h = 2.0 * PI / m as f64;
    RK4_REAL_STABILITY * h * h / (2.0 * n as f64 * sigma * sigma * STABILITY_SAFETY)
}

impl FdSolver {
    pub fn new(potential: &Potential, sigma: f64, m: usize, dt: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "σ = {sigma} and dt = {dt} must be positive"
            )));
        }
        let n = potential.dim();
        let required = 4 * potential.max_frequency();
        if m < required.max(3) {
            return Err(Error::MeshTooCoarse { points: m, required });
        }
        let mesh = Mesh::new(n, m)?;
        let bound = diffusion_step_bound(n, m, sigma);
        if dt > bound {
            return Err(Error::UnstableStep { dt, bound });
        }
        let h = mesh.spacing();
        let drift: Vec<Vec<f64>> = (0..n).map(|d| potential.grad_component_midpoints(&mesh, d)).collect();
        let advective: f64 = drift
            .iter()
            .map(|g| g.iter().copied().map(f64::abs).fold(0.0, f64::max))
            .sum::<f64>()
            / h;
        let drift_bound = RK4_IMAG_STABILITY / (STABILITY_SAFETY * advective.max(f64::MIN_POSITIVE));
        if dt > drift_bound {
            return Err(Error::UnstableStep { dt, bound: drift_bound });
        }
        let mut plus = vec![vec![0; mesh.len()]; n];
        let mut minus = vec![vec![0; mesh.len()]; n];
        for idx in 0..mesh.len() {
            let coords = mesh.unflatten(idx);
            for d in 0..n {
                let stride = mesh.stride(d);
                let i = coords[d];
                plus[d][idx] = if i + 1 == m { idx - i * stride } else { idx + stride };
                minus[d][idx] = if i == 0 { idx + (m - 1) * stride } else { idx - stride };
            }
        }
        Ok(FdSolver {
            mesh,
            dt,
            diffusion: 0.5 * sigma * sigma,
            drift,
            plus,
            minus,
        })
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Semi-discrete right-hand side: `Σ_d (F_{i+½} − F_{i−½}) / h` with
    /// `F_{i+½} = ½(f_i + f_{i+1}) ∂_d V_{i+½} + D (f_{i+1} − f_i) / h`.
    pub fn rhs(&self, f: &[f64], out: &mut [f64]) {
        let h = self.mesh.spacing();
        let inv_h = 1.0 / h;
        let k = self.diffusion * inv_h;
        out.iter_mut().for_each(|v| *v = 0.0);
        for d in 0..self.mesh.n {
            let drift = &self.drift[d];
            let plus = &self.plus[d];
            let minus = &self.minus[d];
            for idx in 0..f.len() {
                let (fi, fp, fm) = (f[idx], f[plus[idx]], f[minus[idx]]);
                let right = 0.5 * (fi + fp) * drift[idx] + k * (fp - fi);
                let left = 0.5 * (fm + fi) * drift[minus[idx]] + k * (fi - fm);
                out[idx] += (right - left) * inv_h;
            }
        }
    }

    /// One classical RK4 step in place.
    pub fn step(&self, f: &mut [f64]) {
        let len = f.len();
        let dt = self.dt;
        let mut k1 = vec![0.0; len];
        let mut k2 = vec![0.0; len];
        let mut k3 = vec![0.0; len];
        let mut k4 = vec![0.0; len];
        let mut tmp = vec![0.0; len];
        self.rhs(f, &mut k1);
        for i in 0..len {
            tmp[i] = f[i] + 0.5 * dt * k1[i];
        }
        self.rhs(&tmp, &mut k2);
        for i in 0..len {
            tmp[i] = f[i] + 0.5 * dt * k2[i];
        }
        self.rhs(&tmp, &mut k3);
        for i in 0..len {
            tmp[i] = f[i] + dt * k3[i];
        }
        self.rhs(&tmp, &mut k4);
        for i in 0..len {
            f[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Per-step record of an [`fd_evolve`] run. Index 0 is the initial state.
#[derive(Debug, Clone, Default)]
pub struct FdTrajectory {
    pub times: Vec<f64>,
    pub h_norm_sqr: Vec<f64>,
    pub mass: Vec<f64>,
    pub min_value: Vec<f64>,
    /// `R(f(t) ‖ f_*)` when a reference was supplied.
    pub renyi_to_reference: Vec<f64>,
    /// States at every `snapshot_stride`-th step (and the last one).
    pub snapshots: Vec<(f64, DensityGrid)>,
    pub final_state: Option<DensityGrid>,
}

/// Integrates `steps` RK4 steps from `f0`.
pub fn fd_evolve(
    f0: &DensityGrid,
    potential: &Potential,
    sigma: f64,
    dt: f64,
    steps: usize,
    snapshot_stride: usize,
    reference: Option<&DensityGrid>,
) -> Result<FdTrajectory> {
    if f0.n != potential.dim() {
        return Err(Error::DimensionMismatch {
            expected: potential.dim(),
            actual: f0.n,
        });
    }
    let solver = FdSolver::new(potential, sigma, f0.m, dt)?;
    let mut f = f0.clone();
    let mut traj = FdTrajectory::default();
    let stride = snapshot_stride.max(1);
    let record = |traj: &mut FdTrajectory, f: &DensityGrid, t: f64, step: usize| -> Result<()> {
        traj.times.push(t);
        traj.h_norm_sqr.push(f.h_norm_sqr());
        traj.mass.push(f.mass());
        traj.min_value.push(f.min());
        if let Some(r) = reference {
            traj.renyi_to_reference.push(renyi_relative(f, r)?);
        }
        if step % stride == 0 || step == steps {
            traj.snapshots.push((t, f.clone()));
        }
        Ok(())
    };
    record(&mut traj, &f, 0.0, 0)?;
    for step in 1..=steps {
        solver.step(&mut f.values);
        let t = step as f64 * dt;
        let min = f.min();
        if !(min >= NEGATIVITY_TOLERANCE) {
            return Err(Error::NegativeDensity { time: t, min_value: min });
        }
        record(&mut traj, &f, t, step)?;
    }
    traj.final_state = Some(f);
    Ok(traj)
}

/// Fourier coefficients `f_k`, `|k|_∞ ≤ J`, of a real density, stored as a
/// dense lexicographic cube.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierDensity {
    pub n: usize,
    pub truncation: usize,
    pub coefficients: Vec<Complex64>,
}

impl FourierDensity {
    pub fn uniform(n: usize, truncation: usize) -> Self {
        let mut coefficients = vec![ZERO; (2 * truncation + 1).pow(n as u32)];
        coefficients[cube_position(&MultiIndex::zero(n), truncation)] =
            Complex64::new((2.0 * PI).powi(-(n as i32)), 0.0);
        FourierDensity {
            n,
            truncation,
            coefficients,
        }
    }

    /// `f_k = (2π)^{-n} ∫ f e^{−ikᵀx}` by the rectangle rule.
    pub fn from_grid(grid: &DensityGrid, truncation: usize) -> Result<Self> {
        if grid.m <= 2 * truncation {
            return Err(Error::MeshTooCoarse {
                points: grid.m,
                required: 2 * truncation,
            });
        }
        let scale = (2.0 * PI).powi(-(grid.n as i32));
        let analyzed = grid.mesh().analyze(truncation, &grid.values);
        // analyzed[k] = ∫ f e^{ikx} = (2π)^n conj(f_k)
        Ok(FourierDensity {
            n: grid.n,
            truncation,
            coefficients: analyzed.into_iter().map(|z| z.conj() * scale).collect(),
        })
    }

    pub fn get(&self, k: &MultiIndex) -> Complex64 {
        if k.max_abs() as usize > self.truncation {
            return ZERO;
        }
        self.coefficients[cube_position(k, self.truncation)]
    }

    /// `Σ_k f_k e^{ikᵀx}` on an `M`-point mesh.
    pub fn to_grid(&self, m: usize) -> Result<DensityGrid> {
        let mesh = Mesh::new(self.n, m)?;
        let values = mesh
            .synthesize(self.truncation, &self.coefficients)
            .into_iter()
            .map(|z| z.re)
            .collect();
        DensityGrid::new(self.n, m, values)
    }

    /// `max |f_{−k} − conj(f_k)|`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let side = 2 * self.truncation + 1;
        let len = self.coefficients.len();
        // The cube is centrally symmetric: position of −k is len − 1 − pos(k).
        debug_assert_eq!(len, side.pow(self.n as u32));
        (0..len)
            .map(|i| (self.coefficients[len - 1 - i] - self.coefficients[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    fn lattice(&self) -> Vec<MultiIndex> {
        let t = self.truncation as i32;
        let side = 2 * self.truncation + 1;
        (0..self.coefficients.len())
            .map(|mut p| {
                let mut k = vec![0; self.n];
                for d in (0..self.n).rev() {
                    k[d] = (p % side) as i32 - t;
                    p /= side;
                }
                MultiIndex(k)
            })
            .collect()
    }
}

/// `ḟ_j = −Σ_k (jᵀk) V_k f_{j−k} − (σ²/2)|j|² f_j` for `j ≠ 0`, `ḟ_0 = 0`,
/// with coefficients beyond the truncation taken as zero.
pub fn galerkin_rhs(fd: &FourierDensity, potential: &Potential, sigma: f64) -> Vec<Complex64> {
    let support = potential.support();
    let diffusion = 0.5 * sigma * sigma;
    fd.lattice()
        .iter()
        .map(|j| {
            if j.is_zero() {
                return ZERO;
            }
            let mut acc = -diffusion * j.norm_sqr() * fd.get(j);
            for (k, vk) in &support {
                let jk = j.dot(k);
                if jk != 0.0 {
                    acc -= vk * fd.get(&j.sub(k)) * jk;
                }
            }
            acc
        })
        .collect()
}

/// RK4 integration of the Galerkin system; returns the state at each
/// requested time (which must be multiples of `dt`, ascending).
pub fn galerkin_evolve(
    f0: &FourierDensity,
    potential: &Potential,
    sigma: f64,
    dt: f64,
    sample_times: &[f64],
) -> Result<Vec<(f64, FourierDensity)>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be > 0")));
    }
    if f0.truncation < potential.max_frequency() {
        return Err(Error::InvalidArgument(format!(
            "truncation {} below the potential's frequency {}",
            f0.truncation,
            potential.max_frequency()
        )));
    }
    let mut state = f0.clone();
    let mut out = Vec::with_capacity(sample_times.len());
    let mut t = 0.0;
    let mut step = 0usize;
    let axpy = |base: &FourierDensity, k: &[Complex64], c: f64| {
        let mut s = base.clone();
        for (a, b) in s.coefficients.iter_mut().zip(k) {
            *a += b * c;
        }
        s
    };
    for &target in sample_times {
        let target_steps = (target / dt).round() as usize;
        while step < target_steps {
            let k1 = galerkin_rhs(&state, potential, sigma);
            let k2 = galerkin_rhs(&axpy(&state, &k1, 0.5 * dt), potential, sigma);
            let k3 = galerkin_rhs(&axpy(&state, &k2, 0.5 * dt), potential, sigma);
            let k4 = galerkin_rhs(&axpy(&state, &k3, dt), potential, sigma);
            for i in 0..state.coefficients.len() {
                state.coefficients[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
            }
            step += 1;
            t = step as f64 * dt;
        }
        out.push((t, state.clone()));
    }
    Ok(out)
}

/// Result of comparing `d/dt ‖f‖²_H` with the dissipation bound.
#[derive(Debug, Clone)]
pub struct EnergyBoundReport {
    /// `bound − derivative` at each step midpoint.
    pub margins: Vec<f64>,
    /// Largest `(derivative − bound)/scale` seen; positive means the bound
    /// was exceeded.
    pub worst_relative_excess: f64,
    /// Steps whose excess exceeds the tolerance.
    pub violations: Vec<usize>,
    pub laplacian_sup: f64,
}

/// Checks `(‖f‖²_H)˙ ≤ (‖ΔV‖_∞ − σ²)‖f‖²_H + (2π)^{−2n} σ²` along a stored
/// norm history, with the time derivative taken by forward differences and
/// the right side at the step midpoint.
pub fn energy_bound_check(
    times: &[f64],
    h_norm_sqr: &[f64],
    laplacian_sup: f64,
    sigma: f64,
    n: usize,
    relative_tolerance: f64,
) -> EnergyBoundReport {
    let source = (2.0 * PI).powi(-2 * n as i32) * sigma * sigma;
    let rate = laplacian_sup - sigma * sigma;
    let mut margins = Vec::new();
    let mut violations = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..times.len().saturating_sub(1) {
        let dt = times[i + 1] - times[i];
        let derivative = (h_norm_sqr[i + 1] - h_norm_sqr[i]) / dt;
        let mid = 0.5 * (h_norm_sqr[i] + h_norm_sqr[i + 1]);
        let bound = rate * mid + source;
        let scale = bound.abs().max(derivative.abs()).max(source);
        let excess = (derivative - bound) / scale;
        worst = worst.max(excess);
        if excess > relative_tolerance {
            violations.push(i);
        }
        margins.push(bound - derivative);
    }
    EnergyBoundReport {
        margins,
        worst_relative_excess: worst,
        violations,
        laplacian_sup,
    }
}

/// Largest per-step increase of a sequence (negative if strictly decreasing).
pub fn max_increase(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::sample_potential;

    fn cos_potential() -> Potential {
        Potential::from_half_coefficients(1, 0.0, vec![(MultiIndex::new(vec![1]), Complex64::new(1.0, 0.0))])
            .unwrap()
    }

    #[test]
    fn gibbs_examples() {
        assert_eq!(beta_from_sigma(1.0), 2.0);
        let flat = gibbs_invariant(&Potential::zero(2), 2.0, 20).unwrap();
        let u = (2.0 * PI).powi(-2);
        assert!(flat.values.iter().all(|v| (v - u).abs() < 1e-15));
        let v = sample_potential(2, 5.0, 1, 0.25).unwrap();
        let f = gibbs_invariant(&v, 2.0, 100).unwrap();
        assert!((f.mass() - 1.0).abs() < 1e-12);
        assert!(f.min() > 0.0);
    }

    #[test]
    fn uniform_is_stationary_without_potential() {
        let f0 = DensityGrid::uniform(2, 20).unwrap();
        let traj = fd_evolve(&f0, &Potential::zero(2), 1.0, 0.01, 50, 10, None).unwrap();
        let last = traj.final_state.unwrap();
        assert!(relative_l2(&last.values, &f0.values) < 1e-14);
    }

    #[test]
    fn flux_form_conserves_mass() {
        let v = sample_potential(2, 3.0, 4, 0.25).unwrap();
        let f0 = DensityGrid::uniform(2, 40).unwrap();
        let traj = fd_evolve(&f0, &v, 1.0, 0.005, 200, 1000, None).unwrap();
        let drift = traj.mass.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-10, "mass drift {drift}");
    }

    #[test]
    fn stability_bound_enforced() {
        let v = Potential::zero(2);
        let f0 = DensityGrid::uniform(2, 100).unwrap();
        assert!(diffusion_step_bound(2, 100, 1.0) > 0.002);
        assert!(matches!(
            fd_evolve(&f0, &v, 1.0, 0.01, 1, 1, None),
            Err(Error::UnstableStep { .. })
        ));
    }

    #[test]
    fn gibbs_drift_is_second_order_in_space() {
        let v = sample_potential(2, 2.0, 11, 0.25).unwrap();
        let drift = |m: usize| {
            let fstar = gibbs_invariant(&v, 2.0, m).unwrap();
            let traj = fd_evolve(&fstar, &v, 1.0, 0.001, 1000, 10_000, None).unwrap();
            traj.final_state.unwrap().relative_l2_distance(&fstar).unwrap()
        };
        let coarse = drift(50);
        let fine = drift(100);
        assert!(fine < 5e-3, "{fine}");
        let ratio = coarse / fine;
        assert!((3.0..5.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn galerkin_pure_decay_and_symmetry() {
        let mut fd = FourierDensity::uniform(1, 3);
        fd.coefficients[cube_position(&MultiIndex::new(vec![2]), 3)] = Complex64::new(0.01, 0.02);
        fd.coefficients[cube_position(&MultiIndex::new(vec![-2]), 3)] = Complex64::new(0.01, -0.02);
        let d = galerkin_rhs(&fd, &Potential::zero(1), 1.0);
        let p = cube_position(&MultiIndex::new(vec![2]), 3);
        assert!((d[p] - Complex64::new(-0.02, -0.04)).norm() < 1e-15);
        let d = galerkin_rhs(&fd, &cos_potential(), 0.7);
        let dd = FourierDensity {
            n: 1,
            truncation: 3,
            coefficients: d,
        };
        assert!(dd.conjugate_symmetry_defect() < 1e-16);
        assert_eq!(dd.get(&MultiIndex::zero(1)), ZERO);
    }

    #[test]
    fn galerkin_rhs_matches_fd_operator_on_smooth_data() {
        let v = cos_potential();
        let mut fd = FourierDensity::uniform(1, 4);
        fd.coefficients[cube_position(&MultiIndex::new(vec![1]), 4)] = Complex64::new(0.02, 0.01);
        fd.coefficients[cube_position(&MultiIndex::new(vec![-1]), 4)] = Complex64::new(0.02, -0.01);
        let d = FourierDensity {
            n: 1,
            truncation: 4,
            coefficients: galerkin_rhs(&fd, &v, 1.0),
        };
        let m = 400;
        let grid = fd.to_grid(m).unwrap();
        let solver = FdSolver::new(&v, 1.0, m, 1e-5).unwrap();
        let mut out = vec![0.0; m];
        solver.rhs(&grid.values, &mut out);
        let spectral = d.to_grid(m).unwrap();
        assert!(relative_l2(&out, &spectral.values) < 1e-3);
    }

    #[test]
    fn grid_round_trip_through_fourier() {
        let mut fd = FourierDensity::uniform(2, 3);
        fd.coefficients[cube_position(&MultiIndex::new(vec![1, -2]), 3)] = Complex64::new(0.004, 0.002);
        fd.coefficients[cube_position(&MultiIndex::new(vec![-1, 2]), 3)] = Complex64::new(0.004, -0.002);
        let grid = fd.to_grid(16).unwrap();
        assert!((grid.mass() - 1.0).abs() < 1e-14);
        let back = FourierDensity::from_grid(&grid, 3).unwrap();
        for (a, b) in back.coefficients.iter().zip(&fd.coefficients) {
            assert!((a - b).norm() < 1e-16);
        }
        assert!(back.conjugate_symmetry_defect() < 1e-17);
    }

    #[test]
    fn renyi_examples() {
        let u = DensityGrid::uniform(2, 10).unwrap();
        assert!(renyi_relative(&u, &u).unwrap().abs() < 1e-14);
        let v = sample_potential(2, 2.0, 5, 0.25).unwrap();
        let f = gibbs_invariant(&v, 2.0, 32).unwrap();
        assert!(renyi_relative(&f, &f).unwrap().abs() < 1e-12);
        let zero = DensityGrid::new(2, 10, vec![0.0; 100]).unwrap();
        assert!(renyi_relative(&u, &zero).is_err());
    }

    #[test]
    fn energy_bound_for_pure_diffusion() {
        let n = 1;
        let mut f0 = DensityGrid::uniform(n, 64).unwrap();
        for (i, v) in f0.values.iter_mut().enumerate() {
            *v *= 1.0 + 0.5 * (2.0 * PI * i as f64 / 64.0).cos();
        }
        let traj = fd_evolve(&f0, &Potential::zero(n), 1.0, 0.001, 300, 1000, None).unwrap();
        let rep = energy_bound_check(&traj.times, &traj.h_norm_sqr, 0.0, 1.0, n, 1e-3);
        assert!(rep.violations.is_empty(), "{}", rep.worst_relative_excess);
    }

    #[test]
    fn grid_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        let v = sample_potential(2, 2.0, 3, 0.25).unwrap();
        let f = gibbs_invariant(&v, 2.0, 12).unwrap();
        f.write_csv(&p, 0.0, 1.0, Some(3)).unwrap();
        let g = DensityGrid::read_csv(&p).unwrap();
        assert_eq!(g.m, 12);
        assert!(relative_l2(&g.values, &f.values) < 1e-15);
    }
}
