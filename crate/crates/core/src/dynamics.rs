//! SDM dynamics for the Smoluchowski diffusion `dX = −∇V dt + σ dW` on the
//! torus (Fourier family).
//!
//! With `K(f) = Σ_ℓ (E_f 𝒢φ_ℓ) E_ℓ`, the SDM tracking a known density
//! solves
//!
//! ```text
//! Ṡ = F_S⁻¹(K) − (Tr F_S⁻¹(K) / Tr F_S⁻¹(I)) F_S⁻¹(I),
//! ```
//!
//! and the closed flow replaces `K(f)` by `Q(S) = K(p_S)`.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::approx::{moments_on_set, MomentVector};
use crate::basis::{Family, IndexSet, IndexSetKind, MultiIndex, StructureTable};
use crate::error::{Error, Result};
use crate::fpke_ref::DensityGrid;
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::operators::{combine, FSolver};
use crate::potential::Potential;
use crate::sdm::{coefficients_of, Sdm};

/// Smallest eigenvalue a stored state may have.
pub const POSITIVITY_FLOOR: f64 = 1e-12;
/// Largest number of step halvings tried before giving up (`dt/1024`).
pub const MAX_HALVINGS: u32 = 10;

/// The backward generator `𝒢g = −∇V·∇g + (σ²/2)Δg`.
///
/// `drift_sign` multiplies the potential term; it is `1` except when
/// deliberately corrupted to probe test sensitivity.
#[derive(Debug, Clone)]
pub struct Generator {
    pub potential: Potential,
    pub sigma: f64,
    pub drift_sign: f64,
}

impl Generator {
    pub fn new(potential: Potential, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("σ = {sigma} must be > 0")));
        }
        Ok(Generator {
            potential,
            sigma,
            drift_sign: 1.0,
        })
    }

    /// `⟨φ_ℓ, 𝒢φ_m⟩ = V_{ℓ−m} (ℓ−m)ᵀm − (σ²/2) δ_{ℓm} |m|²`.
    pub fn element(&self, l: &MultiIndex, m: &MultiIndex) -> Complex64 {
        let d = l.sub(m);
        let mut g = if d.is_zero() {
            Complex64::new(-0.5 * self.sigma * self.sigma * m.norm_sqr(), 0.0)
        } else {
            ZERO
        };
        let dm = d.dot(m);
        if dm != 0.0 {
            g += self.potential.coefficient(&d) * (self.drift_sign * dm);
        }
        g
    }

    /// `℧ ∪ (℧ + supp V)`: the moments of `f` that `K(f)` depends on.
    pub fn extended_set(&self, table: &StructureTable) -> Result<IndexSet> {
        let mut shifts: Vec<MultiIndex> = self.potential.support().into_iter().map(|(k, _)| k).collect();
        shifts.push(MultiIndex::zero(table.dim()));
        let shifts = IndexSet::from_indices(IndexSetKind::Other, shifts)?;
        table.mho().minkowski_sum(&shifts, IndexSetKind::Other)
    }
}

/// `(⟨φ_ℓ, 𝒢φ_m⟩)_{ℓ,m ∈ ℧}`.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub entries: CMatrix,
}

pub fn generator_matrix(gen: &Generator, mho: &IndexSet) -> GeneratorMatrix {
    let l = mho.len();
    GeneratorMatrix {
        entries: CMatrix::from_fn(l, l, |a, b| gen.element(mho.get(a), mho.get(b))),
    }
}

/// A Hermitized matrix together with its anti-Hermitian part before
/// symmetrization.
#[derive(Debug, Clone)]
pub struct Hermitized {
    pub matrix: CMatrix,
    pub defect: f64,
}

fn hermitized_with_defect(mut m: CMatrix) -> Hermitized {
    let defect = linalg::hermitize(&mut m);
    Hermitized { matrix: m, defect }
}

fn check_fourier(table: &StructureTable) -> Result<()> {
    if table.family() != Family::Fourier {
        return Err(Error::InvalidArgument(
            "generator matrix elements are available for the Fourier family only".into(),
        ));
    }
    Ok(())
}

/// `Q(S) = Σ_ℓ (Σ_m ⟨φ_m, 𝒢φ_ℓ⟩ ⟨E_m, S⟩) E_ℓ`.
pub fn compute_q(gm: &GeneratorMatrix, table: &StructureTable, s: &CMatrix) -> Hermitized {
    let c = coefficients_of(s, table);
    let q: CVector = gm.entries.transpose() * c;
    hermitized_with_defect(combine(table, &q))
}

/// `K(f)` from generalized moments. `E_f 𝒢φ_ℓ = Σ_p ⟨φ_p, 𝒢φ_ℓ⟩ E_f φ_p`
/// runs over `p ∈ ℓ + ({0} ∪ supp V)`; moments missing from `mv` count as
/// zero, so `mv` should cover [`Generator::extended_set`].
pub fn compute_k(gen: &Generator, mv: &MomentVector, table: &StructureTable) -> Result<Hermitized> {
    check_fourier(table)?;
    let support = gen.potential.support();
    let mut coeffs = CVector::zeros(table.n_moments());
    for (i, l) in table.mho().iter().enumerate() {
        let mut acc = gen.element(l, l) * mv.get(l);
        for (k, _) in &support {
            let p = l.add(k);
            let m = mv.get(&p);
            if m != ZERO {
                acc += gen.element(&p, l) * m;
            }
        }
        coeffs[i] = acc;
    }
    Ok(hermitized_with_defect(combine(table, &coeffs)))
}

/// `K(f)` for a tabulated density, via rectangle-rule moments over the
/// extended index set.
pub fn k_from_grid(gen: &Generator, grid: &DensityGrid, table: &StructureTable) -> Result<Hermitized> {
    check_fourier(table)?;
    let mv = moments_on_set(grid, gen.extended_set(table)?)?;
    compute_k(gen, &mv, table)
}

/// `K(f)` by direct quadrature of `∫ f 𝒢φ_ℓ dx`, with
/// `𝒢φ_ℓ = (−i ℓᵀ∇V − (σ²/2)|ℓ|²) e^{iℓᵀx}` evaluated pointwise.
pub fn k_by_quadrature(gen: &Generator, grid: &DensityGrid, table: &StructureTable) -> Result<CMatrix> {
    check_fourier(table)?;
    let mesh = grid.mesh();
    let n = grid.n;
    let grads: Vec<Vec<f64>> = (0..mesh.len()).map(|i| gen.potential.grad(&mesh.point(i))).collect();
    let vol = mesh.cell_volume();
    let mut coeffs = CVector::zeros(table.n_moments());
    for (i, l) in table.mho().iter().enumerate() {
        let mut acc = ZERO;
        for (idx, f) in grid.values.iter().enumerate() {
            let x = mesh.point(idx);
            let phase: f64 = (0..n).map(|d| l.0[d] as f64 * x[d]).sum();
            let ldv: f64 = (0..n).map(|d| l.0[d] as f64 * grads[idx][d]).sum();
            let g = Complex64::new(-0.5 * gen.sigma * gen.sigma * l.norm_sqr(), -gen.drift_sign * ldv)
                * Complex64::from_polar(1.0, phase);
            acc += g * *f;
        }
        coeffs[i] = acc * vol;
    }
    Ok(linalg::hermitized(combine(table, &coeffs)))
}

/// `Ṡ` and the multiplier rate `λ̇ = −Tr F⁻¹(K) / Tr F⁻¹(I)`, so that
/// `F_S(Ṡ) = K + λ̇ I`.
#[derive(Debug, Clone)]
pub struct Rhs {
    pub s_dot: CMatrix,
    pub lambda_dot: f64,
}

/// Right-hand side of the exact-tracking ODE for a given `K(f)`.
pub fn rhs_exact(s: &CMatrix, k: &CMatrix, table: &StructureTable, mu: f64) -> Result<Rhs> {
    let solver = FSolver::new(table, s, mu)?;
    let u = solver.solve(k)?;
    let w = solver.solve(&linalg::identity(table.n_basis()))?;
    let lambda_dot = -linalg::trace(&u).re / linalg::trace(&w).re;
    let s_dot = linalg::hermitized(u + w * Complex64::new(lambda_dot, 0.0));
    Ok(Rhs { s_dot, lambda_dot })
}

/// Right-hand side of the closed flow, `K` replaced by `Q(S)`.
pub fn rhs_closure(s: &CMatrix, gm: &GeneratorMatrix, table: &StructureTable, mu: f64) -> Result<Rhs> {
    let q = compute_q(gm, table, s);
    rhs_exact(s, &q.matrix, table, mu)
}

/// Bookkeeping for one accepted macro step.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    pub t: f64,
    /// `|Tr S − 1|` before renormalization.
    pub trace_dev: f64,
    pub min_eig: f64,
    /// Substep actually used (`dt` unless halving was needed).
    pub step_size: f64,
    pub hermitian_defect: f64,
}

/// Stored states and per-step diagnostics. Index 0 of `diagnostics` is the
/// initial state.
#[derive(Debug, Clone, Default)]
pub struct SdmTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Sdm>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl SdmTrajectory {
    pub fn final_state(&self) -> Option<&Sdm> {
        self.states.last()
    }

    /// Writes `t,trace_dev,min_eig,step_size`, one row per step.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "t,trace_dev,min_eig,step_size")?;
        for d in &self.diagnostics {
            writeln!(w, "{:e},{:e},{:e},{:e}", d.t, d.trace_dev, d.min_eig, d.step_size)?;
        }
        Ok(())
    }
}

fn axpy(s: &CMatrix, k: &CMatrix, h: f64) -> CMatrix {
    s + k * Complex64::new(h, 0.0)
}

/// One classical RK4 step; any stage leaving the PD cone is an error.
fn rk4<F>(s: &CMatrix, t: f64, h: f64, rhs: &mut F) -> Result<CMatrix>
where
    F: FnMut(f64, &CMatrix) -> Result<CMatrix>,
{
    let k1 = rhs(t, s)?;
    let k2 = rhs(t + 0.5 * h, &axpy(s, &k1, 0.5 * h))?;
    let k3 = rhs(t + 0.5 * h, &axpy(s, &k2, 0.5 * h))?;
    let k4 = rhs(t + h, &axpy(s, &k3, h))?;
    let sum = k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4;
    let next = axpy(s, &sum, h / 6.0);
    linalg::cholesky(&next, "RK4 step result")?;
    Ok(next)
}

/// Fixed-step RK4 on SDMs with PD-guarded step halving and exact trace
/// renormalization after every macro step.
#[derive(Debug, Clone, Copy)]
pub struct Stepper {
    pub dt: f64,
    pub max_halvings: u32,
}

impl Stepper {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {dt} must be > 0")));
        }
        Ok(Stepper {
            dt,
            max_halvings: MAX_HALVINGS,
        })
    }

    /// Advances `s` from `t` to `t + dt`.
    pub fn step<F>(&self, s: &CMatrix, t: f64, rhs: &mut F) -> Result<(CMatrix, StepDiagnostics)>
    where
        F: FnMut(f64, &CMatrix) -> Result<CMatrix>,
    {
        let mut last_err = None;
        for halvings in 0..=self.max_halvings {
            let substeps = 1usize << halvings;
            let h = self.dt / substeps as f64;
            let mut cur = s.clone();
            let mut ok = true;
            for i in 0..substeps {
                match rk4(&cur, t + i as f64 * h, h, rhs) {
                    Ok(next) => cur = next,
                    Err(e @ Error::NotPositiveDefinite { .. }) => {
                        last_err = Some(e);
                        ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !ok {
                continue;
            }
            let defect = linalg::hermitize(&mut cur);
            let tr = linalg::trace(&cur).re;
            cur /= Complex64::new(tr, 0.0);
            let t_next = t + self.dt;
            let min_eig = linalg::min_eigenvalue(&cur);
            if !(min_eig >= POSITIVITY_FLOOR) {
                return Err(Error::PositivityBreach {
                    time: t_next,
                    min_eigenvalue: min_eig,
                });
            }
            return Ok((
                cur,
                StepDiagnostics {
                    t: t_next,
                    trace_dev: (tr - 1.0).abs(),
                    min_eig,
                    step_size: h,
                    hermitian_defect: defect,
                },
            ));
        }
        let context = match last_err {
            Some(Error::NotPositiveDefinite { context }) => context,
            _ => "step halving exhausted".into(),
        };
        Err(Error::NotPositiveDefinite {
            context: format!("t = {t}, dt/{}: {context}", 1u32 << self.max_halvings),
        })
    }
}

/// Number of fixed steps covering `[0, t_final]`.
pub fn step_count(t_final: f64, dt: f64) -> usize {
    (t_final / dt).round().max(0.0) as usize
}

/// Integrates `Ṡ = rhs(t, S)` from `s0`, storing every `stride`-th state
/// and the final one.
pub fn integrate_with<F>(s0: &Sdm, t_final: f64, dt: f64, stride: usize, mut rhs: F) -> Result<SdmTrajectory>
where
    F: FnMut(f64, &CMatrix) -> Result<CMatrix>,
{
    let stepper = Stepper::new(dt)?;
    linalg::cholesky(s0.matrix(), "initial SDM")?;
    let steps = step_count(t_final, dt);
    let stride = stride.max(1);
    let mut traj = SdmTrajectory::default();
    let mut s = s0.matrix().clone();
    traj.times.push(0.0);
    traj.states.push(s0.clone());
    traj.diagnostics.push(StepDiagnostics {
        t: 0.0,
        trace_dev: (linalg::trace(&s).re - 1.0).abs(),
        min_eig: linalg::min_eigenvalue(&s),
        step_size: 0.0,
        hermitian_defect: linalg::hermitian_defect(&s),
    });
    for i in 1..=steps {
        let t = (i - 1) as f64 * dt;
        let (next, mut diag) = stepper.step(&s, t, &mut rhs)?;
        diag.t = i as f64 * dt;
        s = next;
        traj.diagnostics.push(diag);
        if i % stride == 0 || i == steps {
            traj.times.push(diag.t);
            traj.states.push(Sdm::from_matrix_unchecked(s.clone()));
        }
    }
    Ok(traj)
}

/// How the moment drift is supplied to [`integrate`].
pub enum Mode<'a> {
    /// `K = Q(S)`.
    Closure(&'a GeneratorMatrix),
    /// `K = K(f(t))` from a known density trajectory.
    ExactTracking(Box<dyn FnMut(f64) -> Result<CMatrix> + 'a>),
}

/// Integrates the SDM ODE in either mode.
pub fn integrate(
    s0: &Sdm,
    table: &StructureTable,
    mu: f64,
    t_final: f64,
    dt: f64,
    stride: usize,
    mode: Mode<'_>,
) -> Result<SdmTrajectory> {
    match mode {
        Mode::Closure(gm) => integrate_with(s0, t_final, dt, stride, |_, s| {
            Ok(rhs_closure(s, gm, table, mu)?.s_dot)
        }),
        Mode::ExactTracking(mut k_of_t) => integrate_with(s0, t_final, dt, stride, move |t, s| {
            let k = k_of_t(t)?;
            Ok(rhs_exact(s, &k, table, mu)?.s_dot)
        }),
    }
}

/// Fourier moments at time `t` under pure diffusion, `m_k(t) = m_k(0) e^{−σ²|k|²t/2}`.
pub fn heat_moments(mv0: &MomentVector, sigma: f64, t: f64) -> Result<MomentVector> {
    let values = mv0
        .indices()
        .iter()
        .zip(mv0.values())
        .map(|(k, v)| v * (-0.5 * sigma * sigma * k.norm_sqr() * t).exp())
        .collect();
    MomentVector::new(mv0.indices().clone(), values)
}
