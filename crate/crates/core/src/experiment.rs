//! End-to-end runs: the torus Smoluchowski experiment (finite-difference
//! reference and closed SDM flow in lockstep) and standalone static fits.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::approx::{
    moments_from_grid, proximity, renyi_of_grid, solve_static, FitReport, MomentVector,
    StaticFitResult,
};
use crate::basis::{cube_table, Family, IndexSet, StructureTable};
use crate::dynamics::{
    generator_matrix, integrate, rhs_closure, step_count, Generator, GeneratorMatrix, Mode,
    SdmTrajectory, StepDiagnostics, Stepper,
};
use crate::error::{Error, Result};
use crate::fpke_ref::{beta_from_sigma, gibbs_invariant, relative_l2, DensityGrid, FdSolver};
use crate::io::{write_sdm_csv, SdmHeader};
use crate::linalg::{self, CMatrix};
use crate::mesh::Mesh;
use crate::potential::{sample_potential, Potential, DEFAULT_AMPLITUDE_MEAN};
use crate::sdm::{eval_pdf, pdf_on_mesh, Sdm};

/// Fully resolved experiment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub r: i32,
    /// Potential cutoff `R` (Euclidean radius of the harmonic disk).
    pub cutoff: f64,
    pub seed: u64,
    pub amplitude_mean: f64,
    pub sigma: f64,
    pub mu: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Mesh points per dimension of the finite-difference reference.
    pub mesh_points: usize,
    /// Galerkin truncation `|j|_∞ ≤ J` used by cross-checks.
    pub galerkin_truncation: usize,
    /// Write an SDM snapshot every this many steps (0 disables snapshots).
    pub snapshot_stride: usize,
    /// Record the relative error every this many steps.
    pub error_stride: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 2,
            r: 2,
            cutoff: 5.0,
            seed: 0,
            amplitude_mean: DEFAULT_AMPLITUDE_MEAN,
            sigma: 1.0,
            mu: 0.01,
            t_final: 4.0,
            dt: 0.002,
            mesh_points: 100,
            galerkin_truncation: 8,
            snapshot_stride: 0,
            error_stride: 1,
        }
    }
}

/// Config as read from JSON: every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    n: Option<usize>,
    r: Option<i32>,
    #[serde(alias = "R")]
    cutoff: Option<f64>,
    seed: Option<u64>,
    amplitude_mean: Option<f64>,
    sigma: Option<f64>,
    mu: Option<f64>,
    t_final: Option<f64>,
    dt: Option<f64>,
    #[serde(alias = "M")]
    mesh_points: Option<usize>,
    #[serde(alias = "J")]
    galerkin_truncation: Option<usize>,
    snapshot_stride: Option<usize>,
    error_stride: Option<usize>,
}

impl ExperimentConfig {
    /// Parses JSON, filling omitted fields with defaults; returns the
    /// config and the names of the defaulted fields.
    pub fn from_json(text: &str) -> Result<(Self, Vec<String>)> {
        let p: PartialConfig = if text.trim().is_empty() {
            PartialConfig::default()
        } else {
            serde_json::from_str(text)?
        };
        let d = ExperimentConfig::default();
        let mut filled = Vec::new();
        macro_rules! pick {
            ($field:ident) => {
                match p.$field {
                    Some(v) => v,
                    None => {
                        filled.push(stringify!($field).to_string());
                        d.$field
                    }
                }
            };
        }
        let cfg = ExperimentConfig {
            n: pick!(n),
            r: pick!(r),
            cutoff: pick!(cutoff),
            seed: pick!(seed),
            amplitude_mean: pick!(amplitude_mean),
            sigma: pick!(sigma),
            mu: pick!(mu),
            t_final: pick!(t_final),
            dt: pick!(dt),
            mesh_points: pick!(mesh_points),
            galerkin_truncation: pick!(galerkin_truncation),
            snapshot_stride: pick!(snapshot_stride),
            error_stride: pick!(error_stride),
        };
        cfg.validate()?;
        Ok((cfg, filled))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n == 0 || self.r < 1 {
            return bad(format!("need n ≥ 1 and r ≥ 1, got n = {}, r = {}", self.n, self.r));
        }
        if !(self.sigma > 0.0) || !(self.mu > 0.0) || !(self.dt > 0.0) {
            return bad(format!(
                "σ, μ and dt must be positive (σ = {}, μ = {}, dt = {})",
                self.sigma, self.mu, self.dt
            ));
        }
        if !(self.t_final >= 0.0) || !(self.amplitude_mean > 0.0) || !(self.cutoff >= 1.0) {
            return bad("t_final ≥ 0, amplitude_mean > 0 and R ≥ 1 required".into());
        }
        let required = (4.0 * self.cutoff).floor().max(4.0 * self.r as f64) as usize + 2;
        if self.mesh_points < required {
            return Err(Error::MeshTooCoarse {
                points: self.mesh_points,
                required,
            });
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        step_count(self.t_final, self.dt)
    }
}

/// One sampled row of `error.csv`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorRow {
    pub t: f64,
    pub rel_error: f64,
    pub trace_dev: f64,
    pub min_eig: f64,
}

/// Everything an experiment produces in memory.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub potential: Potential,
    pub errors: Vec<ErrorRow>,
    /// SDM step diagnostics, index 0 the initial state.
    pub sdm_diagnostics: Vec<StepDiagnostics>,
    pub fd_times: Vec<f64>,
    pub fd_h_norm_sqr: Vec<f64>,
    pub fd_mass: Vec<f64>,
    pub fd_min: Vec<f64>,
    pub fd_renyi_to_invariant: Vec<f64>,
    pub final_f: DensityGrid,
    pub final_p: DensityGrid,
    pub f_star: DensityGrid,
    pub final_sdm: Sdm,
    pub snapshots: Vec<(usize, Sdm)>,
    pub fd_seconds: f64,
    pub sdm_seconds: f64,
}

impl ExperimentOutcome {
    pub fn max_rel_error(&self) -> f64 {
        self.errors.iter().map(|e| e.rel_error).fold(0.0, f64::max)
    }

    /// `‖p_S − f_*‖ / ‖f_*‖` at the final time.
    pub fn sdm_to_invariant(&self) -> f64 {
        relative_l2(&self.final_p.values, &self.f_star.values)
    }

    /// `‖f − f_*‖ / ‖f_*‖` at the final time.
    pub fn fd_to_invariant(&self) -> f64 {
        relative_l2(&self.final_f.values, &self.f_star.values)
    }

    pub fn summary(&self) -> Value {
        json!({
            "steps": self.config.steps(),
            "max_rel_error": self.max_rel_error(),
            "final_rel_error": self.errors.last().map(|e| e.rel_error),
            "sdm_to_invariant": self.sdm_to_invariant(),
            "fd_to_invariant": self.fd_to_invariant(),
            "max_trace_dev": self.sdm_diagnostics.iter().map(|d| d.trace_dev).fold(0.0, f64::max),
            "min_eigenvalue": self.sdm_diagnostics.iter().map(|d| d.min_eig).fold(f64::INFINITY, f64::min),
            "fd_min_value": self.fd_min.iter().copied().fold(f64::INFINITY, f64::min),
            "fd_mass_drift": self.fd_mass.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max),
        })
    }
}

/// `D(f, p)/D(f, 0) = ∫(f − p)² / ∫f²` on the mesh.
pub fn relative_error(f: &[f64], p: &[f64]) -> f64 {
    relative_l2(p, f).powi(2)
}

/// Shared setup: table, potential, generator and its matrix.
pub struct ExperimentSetup {
    pub table: StructureTable,
    pub potential: Potential,
    pub generator: Generator,
    pub generator_matrix: GeneratorMatrix,
}

impl ExperimentSetup {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let table = cube_table(Family::Fourier, config.n, config.r)?;
        let potential = sample_potential(config.n, config.cutoff, config.seed, config.amplitude_mean)?;
        let generator = Generator::new(potential.clone(), config.sigma)?;
        let generator_matrix = generator_matrix(&generator, table.mho());
        Ok(ExperimentSetup {
            table,
            potential,
            generator,
            generator_matrix,
        })
    }
}

/// Integrates only the closed SDM flow from `I_N/N` with step `dt`,
/// keeping every `stride`-th state and the final one.
pub fn run_sdm_only(config: &ExperimentConfig, dt: f64, stride: usize) -> Result<SdmTrajectory> {
    let setup = ExperimentSetup::new(config)?;
    let s0 = Sdm::maximally_mixed(setup.table.n_basis());
    integrate(
        &s0,
        &setup.table,
        config.mu,
        config.t_final,
        dt,
        stride,
        Mode::Closure(&setup.generator_matrix),
    )
}

/// Failure location recorded in `meta.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub step: usize,
    pub time: f64,
    pub message: String,
}

/// Runs the finite-difference reference and the closed SDM flow in
/// lockstep from the uniform density.
pub fn run_experiment(config: &ExperimentConfig) -> std::result::Result<ExperimentOutcome, (Error, Option<Failure>)> {
    let setup = ExperimentSetup::new(config).map_err(|e| (e, None))?;
    let table = &setup.table;
    let mesh = Mesh::new(config.n, config.mesh_points).map_err(|e| (e, None))?;
    let f_star = gibbs_invariant(&setup.potential, beta_from_sigma(config.sigma), config.mesh_points)
        .map_err(|e| (e, None))?;
    let fd = FdSolver::new(&setup.potential, config.sigma, config.mesh_points, config.dt).map_err(|e| (e, None))?;
    let stepper = Stepper::new(config.dt).map_err(|e| (e, None))?;

    let steps = config.steps();
    let error_stride = config.error_stride.max(1);
    let mut f = DensityGrid::uniform(config.n, config.mesh_points).map_err(|e| (e, None))?;
    let mut s = Sdm::maximally_mixed(table.n_basis()).into_matrix();

    let mut out = ExperimentOutcome {
        config: config.clone(),
        potential: setup.potential.clone(),
        errors: Vec::new(),
        sdm_diagnostics: Vec::with_capacity(steps + 1),
        fd_times: Vec::with_capacity(steps + 1),
        fd_h_norm_sqr: Vec::with_capacity(steps + 1),
        fd_mass: Vec::with_capacity(steps + 1),
        fd_min: Vec::with_capacity(steps + 1),
        fd_renyi_to_invariant: Vec::with_capacity(steps + 1),
        final_f: f.clone(),
        final_p: f.clone(),
        f_star: f_star.clone(),
        final_sdm: Sdm::maximally_mixed(table.n_basis()),
        snapshots: Vec::new(),
        fd_seconds: 0.0,
        sdm_seconds: 0.0,
    };

    let record_fd = |out: &mut ExperimentOutcome, f: &DensityGrid, t: f64| -> Result<()> {
        out.fd_times.push(t);
        out.fd_h_norm_sqr.push(f.h_norm_sqr());
        out.fd_mass.push(f.mass());
        out.fd_min.push(f.min());
        out.fd_renyi_to_invariant.push(crate::fpke_ref::renyi_relative(f, &f_star)?);
        Ok(())
    };
    let fail = |e: Error, step: usize| {
        let failure = Failure {
            step,
            time: step as f64 * config.dt,
            message: e.to_string(),
        };
        (e, Some(failure))
    };

    let initial = StepDiagnostics {
        t: 0.0,
        trace_dev: (linalg::trace(&s).re - 1.0).abs(),
        min_eig: linalg::min_eigenvalue(&s),
        step_size: 0.0,
        hermitian_defect: 0.0,
    };
    out.sdm_diagnostics.push(initial);
    record_fd(&mut out, &f, 0.0).map_err(|e| fail(e, 0))?;
    let p0 = pdf_on_mesh(&Sdm::from_matrix_unchecked(s.clone()), table, &mesh).map_err(|e| fail(e, 0))?;
    out.errors.push(ErrorRow {
        t: 0.0,
        rel_error: relative_error(&f.values, &p0),
        trace_dev: initial.trace_dev,
        min_eig: initial.min_eig,
    });
    if config.snapshot_stride > 0 {
        out.snapshots.push((0, Sdm::from_matrix_unchecked(s.clone())));
    }

    let mut rhs = |_: f64, x: &CMatrix| Ok(rhs_closure(x, &setup.generator_matrix, table, config.mu)?.s_dot);
    for step in 1..=steps {
        let t_prev = (step - 1) as f64 * config.dt;
        // The two solvers share nothing; advance them concurrently.
        let (fd_time, sdm_result) = std::thread::scope(|scope| {
            let handle = scope.spawn(|| {
                let start = Instant::now();
                fd.step(&mut f.values);
                start.elapsed().as_secs_f64()
            });
            let start = Instant::now();
            let r = stepper.step(&s, t_prev, &mut rhs);
            let sdm_time = start.elapsed().as_secs_f64();
            (handle.join().expect("finite-difference thread panicked"), r.map(|x| (x, sdm_time)))
        });
        out.fd_seconds += fd_time;
        let ((next, mut diag), sdm_time) = sdm_result.map_err(|e| fail(e, step))?;
        out.sdm_seconds += sdm_time;
        let t = step as f64 * config.dt;
        diag.t = t;
        s = next;
        out.sdm_diagnostics.push(diag);

        let fmin = f.min();
        if !(fmin >= crate::fpke_ref::NEGATIVITY_TOLERANCE) {
            return Err(fail(Error::NegativeDensity { time: t, min_value: fmin }, step));
        }
        record_fd(&mut out, &f, t).map_err(|e| fail(e, step))?;

        if step % error_stride == 0 || step == steps {
            let p = pdf_on_mesh(&Sdm::from_matrix_unchecked(s.clone()), table, &mesh).map_err(|e| fail(e, step))?;
            out.errors.push(ErrorRow {
                t,
                rel_error: relative_error(&f.values, &p),
                trace_dev: diag.trace_dev,
                min_eig: diag.min_eig,
            });
        }
        if config.snapshot_stride > 0 && (step % config.snapshot_stride == 0 || step == steps) {
            out.snapshots.push((step, Sdm::from_matrix_unchecked(s.clone())));
        }
    }

    let final_sdm = Sdm::from_matrix_unchecked(s);
    let p = pdf_on_mesh(&final_sdm, table, &mesh).map_err(|e| fail(e, steps))?;
    out.final_p = DensityGrid::new(config.n, config.mesh_points, p).map_err(|e| fail(e, steps))?;
    out.final_f = f;
    out.final_sdm = final_sdm;
    Ok(out)
}

/// Writes `error.csv`, `pdf_final.csv`, the potential files, optional SDM
/// snapshots and the SDM step log into `dir`.
pub fn write_experiment_outputs(out: &ExperimentOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("error.csv"))?);
    writeln!(w, "t,rel_error,trace_dev,min_eig")?;
    for e in &out.errors {
        writeln!(w, "{:e},{:e},{:e},{:e}", e.t, e.rel_error, e.trace_dev, e.min_eig)?;
    }
    drop(w);

    let mesh = out.final_f.mesh();
    let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("pdf_final.csv"))?);
    let cols: Vec<String> = (1..=out.config.n).map(|d| format!("x{d}")).collect();
    writeln!(w, "{},f,p_sdm,f_star", cols.join(","))?;
    for i in 0..mesh.len() {
        let x: Vec<String> = mesh.point(i).iter().map(|c| format!("{c:e}")).collect();
        writeln!(
            w,
            "{},{:e},{:e},{:e}",
            x.join(","),
            out.final_f.values[i],
            out.final_p.values[i],
            out.f_star.values[i]
        )?;
    }
    drop(w);

    out.potential
        .write_files(&dir.join("potential.csv"), &dir.join("potential.json"))?;

    let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("sdm_steps.csv"))?);
    writeln!(w, "t,trace_dev,min_eig,step_size")?;
    for d in &out.sdm_diagnostics {
        writeln!(w, "{:e},{:e},{:e},{:e}", d.t, d.trace_dev, d.min_eig, d.step_size)?;
    }
    drop(w);

    if !out.snapshots.is_empty() {
        let sdir = dir.join("sdm");
        std::fs::create_dir_all(&sdir)?;
        let header = SdmHeader {
            n: out.config.n,
            r: out.config.r,
            family: Family::Fourier,
        };
        for (step, s) in &out.snapshots {
            write_sdm_csv(&sdir.join(format!("S_{step:06}.csv")), s, header)?;
        }
    }
    Ok(())
}

/// Runs the experiment and writes every artifact plus `meta.json`. On
/// failure `meta.json` records where the run stopped and the error is
/// returned.
pub fn cmd_experiment(config: &ExperimentConfig, defaults_filled: &[String], dir: &Path) -> Result<ExperimentOutcome> {
    std::fs::create_dir_all(dir)?;
    let start = Instant::now();
    let result = run_experiment(config);
    let total = start.elapsed().as_secs_f64();
    let mut meta = json!({
        "config": config,
        "defaults_filled": defaults_filled,
        "version": crate::VERSION,
    });
    match result {
        Ok(out) => {
            write_experiment_outputs(&out, dir)?;
            meta["timings"] = json!({
                "total_seconds": total,
                "fd_seconds": out.fd_seconds,
                "sdm_seconds": out.sdm_seconds,
            });
            meta["summary"] = out.summary();
            meta["status"] = json!("ok");
            std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
            Ok(out)
        }
        Err((e, failure)) => {
            meta["timings"] = json!({ "total_seconds": total });
            meta["status"] = json!("failed");
            meta["failure"] = match failure {
                Some(f) => serde_json::to_value(f)?,
                None => json!({ "step": null, "message": e.to_string() }),
            };
            std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
            Err(e)
        }
    }
}

/// Density targets for [`cmd_fit`].
#[derive(Debug, Clone, PartialEq)]
pub enum FitTarget {
    /// The weight itself: uniform on the torus or the standard normal.
    Weight,
    /// Gibbs density of a sampled torus potential.
    Gibbs {
        seed: u64,
        cutoff: f64,
        amplitude_mean: f64,
        sigma: f64,
    },
    /// A grid file written by [`DensityGrid::write_csv`].
    GridFile(PathBuf),
    /// `N(a·1, I)` in the Hermite basis.
    ShiftedNormal { shift: f64 },
    /// `½N(a·1, I) + ½N(−a·1, I)` per axis (product form) in the Hermite basis.
    Bimodal { shift: f64 },
}

/// Parameters of a standalone fit.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub family: Family,
    pub n: usize,
    pub r: i32,
    pub mu: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Mesh points per dimension for Fourier targets and output grids.
    pub mesh_points: usize,
    pub target: FitTarget,
}

/// What a fit produced.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub fit: StaticFitResult,
    pub report: FitReport,
    pub table: StructureTable,
}

/// Exact Hermite moments `E_f φ_ℓ` of a product of one-dimensional
/// Gaussian mixtures, using `E He_k(a + Z) = a^k`.
fn hermite_mixture_moments(mho: &IndexSet, shift: f64, bimodal: bool) -> Vec<Complex64> {
    mho.iter()
        .map(|l| {
            let v: f64 = l
                .0
                .iter()
                .map(|&k| {
                    let k = k as u32;
                    let plus = shift.powi(k as i32);
                    let m = if bimodal {
                        0.5 * (plus + (-shift).powi(k as i32))
                    } else {
                        plus
                    };
                    m / crate::basis::ln_factorial(k).exp().sqrt()
                })
                .product();
            Complex64::new(v, 0.0)
        })
        .collect()
}

/// Target moments and `ln ∫f²/ν` (when available in closed form or by
/// quadrature).
fn fit_target(cfg: &FitConfig, table: &StructureTable) -> Result<(MomentVector, Option<f64>, Option<DensityGrid>)> {
    let n = cfg.n;
    match (&cfg.target, cfg.family) {
        (FitTarget::Weight, _) => Ok((MomentVector::of_weight(table), Some(0.0), None)),
        (FitTarget::Gibbs { seed, cutoff, amplitude_mean, sigma }, Family::Fourier) => {
            let v = sample_potential(n, *cutoff, *seed, *amplitude_mean)?;
            let g = gibbs_invariant(&v, beta_from_sigma(*sigma), cfg.mesh_points)?;
            Ok((moments_from_grid(&g, table)?, Some(renyi_of_grid(&g)?), Some(g)))
        }
        (FitTarget::GridFile(path), Family::Fourier) => {
            let g = DensityGrid::read_csv(path)?;
            if g.n != n {
                return Err(Error::DimensionMismatch { expected: n, actual: g.n });
            }
            Ok((moments_from_grid(&g, table)?, Some(renyi_of_grid(&g)?), Some(g)))
        }
        (FitTarget::ShiftedNormal { shift }, Family::Hermite) => {
            let mv = MomentVector::new(table.mho().clone(), hermite_mixture_moments(table.mho(), *shift, false))?;
            // ∫ N(a)² / ν = e^{a²} per axis
            Ok((mv, Some(n as f64 * shift * shift), None))
        }
        (FitTarget::Bimodal { shift }, Family::Hermite) => {
            let mv = MomentVector::new(table.mho().clone(), hermite_mixture_moments(table.mho(), *shift, true))?;
            // per axis ¼(2e^{a²} + 2e^{−a²}) = cosh(a²)
            Ok((mv, Some(n as f64 * (shift * shift).cosh().ln()), None))
        }
        (t, f) => Err(Error::InvalidArgument(format!("target {t:?} is not available for the {f} family"))),
    }
}

/// Fits an SDM to a target without writing anything.
pub fn run_fit(cfg: &FitConfig) -> Result<FitOutcome> {
    let table = cube_table(cfg.family, cfg.n, cfg.r)?;
    let (mv, renyi, _) = fit_target(cfg, &table)?;
    let fit = solve_static(&table, &mv, cfg.mu, cfg.tol, cfg.max_iter)?;
    let prox = match renyi {
        Some(r) => Some(proximity(&table, &mv, r, &fit.sdm)?),
        None => None,
    };
    let report = fit.report(prox);
    Ok(FitOutcome { fit, report, table })
}

/// Fits and writes `sdm.csv`, `fit_report.json` and `pdf_grid.csv`.
/// Non-converged fits still produce all files.
pub fn cmd_fit(cfg: &FitConfig, dir: &Path) -> Result<FitOutcome> {
    std::fs::create_dir_all(dir)?;
    let out = run_fit(cfg)?;
    write_sdm_csv(
        &dir.join("sdm.csv"),
        &out.fit.sdm,
        SdmHeader {
            n: cfg.n,
            r: cfg.r,
            family: cfg.family,
        },
    )?;
    std::fs::write(dir.join("fit_report.json"), serde_json::to_string_pretty(&out.report)?)?;

    let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join("pdf_grid.csv"))?);
    let cols: Vec<String> = (1..=cfg.n).map(|d| format!("x{d}")).collect();
    writeln!(w, "{},p_sdm", cols.join(","))?;
    match cfg.family {
        Family::Fourier => {
            let mesh = Mesh::new(cfg.n, cfg.mesh_points)?;
            let p = pdf_on_mesh(&out.fit.sdm, &out.table, &mesh)?;
            for (i, v) in p.iter().enumerate() {
                let x: Vec<String> = mesh.point(i).iter().map(|c| format!("{c:e}")).collect();
                writeln!(w, "{},{:e}", x.join(","), v)?;
            }
        }
        Family::Hermite => {
            // Uniform grid on [-5, 5]^n.
            let m = cfg.mesh_points;
            let total = m.pow(cfg.n as u32);
            for idx in 0..total {
                let mut rest = idx;
                let mut x = vec![0.0; cfg.n];
                for d in (0..cfg.n).rev() {
                    x[d] = -5.0 + 10.0 * (rest % m) as f64 / (m - 1).max(1) as f64;
                    rest /= m;
                }
                let v = eval_pdf(&out.fit.sdm, &out.table, &x)?;
                let xs: Vec<String> = x.iter().map(|c| format!("{c:e}")).collect();
                writeln!(w, "{},{:e}", xs.join(","), v)?;
            }
        }
    }
    Ok(out)
}
