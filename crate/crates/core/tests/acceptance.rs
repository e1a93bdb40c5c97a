//! Acceptance gate: one printed PASS/FAIL line per criterion, then a single
//! assertion over all of them.
//!
//! Run with `cargo test -p sdmpdf-core --test acceptance -- --nocapture` to
//! see the table.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdmpdf_core::approx::{moments_from_grid, moments_to_b, solve_static, MomentVector, StaticFitResult};
use sdmpdf_core::basis::{cube_table, Family, MultiIndex, StructureTable};
use sdmpdf_core::dynamics::{compute_k, Generator};
use sdmpdf_core::experiment::{run_experiment, run_sdm_only, ExperimentConfig, ExperimentOutcome};
use sdmpdf_core::fpke_ref::{
    beta_from_sigma, energy_bound_check, fd_evolve, galerkin_evolve, gibbs_invariant, max_increase,
    relative_l2, DensityGrid, FourierDensity,
};
use sdmpdf_core::linalg::{self, CMatrix};
use sdmpdf_core::mesh::Mesh;
use sdmpdf_core::operators::apply_a;
use sdmpdf_core::potential::sample_potential;
use sdmpdf_core::quadrature::gauss_hermite;
use sdmpdf_core::sdm::{eval_pdf, renyi_vs_weight, Sdm};

mod tol {
    /// Per-seed ceiling on `max_t D(f, p_S)/D(f, 0)`.
    pub const REL_ERROR_PER_SEED: f64 = 0.05;
    /// Ceiling on the median over seeds of the same quantity.
    pub const REL_ERROR_MEDIAN: f64 = 0.025;
    /// `‖p_S − f_*‖/‖f_*‖` and `‖f − f_*‖/‖f_*‖` at the final time.
    pub const EQUILIBRIUM_DISTANCE: f64 = 0.05;
    /// `‖S − I_N/N‖_F` for the fit of the weight itself.
    pub const FIXED_POINT: f64 = 1e-8;
    /// Frobenius norm of the stationarity residual of a converged fit.
    pub const OPTIMALITY_RESIDUAL: f64 = 1e-10;
    /// Closed-form Hermite structure coefficients vs quadrature.
    pub const STRUCTURE_ORACLE: f64 = 1e-10;
    /// `|Tr S − 1|` along the SDM flow.
    pub const TRACE: f64 = 1e-9;
    /// Grid-quadrature moments of `p_S` vs `⟨E_m, S⟩`.
    pub const MOMENT: f64 = 1e-10;
    /// Closed-form Renyi entropy vs quadrature.
    pub const RENYI: f64 = 1e-9;
    /// Relative slack on the dissipation bound of `‖f‖²_H`.
    pub const ENERGY_BOUND: f64 = 1e-3;
    /// Per-step slack on the monotone decrease of `R(f ‖ f_*)`.
    pub const ENTROPY_STEP: f64 = 1e-6;
    /// Galerkin vs finite differences, relative L².
    pub const CROSS_SOLVER: f64 = 1e-2;
    /// `‖K(f_*)‖_F`.
    pub const INVARIANCE: f64 = 1e-8;
    /// Accepted window for `‖S_dt − S_{dt/2}‖ / ‖S_{dt/2} − S_{dt/4}‖`.
    pub const ORDER_RATIO: (f64, f64) = (8.0, 32.0);
}

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const RANDOM_SDMS: usize = 20;

struct Line {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn random_sdm(n: usize, rng: &mut ChaCha8Rng, real: bool) -> Sdm {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
        Complex64::new(rng.random_range(-1.0..1.0), im)
    });
    let m = &g * g.adjoint() + linalg::identity(n) * Complex64::new(0.05, 0.0);
    Sdm::normalized(m).unwrap()
}

/// `He_k(x)/√k!` from the unnormalized recurrence `He_{k+1} = x He_k − k He_{k−1}`.
fn hermite_oracle(x: f64, k: usize) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if k == 0 {
        return 1.0;
    }
    for j in 1..k {
        let c = x * b - j as f64 * a;
        a = b;
        b = c;
    }
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    b / fact.sqrt()
}

/// `‖𝒜(S) − μS⁻¹ − λI − ℬ(f)‖_F`.
fn optimality_residual(table: &StructureTable, mv: &MomentVector, mu: f64, fit: &StaticFitResult) -> f64 {
    let s = fit.sdm.matrix();
    let n = table.n_basis();
    let r = apply_a(table, s).unwrap()
        - linalg::inverse_pd(s, "residual").unwrap() * Complex64::new(mu, 0.0)
        - linalg::identity(n) * Complex64::new(fit.lagrange, 0.0)
        - moments_to_b(table, mv);
    linalg::frobenius_norm(&r)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn default_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        seed,
        ..ExperimentConfig::default()
    }
}

fn criteria_1_2_9(lines: &mut Vec<Line>) {
    let runs: Vec<(u64, Result<ExperimentOutcome, String>)> = SEEDS
        .iter()
        .map(|&seed| {
            let r = run_experiment(&default_config(seed)).map_err(|(e, failure)| match failure {
                Some(f) => format!("step {} (t = {}): {}", f.step, f.time, f.message),
                None => e.to_string(),
            });
            (seed, r)
        })
        .collect();

    let mut per_seed = Vec::new();
    let mut c1 = true;
    let mut c2 = true;
    let mut c9 = true;
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    let mut d9 = Vec::new();
    for (seed, run) in &runs {
        match run {
            Ok(out) => {
                let e = out.max_rel_error();
                per_seed.push(e);
                c1 &= e <= tol::REL_ERROR_PER_SEED;
                d1.push(format!("seed {seed}: {e:.3e}"));

                let (ps, fs) = (out.sdm_to_invariant(), out.fd_to_invariant());
                c2 &= ps <= tol::EQUILIBRIUM_DISTANCE && fs <= tol::EQUILIBRIUM_DISTANCE;
                d2.push(format!("seed {seed}: p_S {ps:.3e}, f {fs:.3e}"));

                let lap = out.potential.laplacian_sup_norm(200).unwrap();
                let bound = energy_bound_check(&out.fd_times, &out.fd_h_norm_sqr, lap, out.config.sigma, 2, tol::ENERGY_BOUND);
                let rise = max_increase(&out.fd_renyi_to_invariant);
                c9 &= bound.violations.is_empty() && rise <= tol::ENTROPY_STEP;
                d9.push(format!(
                    "seed {seed}: bound excess {:.3e}, entropy rise {rise:.3e}",
                    bound.worst_relative_excess
                ));
            }
            Err(msg) => {
                c1 = false;
                c2 = false;
                c9 = false;
                d1.push(format!("seed {seed}: aborted at {msg}"));
                d2.push(format!("seed {seed}: no final state"));
                d9.push(format!("seed {seed}: no complete trajectory"));
            }
        }
    }
    if per_seed.len() == SEEDS.len() {
        let m = median(per_seed);
        c1 &= m <= tol::REL_ERROR_MEDIAN;
        d1.push(format!("median {m:.3e}"));
    }
    lines.push(Line { id: 1, name: "reproduction of the torus experiment", passed: c1, detail: d1.join("; ") });
    lines.push(Line { id: 2, name: "equilibrium proximity at t = 4", passed: c2, detail: d2.join("; ") });
    lines.push(Line { id: 9, name: "dissipation diagnostics", passed: c9, detail: d9.join("; ") });
}

/// Criteria 3 and 4. Returns the worst residual seen so the random-target
/// fits of criterion 4 share one pass.
fn criteria_3_4(lines: &mut Vec<Line>) {
    let mut worst_fixed: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut fits = 0;
    let mut unconverged = Vec::new();
    let mut record = |table: &StructureTable, mv: &MomentVector, mu: f64, fit: &StaticFitResult, label: String| {
        if fit.converged {
            fits += 1;
            worst_residual = worst_residual.max(optimality_residual(table, mv, mu, fit));
        } else {
            unconverged.push(label);
        }
    };

    // I_N/N is the closed-form optimum only on the torus, where Tr E_ℓ = 0
    // for ℓ ≠ 0. Hermite fits of the weight are still checked in criterion 4.
    let mut c3 = true;
    for family in [Family::Fourier] {
        let table = cube_table(family, 2, 2).unwrap();
        let mv = MomentVector::of_weight(&table);
        let n = table.n_basis();
        for mu in [1e-3, 1e-2, 1.0] {
            let fit = solve_static(&table, &mv, mu, 1e-12, 100).unwrap();
            let dev = linalg::frobenius_norm(&(fit.sdm.matrix() - linalg::identity(n) / Complex64::new(n as f64, 0.0)));
            worst_fixed = worst_fixed.max(dev);
            c3 &= fit.converged && dev <= tol::FIXED_POINT;
            record(&table, &mv, mu, &fit, format!("{family} weight μ={mu}"));
        }
    }
    lines.push(Line {
        id: 3,
        name: "static fixed point at the weight",
        passed: c3,
        detail: format!("max ‖S − I/N‖_F {worst_fixed:.3e}"),
    });

    let htable = cube_table(Family::Hermite, 2, 2).unwrap();
    let hweight = MomentVector::of_weight(&htable);
    for mu in [1e-3, 1e-2, 1.0] {
        let fit = solve_static(&htable, &hweight, mu, 1e-10, 100).unwrap();
        record(&htable, &hweight, mu, &fit, format!("hermite weight μ={mu}"));
    }

    let table = cube_table(Family::Fourier, 2, 2).unwrap();
    for seed in SEEDS {
        let v = sample_potential(2, 5.0, seed, 0.25).unwrap();
        let g = gibbs_invariant(&v, beta_from_sigma(1.0), 200).unwrap();
        let mv = moments_from_grid(&g, &table).unwrap();
        for mu in [1e-3, 1e-2, 1e-1, 1.0] {
            let fit = solve_static(&table, &mv, mu, 1e-10, 100).unwrap();
            record(&table, &mv, mu, &fit, format!("gibbs seed {seed} μ={mu}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for family in [Family::Fourier, Family::Hermite] {
        let table = cube_table(family, 2, 2).unwrap();
        for _ in 0..5 {
            let target = random_sdm(table.n_basis(), &mut rng, family == Family::Hermite);
            let mv = MomentVector::of_sdm(&target, &table);
            let fit = solve_static(&table, &mv, 1e-2, 1e-10, 100).unwrap();
            record(&table, &mv, 1e-2, &fit, format!("{family} random target"));
        }
    }
    lines.push(Line {
        id: 4,
        name: "optimality residual of converged fits",
        passed: worst_residual <= tol::OPTIMALITY_RESIDUAL && fits > 0,
        detail: format!(
            "{fits} converged fits, max residual {worst_residual:.3e}{}",
            if unconverged.is_empty() { String::new() } else { format!("; not converged: {}", unconverged.join(", ")) }
        ),
    });
}

fn criterion_5(lines: &mut Vec<Line>) {
    let mut fourier_ok = true;
    for r in 1..=2 {
        let table = cube_table(Family::Fourier, 2, r).unwrap();
        for (pos, l) in table.mho().iter().enumerate() {
            let e = table.dense(pos);
            for (a, j) in table.lambda().iter().enumerate() {
                for (b, k) in table.lambda().iter().enumerate() {
                    let expected = if j.sub(k) == *l { 1.0 } else { 0.0 };
                    fourier_ok &= e[(a, b)] == Complex64::new(expected, 0.0);
                }
            }
        }
    }

    let gh = gauss_hermite(12).unwrap();
    let mut worst: f64 = 0.0;
    for n in 1..=2usize {
        let table = cube_table(Family::Hermite, n, 4).unwrap();
        let nodes = gh.tensor_nodes(n);
        let phi = |k: &MultiIndex, x: &[f64]| -> f64 {
            k.entries().iter().zip(x).map(|(&kd, &xd)| hermite_oracle(xd, kd as usize)).product()
        };
        for (pos, l) in table.mho().iter().enumerate() {
            let e = table.dense(pos);
            for (a, j) in table.lambda().iter().enumerate() {
                for (b, k) in table.lambda().iter().enumerate() {
                    let quad: f64 = nodes.iter().map(|(x, w)| w * phi(j, x) * phi(k, x) * phi(l, x)).sum();
                    worst = worst.max((quad - e[(a, b)].re).abs()).max(e[(a, b)].im.abs());
                }
            }
        }
    }
    lines.push(Line {
        id: 5,
        name: "structure-coefficient oracles",
        passed: fourier_ok && worst <= tol::STRUCTURE_ORACLE,
        detail: format!("Fourier Kronecker exact: {fourier_ok}; Hermite max gap {worst:.3e}"),
    });
}

/// Criteria 6 and 12 use the SDM flow of the same configurations.
fn criteria_6_12(lines: &mut Vec<Line>) {
    let mut c6 = true;
    let mut max_trace: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut errors = Vec::new();
    let mut seed0_final = None;
    for seed in SEEDS {
        match run_sdm_only(&default_config(seed), 0.002, 1) {
            Ok(traj) => {
                for s in &traj.states {
                    let m = s.matrix();
                    max_trace = max_trace.max((linalg::trace(m).re - 1.0).abs());
                    min_eig = min_eig.min(linalg::min_eigenvalue(m));
                }
                if seed == 0 {
                    seed0_final = traj.final_state().cloned();
                }
            }
            Err(e) => {
                c6 = false;
                errors.push(format!("seed {seed}: {e}"));
            }
        }
    }
    c6 &= max_trace <= tol::TRACE && min_eig > 0.0;
    lines.push(Line {
        id: 6,
        name: "SDM legitimacy along the flow",
        passed: c6,
        detail: format!("max |Tr S − 1| {max_trace:.3e}, min λ {min_eig:.3e} {}", errors.join("; ")),
    });

    let cfg = default_config(0);
    let finals: Vec<Option<Sdm>> = std::iter::once(seed0_final)
        .chain([0.001, 0.0005].iter().map(|&dt| run_sdm_only(&cfg, dt, usize::MAX).ok().and_then(|t| t.final_state().cloned())))
        .collect();
    let (passed, detail) = match (&finals[0], &finals[1], &finals[2]) {
        (Some(a), Some(b), Some(c)) => {
            let d1 = linalg::frobenius_norm(&(a.matrix() - b.matrix()));
            let d2 = linalg::frobenius_norm(&(b.matrix() - c.matrix()));
            let ratio = d1 / d2;
            (
                ratio >= tol::ORDER_RATIO.0 && ratio <= tol::ORDER_RATIO.1,
                format!("seed 0: ‖ΔS‖ {d1:.3e} → {d2:.3e}, ratio {ratio:.2}"),
            )
        }
        _ => (false, "a refined run failed".to_string()),
    };
    lines.push(Line { id: 12, name: "integrator order", passed, detail });
}

fn criteria_7_8(lines: &mut Vec<Line>) {
    let table = cube_table(Family::Fourier, 2, 2).unwrap();
    let mesh = Mesh::new(2, 24).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_moment: f64 = 0.0;
    let mut worst_renyi: f64 = 0.0;
    for _ in 0..RANDOM_SDMS {
        let s = random_sdm(table.n_basis(), &mut rng, false);
        let p: Vec<f64> = (0..mesh.len()).map(|i| eval_pdf(&s, &table, &mesh.point(i)).unwrap()).collect();
        for (pos, m) in table.mho().iter().enumerate() {
            let quad: Complex64 = (0..mesh.len())
                .map(|i| {
                    let x = mesh.point(i);
                    let phase: f64 = m.entries().iter().zip(&x).map(|(&k, &xd)| k as f64 * xd).sum();
                    Complex64::from_polar(p[i], phase)
                })
                .sum::<Complex64>()
                * mesh.cell_volume();
            let exact = linalg::inner(&table.dense(pos), s.matrix());
            worst_moment = worst_moment.max((quad - exact).norm());
        }
        let nu = (2.0 * PI).powi(-2);
        let quad: f64 = p.iter().map(|v| v * v / nu).sum::<f64>() * mesh.cell_volume();
        worst_renyi = worst_renyi.max((quad.ln() - renyi_vs_weight(&s, &table).unwrap()).abs());
    }

    let htable = cube_table(Family::Hermite, 2, 2).unwrap();
    let nodes = gauss_hermite(12).unwrap().tensor_nodes(2);
    for _ in 0..RANDOM_SDMS {
        let s = random_sdm(htable.n_basis(), &mut rng, true);
        let quad: f64 = nodes
            .iter()
            .map(|(x, w)| {
                let nu = (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp() / (2.0 * PI);
                let ratio = eval_pdf(&s, &htable, x).unwrap() / nu;
                w * ratio * ratio
            })
            .sum();
        worst_renyi = worst_renyi.max((quad.ln() - renyi_vs_weight(&s, &htable).unwrap()).abs());
    }

    lines.push(Line {
        id: 7,
        name: "moment consistency",
        passed: worst_moment <= tol::MOMENT,
        detail: format!("{RANDOM_SDMS} SDMs, max gap {worst_moment:.3e}"),
    });
    lines.push(Line {
        id: 8,
        name: "Renyi closed form",
        passed: worst_renyi <= tol::RENYI,
        detail: format!("{RANDOM_SDMS} Fourier + {RANDOM_SDMS} Hermite SDMs, max gap {worst_renyi:.3e}"),
    });
}

fn criterion_10(lines: &mut Vec<Line>) {
    let times = [0.5, 1.0, 2.0];
    let dt = 0.002;
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    let mut ok = true;
    for seed in SEEDS {
        let v = sample_potential(2, 2.0, seed, 0.25).unwrap();
        let fd = fd_evolve(&DensityGrid::uniform(2, 100).unwrap(), &v, 1.0, dt, 1000, 250, None);
        let fd = match fd {
            Ok(t) => t,
            Err(e) => {
                ok = false;
                detail.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let gal = galerkin_evolve(&FourierDensity::uniform(2, 8), &v, 1.0, dt, &times).unwrap();
        let mut seed_worst: f64 = 0.0;
        for (t, g) in &gal {
            let f = &fd.snapshots.iter().find(|(s, _)| (s - t).abs() < 1e-9).unwrap().1;
            seed_worst = seed_worst.max(relative_l2(&g.to_grid(100).unwrap().values, &f.values));
        }
        worst = worst.max(seed_worst);
        detail.push(format!("seed {seed}: {seed_worst:.3e}"));
    }
    lines.push(Line {
        id: 10,
        name: "Galerkin vs finite differences",
        passed: ok && worst <= tol::CROSS_SOLVER,
        detail: detail.join("; "),
    });
}

fn criterion_11(lines: &mut Vec<Line>) {
    let table = cube_table(Family::Fourier, 2, 2).unwrap();
    let mut worst: f64 = 0.0;
    for seed in SEEDS {
        let v = sample_potential(2, 5.0, seed, 0.25).unwrap();
        let gen = Generator::new(v.clone(), 1.0).unwrap();
        let f_star = gibbs_invariant(&v, beta_from_sigma(1.0), 256).unwrap();
        let mv = sdmpdf_core::approx::moments_on_set(&f_star, gen.extended_set(&table).unwrap()).unwrap();
        worst = worst.max(linalg::frobenius_norm(&compute_k(&gen, &mv, &table).unwrap().matrix));
    }
    lines.push(Line {
        id: 11,
        name: "invariance of the closed flow",
        passed: worst <= tol::INVARIANCE,
        detail: format!("max ‖K(f_*)‖_F {worst:.3e} (moments on a 256² mesh)"),
    });
}

#[test]
fn acceptance() {
    let mut lines = Vec::new();
    criteria_1_2_9(&mut lines);
    criteria_3_4(&mut lines);
    criterion_5(&mut lines);
    criteria_6_12(&mut lines);
    criteria_7_8(&mut lines);
    criterion_10(&mut lines);
    criterion_11(&mut lines);
    lines.sort_by_key(|l| l.id);

    println!();
    for l in &lines {
        println!(
            "criterion {:>2} {:<40} {}  {}",
            l.id,
            l.name,
            if l.passed { "PASS" } else { "FAIL" },
            l.detail
        );
    }
    let failed: Vec<u32> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
