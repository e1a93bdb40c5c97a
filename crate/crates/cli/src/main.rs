use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use sdmpdf_core::approx::{DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use sdmpdf_core::basis::Family;
use sdmpdf_core::check::run_checks;
use sdmpdf_core::experiment::{cmd_experiment, cmd_fit, ExperimentConfig, FitConfig, FitTarget};
use sdmpdf_core::potential::DEFAULT_AMPLITUDE_MEAN;

#[derive(Parser)]
#[command(name = "sdmpdf", version, about = "SDM density approximation on the torus and in Hermite bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-difference reference vs closed SDM flow from the uniform density.
    Experiment {
        /// JSON config; omitted fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fits an SDM to a target density.
    Fit(FitArgs),
    /// Runs the invariant suite and prints a JSON report.
    Check {
        /// Flip the drift sign of the generator; the equilibrium check should fail.
        #[arg(long)]
        mutations: bool,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Fourier,
    Hermite,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    /// Uniform density on the torus (Fourier).
    Uniform,
    /// Standard normal (Hermite).
    Normal,
    /// Gibbs density of a sampled potential (Fourier).
    Gibbs,
    /// Density grid file (Fourier).
    Grid,
    /// N(shift·1, I) (Hermite).
    Shifted,
    /// Equal mixture of N(±shift) per axis (Hermite).
    Bimodal,
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long, value_enum, default_value = "fourier")]
    family: FamilyArg,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    r: i32,
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Mesh points per dimension for grid targets and the output grid.
    #[arg(long, default_value_t = 100)]
    mesh: usize,
    #[arg(long, value_enum)]
    target: TargetArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Potential cutoff R.
    #[arg(long, default_value_t = 5.0)]
    cutoff: f64,
    #[arg(long, default_value_t = DEFAULT_AMPLITUDE_MEAN)]
    amplitude_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    /// Grid file for `--target grid`.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn fit(args: FitArgs) -> Result<()> {
    let family = match args.family {
        FamilyArg::Fourier => Family::Fourier,
        FamilyArg::Hermite => Family::Hermite,
    };
    let target = match (args.target, family) {
        (TargetArg::Uniform, Family::Fourier) | (TargetArg::Normal, Family::Hermite) => FitTarget::Weight,
        (TargetArg::Gibbs, _) => FitTarget::Gibbs {
            seed: args.seed,
            cutoff: args.cutoff,
            amplitude_mean: args.amplitude_mean,
            sigma: args.sigma,
        },
        (TargetArg::Grid, _) => FitTarget::GridFile(args.grid.context("--target grid needs --grid <file>")?),
        (TargetArg::Shifted, _) => FitTarget::ShiftedNormal { shift: args.shift },
        (TargetArg::Bimodal, _) => FitTarget::Bimodal { shift: args.shift },
        (TargetArg::Uniform, _) => bail!("the uniform target needs the fourier family"),
        (TargetArg::Normal, _) => bail!("the normal target needs the hermite family"),
    };
    let cfg = FitConfig {
        family,
        n: args.n,
        r: args.r,
        mu: args.mu,
        tol: args.tol,
        max_iter: args.max_iter,
        mesh_points: args.mesh,
        target,
    };
    let out = cmd_fit(&cfg, &args.out)?;
    println!("{}", serde_json::to_string_pretty(&out.report)?);
    if !out.report.converged {
        eprintln!("warning: solver did not converge; artifacts written to {}", args.out.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Experiment { config, seed, out } => {
            let text = match &config {
                Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
                None => String::new(),
            };
            let (mut cfg, mut filled) = ExperimentConfig::from_json(&text)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
                filled.retain(|f| f != "seed");
            }
            let outcome = cmd_experiment(&cfg, &filled, &out)
                .with_context(|| format!("experiment failed; see {}", out.join("meta.json").display()))?;
            println!("{}", serde_json::to_string_pretty(&outcome.summary())?);
        }
        Command::Fit(args) => fit(args)?,
        Command::Check { mutations, out } => {
            let report = run_checks(mutations);
            let text = serde_json::to_string_pretty(&report)?;
            if let Some(path) = out {
                std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
            }
            println!("{text}");
        }
    }
    Ok(())
}
