//! Probability densities represented as weighted quadratic forms of
//! orthonormal basis functions, `p(x) = ν(x) Φ(x)* S Φ(x)`, with `S` a
//! positive semi-definite Hermitian matrix of unit trace (a stochastic
//! density matrix, SDM).
//!
//! The crate covers:
//!
//! * [`basis`]: Fourier and Hermite bases, index sets, structure matrices.
//! * [`sdm`]: the SDM type and the density, moments and entropy it defines.
//! * [`approx`]: barrier-regularized quadratic fitting of an SDM to a target.
//! * [`dynamics`]: the SDM ODE closing the Fokker-Planck equation.
//! * [`potential`]: seeded random trigonometric potentials on the torus.
//! * [`fpke_ref`]: finite-difference and Galerkin reference solvers.
//! * [`experiment`] and [`check`]: end-to-end runs and the invariant suite.

pub mod approx;
pub mod basis;
pub mod check;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod fpke_ref;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod potential;
pub mod quadrature;
pub mod sdm;
#[cfg(test)]
mod testutil;

pub use basis::{Family, IndexSet, MultiIndex, StructureTable};
pub use error::{Error, Result};
pub use sdm::Sdm;

/// Library version recorded in experiment metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
