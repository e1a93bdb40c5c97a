//! Random fixtures shared by unit tests.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMatrix};
use crate::sdm::Sdm;

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut m = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    linalg::hermitize(&mut m);
    m
}

/// A well-conditioned random SDM (`G G* + 0.05 I`, normalized).
pub fn random_sdm(n: usize, rng: &mut ChaCha8Rng) -> Sdm {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let m = &g * g.adjoint() + CMatrix::identity(n, n) * Complex64::new(0.05, 0.0);
    Sdm::normalized(m).unwrap()
}
