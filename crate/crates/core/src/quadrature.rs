//! Gauss-Hermite quadrature for the standard normal weight.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Nodes and weights with `Σ w_i g(x_i) ≈ E g(X)`, `X ~ N(0, 1)`, exact for
/// polynomials of degree `< 2·points`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
/// probabilists' Hermite recurrence (off-diagonal `√k`), weights the squared
/// first components of the normalized eigenvectors.
pub fn gauss_hermite(points: usize) -> Result<GaussHermite> {
    if points == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one point".into()));
    }
    let mut jacobi = DMatrix::<f64>::zeros(points, points);
    for k in 1..points {
        let b = (k as f64).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..points)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(GaussHermite {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

impl GaussHermite {
    /// Tensor-grid nodes and weights in `n` dimensions, last axis fastest.
    pub fn tensor_nodes(&self, n: usize) -> Vec<(Vec<f64>, f64)> {
        let mut out = Vec::with_capacity(self.nodes.len().pow(n as u32));
        self.expect_nd(n, |x| {
            out.push((x.to_vec(), 0.0));
            0.0
        });
        let q = self.nodes.len();
        for (i, node) in out.iter_mut().enumerate() {
            let mut rest = i;
            let mut w = 1.0;
            for _ in 0..n {
                w *= self.weights[rest % q];
                rest /= q;
            }
            node.1 = w;
        }
        out
    }

    /// `E g(X)` for `X ~ N(0, I_n)` on the tensor grid.
    pub fn expect_nd(&self, n: usize, mut g: impl FnMut(&[f64]) -> f64) -> f64 {
        let q = self.nodes.len();
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for d in 0..n {
                x[d] = self.nodes[idx[d]];
                w *= self.weights[idx[d]];
            }
            total += w * g(&x);
            let mut d = n;
            loop {
                if d == 0 {
                    return total;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < q {
                    break;
                }
                idx[d] = 0;
            }
        }
    }
}
