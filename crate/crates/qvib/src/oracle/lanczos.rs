//! Lanczos iteration for extremal eigenvalues of large symmetric matrices.

use super::OracleError;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smallest eigenvalue and Ritz vector of a symmetric operator given as a
/// matrix-vector product, with full reorthogonalization. Converges when the
/// residual bound `|β_k · s_k|` drops below `tol_abs`.
pub fn lanczos_smallest(
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    dim: usize,
    max_iter: usize,
    tol_abs: f64,
    seed: u64,
) -> Result<(f64, DVector<f64>), OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0_f64));
    q /= q.norm();

    let m = max_iter.min(dim);
    let mut basis: Vec<DVector<f64>> = vec![q.clone()];
    let mut alphas: Vec<f64> = Vec::with_capacity(m);
    let mut betas: Vec<f64> = Vec::with_capacity(m);

    let mut last_residual = f64::INFINITY;
    for k in 0..m {
        let mut w = apply(&basis[k]);
        let alpha = basis[k].dot(&w);
        alphas.push(alpha);
        w -= &basis[k] * alpha;
        if k > 0 {
            w -= &basis[k - 1] * betas[k - 1];
        }
        // full reorthogonalization keeps the basis numerically orthogonal
        for b in &basis {
            let overlap = b.dot(&w);
            w -= b * overlap;
        }
        let beta = w.norm();

        // Ritz value of the current tridiagonal block.
        let kk = alphas.len();
        let mut t = DMatrix::zeros(kk, kk);
        for i in 0..kk {
            t[(i, i)] = alphas[i];
            if i + 1 < kk {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = nalgebra::SymmetricEigen::new(t);
        let (mut min_idx, mut min_val) = (0, f64::INFINITY);
        for (i, &v) in eig.eigenvalues.iter().enumerate() {
            if v < min_val {
                min_val = v;
                min_idx = i;
            }
        }
        let s = eig.eigenvectors.column(min_idx);
        last_residual = (beta * s[kk - 1]).abs();
        if last_residual <= tol_abs || beta <= tol_abs {
            let mut v = DVector::zeros(dim);
            for (i, b) in basis.iter().enumerate() {
                v += b * s[i];
            }
            let norm = v.norm();
            if norm > 0.0 {
                v /= norm;
            }
            return Ok((min_val, v));
        }

        betas.push(beta);
        basis.push(w / beta);
    }

    Err(OracleError::NotConverged { residual: last_residual, tol: tol_abs })
}
