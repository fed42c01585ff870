//! Tucker decomposition by higher-order orthogonal iteration (HOOI).
//!
//! Every unfolding SVD is truncated so the discarded singular-value tail
//! stays within the per-SVD threshold; sweeps refine the subspaces until the
//! reconstruction error stops changing.

use super::tensor::{frobenius_diff, mode_multiply, mode_multiply_transpose, unfold};
use super::DecompError;
use nalgebra::DMatrix;
use ndarray::ArrayD;

/// Core tensor plus per-mode orthonormal factor matrices (`d_i × r_i`).
#[derive(Debug, Clone)]
pub struct TuckerDecomposition {
    pub core: ArrayD<f64>,
    pub factors: Vec<DMatrix<f64>>,
    /// Frobenius error of the reconstruction against the input.
    pub error: f64,
    pub sweeps: usize,
    pub converged: bool,
}

impl TuckerDecomposition {
    pub fn ranks(&self) -> Vec<usize> {
        self.core.shape().to_vec()
    }

    pub fn reconstruct(&self) -> ArrayD<f64> {
        let mut t = self.core.clone();
        for (mode, f) in self.factors.iter().enumerate() {
            t = mode_multiply(&t, f, mode);
        }
        t
    }
}

/// Singular vectors of `m` with the rank chosen so the tail norm
/// `sqrt(Σ_{j>k} σ_j²)` does not exceed `eps`, keeping at least one column.
fn truncated_left_singular(m: &DMatrix<f64>, eps: f64) -> Result<DMatrix<f64>, DecompError> {
    let svd = m
        .clone()
        .try_svd(true, false, f64::EPSILON, 0)
        .ok_or_else(|| DecompError::SvdFailure(format!("{}x{} unfolding", m.nrows(), m.ncols())))?;
    let u = svd.u.as_ref().expect("u requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
    });
    let sorted: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut rank = sorted.len();
    let mut tail = 0.0;
    while rank > 1 {
        let candidate = tail + sorted[rank - 1] * sorted[rank - 1];
        if candidate.sqrt() <= eps {
            tail = candidate;
            rank -= 1;
        } else {
            break;
        }
    }
    let mut out = DMatrix::zeros(m.nrows(), rank);
    for (col, &i) in order[..rank].iter().enumerate() {
        out.set_column(col, &u.column(i));
    }
    Ok(out)
}

/// HOOI with per-SVD truncation threshold `eps_t`. Requires order >= 3;
/// matrices take the plain SVD path instead. A result that stopped on
/// `max_sweeps` rather than a stationary fit is flagged `converged: false`.
pub fn hooi(
    tensor: &ArrayD<f64>,
    eps_t: f64,
    max_sweeps: usize,
) -> Result<TuckerDecomposition, DecompError> {
    let ndim = tensor.ndim();
    if ndim < 3 {
        return Err(DecompError::OrderTooLow { order: ndim, needed: 3 });
    }

    // Interlaced SVD init: factors computed mode by mode, later modes seeing
    // the earlier projections.
    let mut factors: Vec<DMatrix<f64>> = Vec::with_capacity(ndim);
    for mode in 0..ndim {
        let mut projected = tensor.clone();
        for (m, f) in factors.iter().enumerate() {
            projected = mode_multiply_transpose(&projected, f, m);
        }
        factors.push(truncated_left_singular(&unfold(&projected, mode), eps_t)?);
    }

    let mut err_prev = f64::INFINITY;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        for mode in 0..ndim {
            let mut projected = tensor.clone();
            for (m, f) in factors.iter().enumerate() {
                if m != mode {
                    projected = mode_multiply_transpose(&projected, f, m);
                }
            }
            factors[mode] = truncated_left_singular(&unfold(&projected, mode), eps_t)?;
        }
        let mut core = tensor.clone();
        for (m, f) in factors.iter().enumerate() {
            core = mode_multiply_transpose(&core, f, m);
        }
        let recon = {
            let mut t = core.clone();
            for (m, f) in factors.iter().enumerate() {
                t = mode_multiply(&t, f, m);
            }
            t
        };
        let err = frobenius_diff(&recon, tensor);
        if (err_prev - err).abs() < 1e-12 {
            converged = true;
            break;
        }
        err_prev = err;
    }

    let mut core = tensor.clone();
    for (m, f) in factors.iter().enumerate() {
        core = mode_multiply_transpose(&core, f, m);
    }
    let recon = {
        let mut t = core.clone();
        for (m, f) in factors.iter().enumerate() {
            t = mode_multiply(&t, f, m);
        }
        t
    };
    let error = frobenius_diff(&recon, tensor);
    Ok(TuckerDecomposition { core, factors, error, sweeps, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::tensor::frobenius;
    use ndarray::IxDyn;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random core of shape `core_shape` expanded through random orthonormal
    /// factors into `full_shape`.
    fn exact_multilinear(core_shape: &[usize], full_shape: &[usize], seed: u64) -> ArrayD<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let core_data: Vec<f64> = (0..core_shape.iter().product::<usize>())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let mut t = ArrayD::from_shape_vec(IxDyn(core_shape), core_data).unwrap();
        for (mode, (&d, &r)) in full_shape.iter().zip(core_shape).enumerate() {
            let gauss = DMatrix::from_fn(d, r, |_, _| rng.gen_range(-1.0..1.0));
            let q = gauss.qr().q().columns(0, r).into_owned();
            t = mode_multiply(&t, &q, mode);
        }
        t
    }

    #[test]
    fn recovers_exact_multilinear_rank() {
        let t = exact_multilinear(&[2, 2, 2], &[4, 4, 4], 5);
        let tk = hooi(&t, 1e-10, 50).unwrap();
        assert_eq!(tk.ranks(), vec![2, 2, 2]);
        assert!(tk.error < 1e-12, "error {}", tk.error);
    }

    #[test]
    fn oversized_threshold_collapses_to_trivial_core() {
        let t = exact_multilinear(&[2, 2, 2], &[3, 3, 3], 6);
        let tk = hooi(&t, 10.0 * frobenius(&t), 20).unwrap();
        assert_eq!(tk.ranks(), vec![1, 1, 1]);
    }

    #[test]
    fn matrices_are_routed_to_svd() {
        let t = ArrayD::zeros(IxDyn(&[3, 3]));
        assert!(matches!(hooi(&t, 0.0, 10), Err(DecompError::OrderTooLow { .. })));
    }

    #[test]
    fn zero_threshold_keeps_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data: Vec<f64> = (0..27).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = ArrayD::from_shape_vec(IxDyn(&[3, 3, 3]), data).unwrap();
        let tk = hooi(&t, 0.0, 30).unwrap();
        assert_eq!(tk.ranks(), vec![3, 3, 3]);
        assert!(tk.error < 1e-12);
    }
}
