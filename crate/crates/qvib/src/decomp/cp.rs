//! Canonical polyadic decomposition fitted by alternating least squares.
//!
//! Factor updates solve the normal equations `A_n · V = MTTKRP` with
//! `V = ⊛_{j≠n} A_jᵀA_j` and a small diagonal regularizer; weights are
//! absorbed by column normalization after every update. Initialization takes
//! the leading left singular vectors of each unfolding, padded with seeded
//! uniform noise when the rank exceeds an axis length, so runs are
//! deterministic for a fixed `(tensor, seed, schedule)`.

use super::tensor::{cp_reconstruct, frobenius, frobenius_diff, khatri_rao_excluding, unfold};
use super::DecompError;
use nalgebra::DMatrix;
use ndarray::ArrayD;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_SWEEPS: usize = 200;
const FIT_CHANGE_RTOL: f64 = 1e-10;
const REGULARIZER: f64 = 1e-12;

/// A rank-`R` CP model `Σ_k λ_k ⊗_n a^(n)_k` with unit-norm factor columns.
#[derive(Debug, Clone)]
pub struct CpResult {
    pub rank: usize,
    pub weights: Vec<f64>,
    /// Per mode, a `d_n × rank` factor matrix.
    pub factors: Vec<DMatrix<f64>>,
    /// Frobenius error of the reconstruction against the fitted tensor.
    pub error: f64,
    pub sweeps: usize,
    /// False when the rank schedule was exhausted above the threshold.
    pub converged: bool,
}

/// Rank schedule: 1, then increments of `max(1, ⌈rank/4⌉)` up to the product
/// of the two largest axis lengths (an upper bound on any exact CP rank).
pub fn default_rank_schedule(shape: &[usize]) -> Vec<usize> {
    let mut dims = shape.to_vec();
    dims.sort_unstable();
    let cap = dims[dims.len() - 1] * dims[dims.len() - 2];
    let mut schedule = Vec::new();
    let mut r = 1usize;
    while r < cap {
        schedule.push(r);
        r += r.div_ceil(4);
    }
    schedule.push(cap);
    schedule
}

fn init_factors(tensor: &ArrayD<f64>, rank: usize, seed: u64) -> Result<Vec<DMatrix<f64>>, DecompError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factors = Vec::with_capacity(tensor.ndim());
    for mode in 0..tensor.ndim() {
        let m = unfold(tensor, mode);
        let d = m.nrows();
        let svd = m
            .clone()
            .try_svd(true, false, f64::EPSILON, 0)
            .ok_or_else(|| DecompError::SvdFailure(format!("init of mode {mode}")))?;
        let u = svd.u.as_ref().expect("u requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .expect("finite singular values")
        });
        let mut f = DMatrix::zeros(d, rank);
        for col in 0..rank {
            if col < order.len() {
                f.set_column(col, &u.column(order[col]));
            } else {
                for r in 0..d {
                    f[(r, col)] = rng.gen_range(-0.5..0.5);
                }
                let norm = f.column(col).norm();
                if norm > 0.0 {
                    for r in 0..d {
                        f[(r, col)] /= norm;
                    }
                }
            }
        }
        factors.push(f);
    }
    Ok(factors)
}

/// (weights, factors, error, sweeps) of one fit.
type AlsFit = (Vec<f64>, Vec<DMatrix<f64>>, f64, usize);

fn als_at_rank(tensor: &ArrayD<f64>, rank: usize, seed: u64) -> Result<AlsFit, DecompError> {
    let ndim = tensor.ndim();
    let shape = tensor.shape().to_vec();
    let scale = frobenius(tensor).max(1.0);
    let mut factors = init_factors(tensor, rank, seed)?;
    let mut weights = vec![1.0; rank];

    let unfoldings: Vec<DMatrix<f64>> = (0..ndim).map(|m| unfold(tensor, m)).collect();
    let mut err_prev = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        for mode in 0..ndim {
            // Gram products of the other factors, weights folded in.
            let mut v = DMatrix::from_element(rank, rank, 1.0);
            for (j, f) in factors.iter().enumerate() {
                if j == mode {
                    continue;
                }
                let g = f.transpose() * f;
                v.component_mul_assign(&g);
            }
            let kr = khatri_rao_excluding(&factors, mode);
            let mttkrp = &unfoldings[mode] * kr;
            // Normal equations via Cholesky; ill-conditioned systems fall
            // back to a diagonally regularized solve.
            let solved = v.clone().cholesky().map(|ch| ch.solve(&mttkrp.transpose()));
            let solved = match solved {
                Some(x) => x,
                None => {
                    let mut vr = v.clone();
                    for k in 0..rank {
                        vr[(k, k)] += REGULARIZER;
                    }
                    match vr.cholesky() {
                        Some(ch) => ch.solve(&mttkrp.transpose()),
                        None => {
                            return Err(DecompError::SvdFailure(
                                "singular ALS normal equations".into(),
                            ))
                        }
                    }
                }
            };
            let mut a = solved.transpose();
            // absorb column norms into the weights
            for k in 0..rank {
                let norm = a.column(k).norm();
                weights[k] = if norm > 0.0 { norm } else { 0.0 };
                if norm > 0.0 {
                    for r in 0..a.nrows() {
                        a[(r, k)] /= norm;
                    }
                }
            }
            factors[mode] = a;
        }
        let recon = cp_reconstruct(&weights, &factors, &shape);
        let err = frobenius_diff(&recon, tensor);
        if (err_prev - err).abs() <= FIT_CHANGE_RTOL * scale {
            err_prev = err;
            break;
        }
        err_prev = err;
    }
    Ok((weights, factors, err_prev, sweeps))
}

/// Fit the smallest rank in `schedule` whose reconstruction error is within
/// `eps_lr` (absolute Frobenius). If no rank reaches the threshold, the best
/// iterate is returned flagged `converged: false`.
pub fn cp_als(
    tensor: &ArrayD<f64>,
    eps_lr: f64,
    schedule: &[usize],
    seed: u64,
) -> Result<CpResult, DecompError> {
    if tensor.ndim() < 3 {
        return Err(DecompError::OrderTooLow { order: tensor.ndim(), needed: 3 });
    }
    if schedule.is_empty() {
        return Err(DecompError::EmptySchedule);
    }
    let mut best: Option<CpResult> = None;
    for (attempt, &rank) in schedule.iter().enumerate() {
        let (weights, factors, error, sweeps) =
            als_at_rank(tensor, rank, seed.wrapping_add(attempt as u64))?;
        let candidate = CpResult { rank, weights, factors, error, sweeps, converged: true };
        if candidate.error <= eps_lr {
            return Ok(candidate);
        }
        let better = match &best {
            None => true,
            Some(b) => candidate.error < b.error - 1e-15 * frobenius(tensor).max(1.0),
        };
        if better {
            best = Some(candidate);
        }
    }
    let mut out = best.expect("non-empty schedule");
    out.converged = false;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::IxDyn;

    fn rank_one(u: &[f64], v: &[f64], w: &[f64]) -> ArrayD<f64> {
        let shape = [u.len(), v.len(), w.len()];
        let mut t = ArrayD::zeros(IxDyn(&shape));
        for (idx, x) in t.indexed_iter_mut() {
            *x = u[idx[0]] * v[idx[1]] * w[idx[2]];
        }
        t
    }

    #[test]
    fn rank_one_tensor_recovered_at_rank_one() {
        let t = rank_one(&[1.0, -2.0, 0.5], &[0.3, 0.7], &[2.0, 1.0, -1.0, 0.2]);
        let cp = cp_als(&t, 1e-12, &[1, 2], 0).unwrap();
        assert_eq!(cp.rank, 1);
        assert!(cp.error < 1e-12, "error {}", cp.error);
        assert!(cp.converged);
    }

    #[test]
    fn superdiagonal_tensor_needs_rank_three() {
        // c_ijk = δ_ijk on 3x3x3 has CP rank 3.
        let mut t = ArrayD::zeros(IxDyn(&[3, 3, 3]));
        for i in 0..3 {
            t[IxDyn(&[i, i, i])] = 1.0;
        }
        let cp = cp_als(&t, 1e-10, &default_rank_schedule(&[3, 3, 3]), 1).unwrap();
        assert!(cp.rank <= 3, "rank {}", cp.rank);
        assert!(cp.error < 1e-10, "error {}", cp.error);
    }

    #[test]
    fn infinite_threshold_accepts_rank_one() {
        let t = rank_one(&[1.0, 2.0], &[1.0, 1.0], &[0.5, 0.2]);
        let cp = cp_als(&t, f64::INFINITY, &default_rank_schedule(&[2, 2, 2]), 3).unwrap();
        assert_eq!(cp.rank, 1);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut t = rank_one(&[1.0, -1.0, 2.0], &[0.4, 0.6, -0.1], &[1.0, 0.3, 0.9]);
        t[IxDyn(&[0, 1, 2])] += 0.25; // break exact rank 1
        let a = cp_als(&t, 1e-9, &[1, 2, 3], 17).unwrap();
        let b = cp_als(&t, 1e-9, &[1, 2, 3], 17).unwrap();
        assert_eq!(a.rank, b.rank);
        assert_eq!(a.weights, b.weights);
        for (fa, fb) in a.factors.iter().zip(&b.factors) {
            assert_eq!(fa, fb);
        }
    }

    #[test]
    fn exhausted_schedule_is_flagged() {
        let mut t = ArrayD::zeros(IxDyn(&[3, 3, 3]));
        for i in 0..3 {
            t[IxDyn(&[i, i, i])] = 1.0;
        }
        let cp = cp_als(&t, 1e-13, &[1], 0).unwrap();
        assert!(!cp.converged);
        assert_eq!(cp.rank, 1);
    }

    #[test]
    fn schedule_growth_and_cap() {
        let s = default_rank_schedule(&[3, 4, 5]);
        assert_eq!(s[0], 1);
        assert_eq!(*s.last().unwrap(), 20);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }
}
