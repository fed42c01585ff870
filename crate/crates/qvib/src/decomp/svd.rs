//! Exact low-rank truncation of two-mode coupling matrices.

use super::{DecompError, FactorizedCoupling};
use crate::sop::ModeCoupling;
use nalgebra::DMatrix;

/// Factorize a two-mode coupling matrix by SVD, keeping the minimal rank
/// whose discarded tail `sqrt(Σ_{j>k} s_j²)` is within `eps_lr`. A threshold
/// at or above the full Frobenius norm yields rank zero (the coupling is
/// dropped entirely).
pub fn svd_truncate_two_mode(
    mc: &ModeCoupling,
    eps_lr: f64,
) -> Result<FactorizedCoupling, DecompError> {
    if mc.order() != 2 {
        return Err(DecompError::WrongOrder { expected: 2, got: mc.order() });
    }
    let (d1, d2) = (mc.coupling_tensor.shape()[0], mc.coupling_tensor.shape()[1]);
    let c = DMatrix::from_fn(d1, d2, |r, s| mc.coupling_tensor[ndarray::IxDyn(&[r, s])]);

    let svd = c
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| DecompError::SvdFailure(format!("{d1}x{d2} coupling matrix")))?;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("finite singular values")
    });
    let sorted: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let mut rank = sorted.len();
    let mut tail = 0.0;
    while rank > 0 {
        let candidate = tail + sorted[rank - 1] * sorted[rank - 1];
        if candidate.sqrt() <= eps_lr {
            tail = candidate;
            rank -= 1;
        } else {
            break;
        }
    }

    let mut fu = DMatrix::zeros(d1, rank);
    let mut fv = DMatrix::zeros(d2, rank);
    for (col, &i) in order[..rank].iter().enumerate() {
        fu.set_column(col, &u.column(i));
        fv.set_column(col, &vt.row(i).transpose());
    }
    let weights = sorted[..rank].to_vec();

    Ok(FactorizedCoupling::assemble(mc, vec![fu, fv], weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sop::{harmonic_integrals, OneModeOperator, OperatorKind};
    use ndarray::{ArrayD, IxDyn};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mc_from_matrix(c: &DMatrix<f64>) -> ModeCoupling {
        let ops = |mode: usize, n: usize| -> Vec<OneModeOperator> {
            (1..=n as u32)
                .map(|p| {
                    let mut op = harmonic_integrals(OperatorKind::QPower(p.min(4)), 4).unwrap();
                    op.mode = mode;
                    op
                })
                .collect()
        };
        let mut tensor = ArrayD::zeros(IxDyn(&[c.nrows(), c.ncols()]));
        for r in 0..c.nrows() {
            for s in 0..c.ncols() {
                tensor[IxDyn(&[r, s])] = c[(r, s)];
            }
        }
        ModeCoupling {
            modes: vec![0, 1],
            operator_basis: vec![ops(0, c.nrows()), ops(1, c.ncols())],
            coupling_tensor: tensor,
        }
    }

    #[test]
    fn rank_one_matrix_is_recovered_exactly() {
        let u = nalgebra::DVector::from_vec(vec![1.0, -0.5, 0.25]);
        let v = nalgebra::DVector::from_vec(vec![0.3, 0.8]);
        let c = &u * v.transpose();
        let f = svd_truncate_two_mode(&mc_from_matrix(&c), 1e-12).unwrap();
        assert_eq!(f.rank, 1);
        assert!(f.frobenius_error < 1e-13);
    }

    #[test]
    fn zero_threshold_keeps_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = DMatrix::from_fn(4, 3, |_, _| rng.gen_range(-1.0..1.0));
        let f = svd_truncate_two_mode(&mc_from_matrix(&c), 0.0).unwrap();
        assert_eq!(f.rank, 3);
        assert!(f.frobenius_error <= 1e-12);
    }

    #[test]
    fn reported_error_matches_tail_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0));
        let mc = mc_from_matrix(&c);
        let eps = 0.1 * c.norm();
        let f = svd_truncate_two_mode(&mc, eps).unwrap();
        assert!(f.frobenius_error <= eps);

        // independent tail computation from a fresh SVD
        let svd = c.clone().svd(false, false);
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let tail: f64 = s[f.rank..].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((f.frobenius_error - tail).abs() < 1e-10);
    }

    #[test]
    fn oversized_threshold_drops_everything() {
        let c = DMatrix::from_fn(3, 3, |r, s| 0.01 * (r as f64 - s as f64));
        let f = svd_truncate_two_mode(&mc_from_matrix(&c), 1.0).unwrap();
        assert_eq!(f.rank, 0);
        assert!((f.frobenius_error - c.norm()).abs() < 1e-12);
    }

    #[test]
    fn rejects_other_orders() {
        let mut mc = mc_from_matrix(&DMatrix::zeros(2, 2));
        mc.modes = vec![0];
        assert!(matches!(
            svd_truncate_two_mode(&mc, 0.0),
            Err(DecompError::WrongOrder { .. })
        ));
    }
}
