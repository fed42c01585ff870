//! Dense tensor utilities: unfoldings, mode products and CP reconstruction.
//!
//! Unfolding convention: the mode-n unfolding has the mode-n index on rows
//! and the remaining axes on columns in ascending axis order, last axis
//! fastest. Khatri-Rao products below follow the same ordering so that
//! `X_(n) ≈ A_n · diag(λ) · KR(others)ᵀ`.

use nalgebra::DMatrix;
use ndarray::{ArrayD, IxDyn};

pub fn frobenius(t: &ArrayD<f64>) -> f64 {
    t.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn frobenius_diff(a: &ArrayD<f64>, b: &ArrayD<f64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Mode-`mode` unfolding as a `d_mode × (len / d_mode)` matrix.
pub fn unfold(t: &ArrayD<f64>, mode: usize) -> DMatrix<f64> {
    let ndim = t.ndim();
    let rows = t.shape()[mode];
    let cols = t.len() / rows;
    let mut perm: Vec<usize> = vec![mode];
    perm.extend((0..ndim).filter(|&a| a != mode));
    let view = t.view().permuted_axes(perm);
    DMatrix::from_row_iterator(rows, cols, view.iter().copied())
}

/// Inverse of [`unfold`]: rebuild a tensor of shape `shape` from its mode-n
/// unfolding.
pub fn fold(m: &DMatrix<f64>, mode: usize, shape: &[usize]) -> ArrayD<f64> {
    let ndim = shape.len();
    let mut permuted_shape = vec![shape[mode]];
    permuted_shape.extend((0..ndim).filter(|&a| a != mode).map(|a| shape[a]));
    let data: Vec<f64> = (0..m.nrows())
        .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
        .map(|(r, c)| m[(r, c)])
        .collect();
    let permuted = ArrayD::from_shape_vec(IxDyn(&permuted_shape), data).expect("shape");
    // inverse permutation back to the original axis order
    let mut inv = vec![0usize; ndim];
    inv[mode] = 0;
    for (pos, a) in (0..ndim).filter(|&a| a != mode).enumerate() {
        inv[a] = pos + 1;
    }
    permuted.permuted_axes(inv).as_standard_layout().into_owned()
}

/// Mode product `t ×_mode Mᵀ` for `M: d_mode × k`, shrinking (or growing)
/// axis `mode` to `k`: the unfolding is left-multiplied by `Mᵀ`.
pub fn mode_multiply_transpose(t: &ArrayD<f64>, m: &DMatrix<f64>, mode: usize) -> ArrayD<f64> {
    let unfolded = unfold(t, mode);
    let product = m.transpose() * unfolded;
    let mut shape = t.shape().to_vec();
    shape[mode] = m.ncols();
    fold(&product, mode, &shape)
}

/// Mode product `t ×_mode M` for `M: k × d_mode` replaced by its action
/// `M · X_(mode)`, growing axis `mode` to `k` rows of `M`.
pub fn mode_multiply(t: &ArrayD<f64>, m: &DMatrix<f64>, mode: usize) -> ArrayD<f64> {
    let unfolded = unfold(t, mode);
    let product = m * unfolded;
    let mut shape = t.shape().to_vec();
    shape[mode] = m.nrows();
    fold(&product, mode, &shape)
}

/// Khatri-Rao (column-wise Kronecker) product of the factors excluding
/// `skip`, in ascending axis order with the last axis fastest.
pub fn khatri_rao_excluding(factors: &[DMatrix<f64>], skip: usize) -> DMatrix<f64> {
    let rank = factors[0].ncols();
    let involved: Vec<&DMatrix<f64>> =
        factors.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, f)| f).collect();
    let rows: usize = involved.iter().map(|f| f.nrows()).product();
    let mut out = DMatrix::zeros(rows, rank);
    for r in 0..rank {
        for row in 0..rows {
            let mut rem = row;
            let mut prod = 1.0;
            for f in involved.iter().rev() {
                let i = rem % f.nrows();
                rem /= f.nrows();
                prod *= f[(i, r)];
            }
            out[(row, r)] = prod;
        }
    }
    out
}

/// `Σ_k λ_k · a^(1)_k ⊗ a^(2)_k ⊗ ...` as a dense tensor.
pub fn cp_reconstruct(weights: &[f64], factors: &[DMatrix<f64>], shape: &[usize]) -> ArrayD<f64> {
    let mut out = ArrayD::zeros(IxDyn(shape));
    for (idx, v) in out.indexed_iter_mut() {
        let mut acc = 0.0;
        for (k, &w) in weights.iter().enumerate() {
            let mut prod = w;
            for (axis, f) in factors.iter().enumerate() {
                prod *= f[(idx[axis], k)];
            }
            acc += prod;
        }
        *v = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::IxDyn;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(shape: &[usize], seed: u64) -> ArrayD<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..shape.iter().product::<usize>())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        ArrayD::from_shape_vec(IxDyn(shape), data).unwrap()
    }

    #[test]
    fn fold_inverts_unfold() {
        let t = random_tensor(&[3, 4, 2, 5], 1);
        for mode in 0..4 {
            let back = fold(&unfold(&t, mode), mode, t.shape());
            assert_eq!(back, t);
        }
    }

    #[test]
    fn mode_multiply_by_identity_is_identity() {
        let t = random_tensor(&[3, 4, 2], 2);
        for mode in 0..3 {
            let id = DMatrix::<f64>::identity(t.shape()[mode], t.shape()[mode]);
            let back = mode_multiply_transpose(&t, &id, mode);
            assert!(frobenius_diff(&back, &t) < 1e-14);
        }
    }

    #[test]
    fn khatri_rao_matches_reconstruction() {
        // X_(n) = A_n diag(λ) KR(others)ᵀ must reproduce the CP tensor.
        let shape = [3usize, 2, 4];
        let rank = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let factors: Vec<DMatrix<f64>> = shape
            .iter()
            .map(|&d| DMatrix::from_fn(d, rank, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        let weights = vec![0.7, -1.3];
        let t = cp_reconstruct(&weights, &factors, &shape);
        for mode in 0..3 {
            let kr = khatri_rao_excluding(&factors, mode);
            let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(weights.clone()));
            let expect = &factors[mode] * lambda * kr.transpose();
            let got = unfold(&t, mode);
            assert!((expect - got).norm() < 1e-12);
        }
    }
}
