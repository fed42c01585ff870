//! Integrals of `q^i` and `p^2` in the dimensionless harmonic-oscillator
//! eigenbasis, with `q = (a + a†)/√2` and `p = i(a† − a)/√2`.

use super::{OneModeOperator, SopError};
use nalgebra::DMatrix;

/// Primitive operator whose modal integrals can be generated analytically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// Coordinate power `q^i`, `i >= 1`.
    QPower(u32),
    /// Squared momentum `p^2`.
    PSquared,
}

impl OperatorKind {
    fn reach(self) -> usize {
        match self {
            OperatorKind::QPower(i) => i as usize,
            OperatorKind::PSquared => 2,
        }
    }
}

/// Annihilation ladder matrix `a[r][r+1] = sqrt(r+1)` of size `n`.
fn ladder(n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for r in 0..n - 1 {
        a[(r, r + 1)] = ((r + 1) as f64).sqrt();
    }
    a
}

/// Plain triple-loop product with a fixed accumulation order, so a matrix
/// entry comes out bit-identical regardless of the ambient basis size
/// (banded factors only ever add exact zeros when the basis grows).
fn matmul_fixed_order(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = DMatrix::zeros(n, m);
    for r in 0..n {
        for c in 0..m {
            let mut acc = 0.0;
            for i in 0..k {
                acc += a[(r, i)] * b[(i, c)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Modal integrals `<r|op|s>` for `r, s < n_modals`.
///
/// The operator matrix is built in an enlarged basis of size
/// `n_modals + reach(op)` and truncated after multiplication, so every
/// retained entry is free of truncation artifacts: `q^i` only connects states
/// at most `i` quanta apart.
pub fn harmonic_integrals(op: OperatorKind, n_modals: usize) -> Result<OneModeOperator, SopError> {
    if n_modals < 2 {
        return Err(SopError::BadModalCount(0, n_modals));
    }
    if let OperatorKind::QPower(0) = op {
        return Err(SopError::BadOperatorPower(0));
    }
    let n_big = n_modals + op.reach();
    let a = ladder(n_big);
    let ad = a.transpose();
    let full = match op {
        OperatorKind::QPower(i) => {
            let q = (&a + &ad) / 2.0_f64.sqrt();
            let mut acc = DMatrix::identity(n_big, n_big);
            for _ in 0..i {
                acc = matmul_fixed_order(&acc, &q);
            }
            acc
        }
        OperatorKind::PSquared => {
            // p^2 = -(a† - a)^2 / 2; real despite p itself being imaginary.
            let d = &ad - &a;
            -matmul_fixed_order(&d, &d) / 2.0
        }
    };
    let matrix = full.view((0, 0), (n_modals, n_modals)).into_owned();
    Ok(OneModeOperator { mode: 0, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn q_matrix_element() {
        let q = harmonic_integrals(OperatorKind::QPower(1), 2).unwrap();
        assert_abs_diff_eq!(q.matrix[(0, 1)], 1.0 / 2.0_f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(q.matrix[(0, 0)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn q_squared_diagonal() {
        let q2 = harmonic_integrals(OperatorKind::QPower(2), 3).unwrap();
        for r in 0..3 {
            assert_abs_diff_eq!(q2.matrix[(r, r)], r as f64 + 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn p_squared_matches_dense_ladder_algebra() {
        let p2 = harmonic_integrals(OperatorKind::PSquared, 3).unwrap();
        for r in 0..3 {
            assert_abs_diff_eq!(p2.matrix[(r, r)], r as f64 + 0.5, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(p2.matrix[(0, 2)], -2.0_f64.sqrt() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p2.matrix[(2, 0)], -2.0_f64.sqrt() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn truncation_is_exact_under_basis_enlargement() {
        for i in 1..=4 {
            for n in 2..7 {
                let small = harmonic_integrals(OperatorKind::QPower(i), n).unwrap();
                let big = harmonic_integrals(OperatorKind::QPower(i), n + 3).unwrap();
                for r in 0..n {
                    for s in 0..n {
                        assert_eq!(small.matrix[(r, s)], big.matrix[(r, s)]);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_degenerate_arguments() {
        assert!(harmonic_integrals(OperatorKind::QPower(0), 4).is_err());
        assert!(harmonic_integrals(OperatorKind::QPower(1), 1).is_err());
    }
}
