//! Dense evaluation of LCU term lists as matrices on the full qubit space of
//! one mode, plus the projection onto the unary (single-occupation) subspace.
//!
//! Everything stays in real arithmetic: `Y = i·W` with the real antisymmetric
//! `W = [[0,-1],[1,0]]`, so any product of two Y factors is `-W·W`, and the
//! three representations only ever pair Y with Y.

use super::{reconstruct_rotation_vector, LcuDecomposition, PauliAxis, PauliWord};
use nalgebra::DMatrix;

#[derive(Clone, Copy)]
enum Factor {
    X,
    /// `iY`; a pair of these carries an overall −1.
    W,
    Z,
}

fn factor_matrix(f: Factor) -> DMatrix<f64> {
    match f {
        Factor::X => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        Factor::W => DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
        Factor::Z => DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
    }
}

/// Kronecker product over `n_qubits` positions (qubit 0 is the most
/// significant factor), identity everywhere except the listed positions.
fn word_matrix(n_qubits: usize, factors: &[(usize, Factor)]) -> DMatrix<f64> {
    let mut acc = DMatrix::<f64>::identity(1, 1);
    for q in 0..n_qubits {
        let local = factors
            .iter()
            .find(|(pos, _)| *pos == q)
            .map(|(_, f)| factor_matrix(*f))
            .unwrap_or_else(|| DMatrix::identity(2, 2));
        acc = acc.kronecker(&local);
    }
    acc
}

/// `Σ_r c_r σ_r^axis` as a dense real matrix (`Y` entering as `W`; the caller
/// accounts for the −1 of each `W`-pair).
fn rotated_sum(n_qubits: usize, coeffs: &[f64], axis: PauliAxis) -> DMatrix<f64> {
    let dim = 1usize << n_qubits;
    let mut acc = DMatrix::zeros(dim, dim);
    let f = match axis {
        PauliAxis::X => Factor::X,
        PauliAxis::Y => Factor::W,
    };
    for (r, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            acc += word_matrix(n_qubits, &[(r, f)]) * c;
        }
    }
    acc
}

/// Evaluate `Σ_i c_i U_i` on the full `2^{N_m}`-dimensional qubit space.
///
/// Basis-rotated pairs are expanded from the stored ladder angles, so this
/// also exercises the angle extraction round trip.
pub fn lcu_full_matrix(d: &LcuDecomposition, n_modals: usize) -> DMatrix<f64> {
    assert!(n_modals <= 12, "dense Pauli evaluation is limited to N_m <= 12");
    let dim = 1usize << n_modals;
    let mut acc = DMatrix::zeros(dim, dim);
    for term in &d.terms {
        let m = match term.unitary {
            PauliWord::Identity => DMatrix::identity(dim, dim),
            PauliWord::Z(r) => word_matrix(n_modals, &[(r, Factor::Z)]),
            PauliWord::XX(r, s) => word_matrix(n_modals, &[(r, Factor::X), (s, Factor::X)]),
            PauliWord::YY(r, s) => -word_matrix(n_modals, &[(r, Factor::W), (s, Factor::W)]),
            PauliWord::RotatedPair { eigen, axis } => {
                let eig = d
                    .eigen_data
                    .as_ref()
                    .expect("diagonal representation carries eigen data");
                let tau = reconstruct_rotation_vector(&eig.tau_angles[eigen]);
                let ups = reconstruct_rotation_vector(&eig.upsilon_angles[eigen]);
                let prod = rotated_sum(n_modals, &tau, axis) * rotated_sum(n_modals, &ups, axis);
                if axis == PauliAxis::Y {
                    -prod
                } else {
                    prod
                }
            }
        };
        acc += m * term.coefficient;
    }
    acc
}

/// Restrict a full-space matrix to the unary subspace: basis vector `r` is
/// the computational state with qubit `r` set and all others clear.
pub fn unary_projection(full: &DMatrix<f64>, n_modals: usize) -> DMatrix<f64> {
    let idx = |r: usize| 1usize << (n_modals - 1 - r);
    DMatrix::from_fn(n_modals, n_modals, |r, s| full[(idx(r), idx(s))])
}

/// Evaluate the LCU and project onto the unary subspace; for a faithful
/// representation this reproduces the original one-mode matrix.
pub fn lcu_as_matrix(d: &LcuDecomposition, n_modals: usize) -> DMatrix<f64> {
    unary_projection(&lcu_full_matrix(d, n_modals), n_modals)
}
