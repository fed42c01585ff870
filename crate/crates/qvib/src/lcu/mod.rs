//! LCU representations of one-mode operators.
//!
//! A real symmetric one-mode operator `h` over `N_m` modals, mapped through
//! the direct (one qubit per modal) encoding, expands into a linear
//! combination of Pauli words in three ways:
//!
//! * quadratic — all matrix entries: `Σ_rs h_rs/4 (X_r X_s + Y_r Y_s)` minus
//!   `Σ_r h_rr/2 Z_r`; norm `α = ½Σ_rs|h_rs| + ½Σ_r|h_rr|`, `N_m²`
//!   coefficients.
//! * triangular — the upper triangle only, using `h_rs = h_sr`; same operator
//!   and the same norm, `N_m(N_m+1)/2` coefficients.
//! * diagonal — eigendecomposition `h = UΛUᵀ` with basis-rotated Pauli pairs
//!   per eigenvalue; norm `α = ½Σ|λ_j| + ½Σ|h_rr|`, `2N_m` coefficients, at
//!   the price of Toffoli-costly basis rotations described by ladder angles.

mod angles;
mod pauli;

pub use angles::{extract_rotation_angles, reconstruct_rotation_vector, UNIT_NORM_TOL};
pub use pauli::{lcu_as_matrix, lcu_full_matrix, unary_projection};

use crate::sop::{OneModeOperator, SYMMETRY_RTOL};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coefficients smaller than this fraction of α are pruned from term lists.
pub const PRUNE_RTOL: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum LcuError {
    #[error("input vector has norm {norm}, expected a unit vector")]
    NotUnitVector { norm: f64 },
    #[error("eigensolver failed on the one-mode operator of mode {mode}")]
    EigensolverFailure { mode: usize },
    #[error("one-mode operator of mode {mode} is asymmetric (relative deviation {deviation:.3e})")]
    AsymmetricOperator { mode: usize, deviation: f64 },
}

/// Which LCU expansion of a one-mode operator is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Quadratic,
    Triangular,
    Diagonal,
}

impl Representation {
    pub const ALL: [Representation; 3] =
        [Representation::Quadratic, Representation::Triangular, Representation::Diagonal];

    /// Dense coefficient count loaded by state preparation.
    pub fn coefficient_count(self, n_modals: usize) -> usize {
        match self {
            Representation::Quadratic => n_modals * n_modals,
            Representation::Triangular => n_modals * (n_modals + 1) / 2,
            Representation::Diagonal => 2 * n_modals,
        }
    }
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Representation::Quadratic => "quadratic",
            Representation::Triangular => "triangular",
            Representation::Diagonal => "diagonal",
        })
    }
}

/// Pauli axis of a basis-rotated operator pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
}

/// Symbolic unitary label of one LCU term, over the modal qubits of a single
/// mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliWord {
    Identity,
    /// `Z_r`.
    Z(usize),
    /// `X_r X_s`, `r != s`.
    XX(usize, usize),
    /// `Y_r Y_s`, `r != s`.
    YY(usize, usize),
    /// Basis-rotated pair `τ_j^α υ_j^α` for eigenindex `j`.
    RotatedPair { eigen: usize, axis: PauliAxis },
}

impl std::fmt::Display for PauliWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PauliWord::Identity => write!(f, "I"),
            PauliWord::Z(r) => write!(f, "Z{r}"),
            PauliWord::XX(r, s) => write!(f, "X{r} X{s}"),
            PauliWord::YY(r, s) => write!(f, "Y{r} Y{s}"),
            PauliWord::RotatedPair { eigen, axis } => {
                let a = if *axis == PauliAxis::X { 'x' } else { 'y' };
                write!(f, "tau{eigen}^{a} ups{eigen}^{a}")
            }
        }
    }
}

/// One `coefficient · unitary` term of an LCU.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuTerm {
    pub coefficient: f64,
    pub unitary: PauliWord,
}

/// Eigendecomposition data carried by the diagonal representation: the
/// eigenvalues and, per eigenindex, the ladder angles of the τ and υ basis
/// transformations. For a symmetric operator the j-th row of `Uᵀ` equals the
/// j-th column of `U`, so the two angle lists coincide; both are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenData {
    pub eigenvalues: Vec<f64>,
    pub tau_angles: Vec<Vec<f64>>,
    pub upsilon_angles: Vec<Vec<f64>>,
}

/// A one-mode operator expanded as `Σ_i c_i U_i`.
#[derive(Debug, Clone)]
pub struct LcuDecomposition {
    pub representation: Representation,
    pub n_modals: usize,
    /// Terms with `|c| > PRUNE_RTOL · α`.
    pub terms: Vec<LcuTerm>,
    /// `Σ_i |c_i|`.
    pub alpha: f64,
    /// Dense coefficient count (the worst case loaded by state preparation).
    pub n_coef: usize,
    /// Coefficient count after pruning zeros.
    pub n_coef_pruned: usize,
    /// Present for the diagonal representation only.
    pub eigen_data: Option<EigenData>,
}

fn checked_symmetrized(op: &OneModeOperator) -> Result<DMatrix<f64>, LcuError> {
    let deviation = op.asymmetry();
    if deviation > SYMMETRY_RTOL {
        return Err(LcuError::AsymmetricOperator { mode: op.mode, deviation });
    }
    Ok(op.symmetrized())
}

fn prune(terms: Vec<LcuTerm>, alpha: f64) -> Vec<LcuTerm> {
    let threshold = PRUNE_RTOL * alpha;
    terms.into_iter().filter(|t| t.coefficient.abs() > threshold).collect()
}

/// Quadratic representation: every matrix entry contributes.
///
/// α is accumulated per unordered index pair (`|h_rs|/2 + |h_sr|/2` at once),
/// which in IEEE arithmetic makes it bitwise equal to the triangular α.
pub fn build_quadratic(op: &OneModeOperator) -> Result<LcuDecomposition, LcuError> {
    let h = checked_symmetrized(op)?;
    let n = h.nrows();

    let mut alpha = 0.0;
    for r in 0..n {
        for s in r..n {
            alpha += if r == s {
                // |h_rr|/2 from the full entry sum plus |h_rr|/2 from the
                // diagonal correction.
                0.5 * h[(r, r)].abs() + 0.5 * h[(r, r)].abs()
            } else {
                0.5 * h[(r, s)].abs() + 0.5 * h[(s, r)].abs()
            };
        }
    }

    // Ordered-pair expansion: X_r X_s and Y_r Y_s at h_rs/4 for every (r, s),
    // the r == s pairs collapsing to identities, plus the Z correction.
    let mut terms = Vec::new();
    for r in 0..n {
        for s in 0..n {
            let c = h[(r, s)] / 4.0;
            if r == s {
                terms.push(LcuTerm { coefficient: 2.0 * c, unitary: PauliWord::Identity });
            } else {
                terms.push(LcuTerm { coefficient: c, unitary: PauliWord::XX(r, s) });
                terms.push(LcuTerm { coefficient: c, unitary: PauliWord::YY(r, s) });
            }
        }
    }
    for r in 0..n {
        terms.push(LcuTerm { coefficient: -h[(r, r)] / 2.0, unitary: PauliWord::Z(r) });
    }

    let threshold = PRUNE_RTOL * alpha;
    let mut n_coef_pruned = 0;
    for r in 0..n {
        for s in 0..n {
            if h[(r, s)].abs() > threshold {
                n_coef_pruned += 1;
            }
        }
    }

    Ok(LcuDecomposition {
        representation: Representation::Quadratic,
        n_modals: n,
        terms: prune(terms, alpha),
        alpha,
        n_coef: n * n,
        n_coef_pruned,
        eigen_data: None,
    })
}

/// Triangular representation: upper-triangle entries only.
pub fn build_triangular(op: &OneModeOperator) -> Result<LcuDecomposition, LcuError> {
    let h = checked_symmetrized(op)?;
    let n = h.nrows();

    let mut alpha = 0.0;
    for r in 0..n {
        for s in r..n {
            alpha += if r == s {
                0.5 * h[(r, r)].abs() + 0.5 * h[(r, r)].abs()
            } else {
                0.5 * h[(r, s)].abs() + 0.5 * h[(s, r)].abs()
            };
        }
    }

    let mut terms = Vec::new();
    for r in 0..n {
        for s in (r + 1)..n {
            let c = h[(r, s)] / 2.0;
            terms.push(LcuTerm { coefficient: c, unitary: PauliWord::XX(r, s) });
            terms.push(LcuTerm { coefficient: c, unitary: PauliWord::YY(r, s) });
        }
    }
    for r in 0..n {
        let c = h[(r, r)] / 2.0;
        terms.push(LcuTerm { coefficient: c, unitary: PauliWord::Identity });
        terms.push(LcuTerm { coefficient: -c, unitary: PauliWord::Z(r) });
    }

    let threshold = PRUNE_RTOL * alpha;
    let mut n_coef_pruned = 0;
    for r in 0..n {
        for s in r..n {
            if h[(r, s)].abs() > threshold {
                n_coef_pruned += 1;
            }
        }
    }

    Ok(LcuDecomposition {
        representation: Representation::Triangular,
        n_modals: n,
        terms: prune(terms, alpha),
        alpha,
        n_coef: n * (n + 1) / 2,
        n_coef_pruned,
        eigen_data: None,
    })
}

/// Diagonal representation: `h = UΛUᵀ` with basis-rotated Pauli pairs.
pub fn build_diagonal(op: &OneModeOperator) -> Result<LcuDecomposition, LcuError> {
    let h = checked_symmetrized(op)?;
    let n = h.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(h.clone(), 1e-14, 0)
        .ok_or(LcuError::EigensolverFailure { mode: op.mode })?;

    let eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let u = eig.eigenvectors; // column j is the eigenvector of λ_j

    let mut tau_angles = Vec::with_capacity(n);
    let mut upsilon_angles = Vec::with_capacity(n);
    let ut = u.transpose();
    for j in 0..n {
        let col: Vec<f64> = u.column(j).iter().copied().collect();
        let row: Vec<f64> = ut.row(j).iter().copied().collect();
        tau_angles.push(extract_rotation_angles(&col)?);
        upsilon_angles.push(extract_rotation_angles(&row)?);
    }

    let mut alpha = 0.0;
    for lambda in &eigenvalues {
        alpha += 0.5 * lambda.abs();
    }
    for r in 0..n {
        alpha += 0.5 * h[(r, r)].abs();
    }

    let mut terms = Vec::new();
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        for axis in [PauliAxis::X, PauliAxis::Y] {
            terms.push(LcuTerm {
                coefficient: lambda / 4.0,
                unitary: PauliWord::RotatedPair { eigen: j, axis },
            });
        }
    }
    for r in 0..n {
        terms.push(LcuTerm { coefficient: -h[(r, r)] / 2.0, unitary: PauliWord::Z(r) });
    }

    let threshold = PRUNE_RTOL * alpha;
    let n_coef_pruned = eigenvalues.iter().filter(|l| l.abs() > threshold).count()
        + (0..n).filter(|&r| h[(r, r)].abs() > threshold).count();

    Ok(LcuDecomposition {
        representation: Representation::Diagonal,
        n_modals: n,
        terms: prune(terms, alpha),
        alpha,
        n_coef: 2 * n,
        n_coef_pruned,
        eigen_data: Some(EigenData { eigenvalues, tau_angles, upsilon_angles }),
    })
}

/// Build the requested representation.
pub fn build(rep: Representation, op: &OneModeOperator) -> Result<LcuDecomposition, LcuError> {
    match rep {
        Representation::Quadratic => build_quadratic(op),
        Representation::Triangular => build_triangular(op),
        Representation::Diagonal => build_diagonal(op),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn op(entries: &[&[f64]]) -> OneModeOperator {
        let n = entries.len();
        OneModeOperator::new(0, DMatrix::from_fn(n, n, |r, c| entries[r][c]))
    }

    pub(crate) fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> OneModeOperator {
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            for s in r..n {
                let x = rng.gen_range(-1.0..1.0);
                m[(r, s)] = x;
                m[(s, r)] = x;
            }
        }
        OneModeOperator::new(0, m)
    }

    #[test]
    fn quadratic_hand_example() {
        let d = build_quadratic(&op(&[&[1.0, 2.0], &[2.0, 3.0]])).unwrap();
        assert_eq!(d.alpha, 6.0);
        assert_eq!(d.n_coef, 4);
    }

    #[test]
    fn quadratic_diagonal_matrix_alpha() {
        let d = build_quadratic(&op(&[&[0.7, 0.0], &[0.0, -0.2]])).unwrap();
        assert_abs_diff_eq!(d.alpha, 0.9, epsilon = 1e-15);
        // Off-diagonal XX/YY terms vanish after pruning.
        assert!(d.terms.iter().all(|t| !matches!(t.unitary, PauliWord::XX(..) | PauliWord::YY(..))));
    }

    #[test]
    fn quadratic_zero_matrix() {
        let d = build_quadratic(&op(&[&[0.0, 0.0], &[0.0, 0.0]])).unwrap();
        assert_eq!(d.alpha, 0.0);
        assert!(d.terms.is_empty());
        assert_eq!(d.n_coef_pruned, 0);
    }

    #[test]
    fn triangular_hand_example() {
        let d = build_triangular(&op(&[&[1.0, 2.0], &[2.0, 3.0]])).unwrap();
        assert_eq!(d.alpha, 6.0);
        assert_eq!(d.n_coef, 3);
    }

    #[test]
    fn triangular_identity_matrix_terms() {
        let d = build_triangular(&op(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(d.alpha, 2.0);
        assert!(d
            .terms
            .iter()
            .all(|t| matches!(t.unitary, PauliWord::Identity | PauliWord::Z(_))));
    }

    #[test]
    fn alpha_triangular_equals_quadratic_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=8 {
            for _ in 0..50 {
                let o = random_symmetric(n, &mut rng);
                let q = build_quadratic(&o).unwrap().alpha;
                let t = build_triangular(&o).unwrap().alpha;
                assert_eq!(q, t);
            }
        }
    }

    #[test]
    fn diagonal_hand_example() {
        let d = build_diagonal(&op(&[&[1.0, 2.0], &[2.0, 3.0]])).unwrap();
        // Eigenvalues 2 ± √5, so α = √5 + 2.
        assert_abs_diff_eq!(d.alpha, 5.0_f64.sqrt() + 2.0, epsilon = 1e-12);
        assert_eq!(d.n_coef, 4);
    }

    #[test]
    fn diagonal_of_diagonal_matrix() {
        let d = build_diagonal(&op(&[&[1.0, 0.0], &[0.0, 3.0]])).unwrap();
        assert_abs_diff_eq!(d.alpha, 4.0, epsilon = 1e-12);
        let eig = d.eigen_data.unwrap();
        // The rotation ladders reconstruct unit eigenvectors.
        for angles in &eig.tau_angles {
            let v = reconstruct_rotation_vector(angles);
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn diagonal_alpha_never_exceeds_triangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            for _ in 0..50 {
                let o = random_symmetric(n, &mut rng);
                let t = build_triangular(&o).unwrap().alpha;
                let d = build_diagonal(&o).unwrap().alpha;
                assert!(d <= t + 1e-12 * t, "n={n}: diag {d} > tri {t}");
            }
        }
    }

    #[test]
    fn tau_and_upsilon_angles_coincide_for_symmetric_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let o = random_symmetric(5, &mut rng);
        let d = build_diagonal(&o).unwrap();
        let eig = d.eigen_data.unwrap();
        assert_eq!(eig.tau_angles, eig.upsilon_angles);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let o = op(&[&[1.0, 1.0], &[2.0, 3.0]]);
        assert!(matches!(build_triangular(&o), Err(LcuError::AsymmetricOperator { .. })));
    }

    #[test]
    fn alpha_equals_term_coefficient_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 2..=6 {
            let o = random_symmetric(n, &mut rng);
            for d in [
                build_quadratic(&o).unwrap(),
                build_triangular(&o).unwrap(),
                build_diagonal(&o).unwrap(),
            ] {
                let sum: f64 = d.terms.iter().map(|t| t.coefficient.abs()).sum();
                assert!(
                    (sum - d.alpha).abs() <= 1e-12 * d.alpha,
                    "{:?}: {} vs {}",
                    d.representation,
                    sum,
                    d.alpha
                );
            }
        }
    }
}
