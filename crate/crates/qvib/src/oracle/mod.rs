//! Exact small-system reference: full assembly of the Hamiltonian on the
//! direct-product modal space, ground-state energies and certification of
//! the LCU representations against it.

mod lanczos;

pub use lanczos::lanczos_smallest;

use crate::lcu::{self, Representation};
use crate::sop::{OccupationState, SopHamiltonian};
use nalgebra::DMatrix;
use thiserror::Error;

/// Default refusal bound on the direct-product dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 20;

/// Dense solver threshold; larger systems use the iterative path.
pub const DENSE_EIGEN_LIMIT: usize = 4096;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("direct-product dimension {dim} exceeds the cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("eigensolver did not converge: residual {residual:.3e} above {tol:.3e}")]
    NotConverged { residual: f64, tol: f64 },
    #[error("operands have different mode structures")]
    DimensionMismatch,
    #[error("certification precondition violated: {0}")]
    Precondition(String),
    #[error("lcu: {0}")]
    Lcu(#[from] lcu::LcuError),
}

/// The assembled Hamiltonian on the direct-product modal basis. Basis
/// enumeration is row-major over modes in ascending index order (mode 0
/// slowest), matching [`OccupationState::linear_index`].
#[derive(Debug, Clone)]
pub struct DenseVibrationalMatrix {
    pub dimension: usize,
    pub matrix: DMatrix<f64>,
    /// Modal counts per mode in enumeration order.
    pub modals: Vec<usize>,
}

impl DenseVibrationalMatrix {
    pub fn basis_state(&self, index: usize) -> OccupationState {
        OccupationState::from_linear_index(index, &self.modals)
    }
}

/// Assemble `H = Σ_mc Σ_terms c · ⊗_m h^{m,o}` (identity on inactive modes)
/// by Kronecker accumulation over modes in ascending index order.
pub fn assemble_full(h: &SopHamiltonian, cap: usize) -> Result<DenseVibrationalMatrix, OracleError> {
    let mut modes = h.modes.clone();
    modes.sort_by_key(|m| m.index);
    let modals: Vec<usize> = modes.iter().map(|m| m.n_modals).collect();
    let dim: usize = modals.iter().product();
    if dim > cap {
        return Err(OracleError::CapExceeded { dim, cap });
    }

    let mut full = DMatrix::<f64>::zeros(dim, dim);
    for mc in &h.couplings {
        for (idx, c) in mc.terms() {
            let mut acc = DMatrix::<f64>::identity(1, 1);
            for (pos, mode) in modes.iter().enumerate() {
                let local = match mc.modes.iter().position(|&m| m == mode.index) {
                    Some(axis) => mc.operator_basis[axis][idx[axis]].matrix.clone(),
                    None => DMatrix::identity(modals[pos], modals[pos]),
                };
                acc = acc.kronecker(&local);
            }
            full += acc * c;
        }
    }
    Ok(DenseVibrationalMatrix { dimension: dim, matrix: full, modals })
}

/// Lowest eigenvalue: dense symmetric solver up to [`DENSE_EIGEN_LIMIT`],
/// Lanczos beyond it (residual within `1e-9 · ‖H‖`).
pub fn ground_energy(m: &DenseVibrationalMatrix) -> Result<f64, OracleError> {
    ground_energy_of(&m.matrix)
}

fn ground_energy_of(matrix: &DMatrix<f64>) -> Result<f64, OracleError> {
    let dim = matrix.nrows();
    if dim <= DENSE_EIGEN_LIMIT {
        let eig = nalgebra::SymmetricEigen::new(matrix.clone());
        Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
    } else {
        let scale = matrix.norm().max(1.0);
        let (val, _) =
            lanczos_smallest(|v| matrix * v, dim, 400, 1e-9 * scale, 0x5eed)?;
        Ok(val)
    }
}

/// All eigenvalues in ascending order (dense path only).
pub fn eigenvalues(m: &DenseVibrationalMatrix) -> Result<Vec<f64>, OracleError> {
    if m.dimension > DENSE_EIGEN_LIMIT {
        return Err(OracleError::Precondition(format!(
            "full spectrum limited to dimension {DENSE_EIGEN_LIMIT}, got {}",
            m.dimension
        )));
    }
    let eig = nalgebra::SymmetricEigen::new(m.matrix.clone());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(vals)
}

/// Spectral norm of a symmetric matrix.
pub fn spectral_norm(matrix: &DMatrix<f64>) -> Result<f64, OracleError> {
    let dim = matrix.nrows();
    if dim <= DENSE_EIGEN_LIMIT {
        let eig = nalgebra::SymmetricEigen::new(matrix.clone());
        Ok(eig.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v.abs())))
    } else {
        let scale = matrix.norm().max(1e-300);
        let (low, _) = lanczos_smallest(|v| matrix * v, dim, 400, 1e-9 * scale, 0x11)?;
        let (neg_high, _) = lanczos_smallest(|v| -(matrix * v), dim, 400, 1e-9 * scale, 0x12)?;
        Ok(low.abs().max(neg_high.abs()))
    }
}

/// `|E₀(original) − E₀(decomposed)|`.
pub fn energy_error(
    original: &DenseVibrationalMatrix,
    decomposed: &DenseVibrationalMatrix,
) -> Result<f64, OracleError> {
    Ok(energy_error_report(original, decomposed)?.delta_e)
}

/// Energy error along with the perturbation bound `‖H_o − H_d‖₂` that must
/// dominate it (Weyl), up to eigensolver accuracy.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct EnergyErrorReport {
    pub e_original: f64,
    pub e_decomposed: f64,
    pub delta_e: f64,
    pub weyl_bound: f64,
    pub within_bound: bool,
}

pub fn energy_error_report(
    original: &DenseVibrationalMatrix,
    decomposed: &DenseVibrationalMatrix,
) -> Result<EnergyErrorReport, OracleError> {
    if original.modals != decomposed.modals {
        return Err(OracleError::DimensionMismatch);
    }
    let e_original = ground_energy(original)?;
    let e_decomposed = ground_energy(decomposed)?;
    let delta_e = (e_original - e_decomposed).abs();
    let weyl_bound = spectral_norm(&(&original.matrix - &decomposed.matrix))?;
    let slack = 1e-10 * original.matrix.norm().max(1.0);
    Ok(EnergyErrorReport {
        e_original,
        e_decomposed,
        delta_e,
        weyl_bound,
        within_bound: delta_e <= weyl_bound + slack,
    })
}

/// Certify an LCU representation against the exact assembly: every one-mode
/// operator must project back from its Pauli expansion, and the
/// coefficient-weighted Kronecker composition of the projections must equal
/// the assembled Hamiltonian. Returns the largest deviation found.
pub fn certify_lcu(h: &SopHamiltonian, rep: Representation) -> Result<f64, OracleError> {
    let mut modes = h.modes.clone();
    modes.sort_by_key(|m| m.index);
    for m in &modes {
        if m.n_modals > 6 {
            return Err(OracleError::Precondition(format!(
                "mode {} has {} modals; dense Pauli certification needs N_m <= 6",
                m.index, m.n_modals
            )));
        }
    }
    let total_qubits: usize = modes.iter().map(|m| m.n_modals).sum();
    if total_qubits > 20 {
        return Err(OracleError::Precondition(format!(
            "{total_qubits} vibrational qubits exceed the certification limit of 20"
        )));
    }

    let modals: Vec<usize> = modes.iter().map(|m| m.n_modals).collect();
    let dim: usize = modals.iter().product();
    let expected = assemble_full(h, DEFAULT_DIMENSION_CAP)?;

    let mut max_dev: f64 = 0.0;
    let mut composed = DMatrix::<f64>::zeros(dim, dim);
    for mc in &h.couplings {
        // basis operators actually referenced by a nonzero coefficient
        let mut used: Vec<std::collections::BTreeSet<usize>> =
            vec![Default::default(); mc.order()];
        for (idx, _) in mc.terms() {
            for (axis, &o) in idx.iter().enumerate() {
                used[axis].insert(o);
            }
        }
        // projected LCU matrix per used basis operator, reused across terms
        let mut projected: Vec<std::collections::BTreeMap<usize, DMatrix<f64>>> =
            vec![Default::default(); mc.order()];
        for (axis, ops) in mc.operator_basis.iter().enumerate() {
            let n_modals = modals[modes
                .iter()
                .position(|m| m.index == mc.modes[axis])
                .expect("validated mode reference")];
            for &o in &used[axis] {
                let d = lcu::build(rep, &ops[o])?;
                let p = lcu::lcu_as_matrix(&d, n_modals);
                let dev = (&p - ops[o].symmetrized()).amax();
                max_dev = max_dev.max(dev);
                projected[axis].insert(o, p);
            }
        }
        for (idx, c) in mc.terms() {
            let mut acc = DMatrix::<f64>::identity(1, 1);
            for (pos, mode) in modes.iter().enumerate() {
                let local = match mc.modes.iter().position(|&m| m == mode.index) {
                    Some(axis) => projected[axis][&idx[axis]].clone(),
                    None => DMatrix::identity(modals[pos], modals[pos]),
                };
                acc = acc.kronecker(&local);
            }
            composed += acc * c;
        }
    }
    max_dev = max_dev.max((&composed - &expected.matrix).amax());
    Ok(max_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sop::{generate_coupled_oscillator, CouplingSpec};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use std::collections::BTreeMap;

    #[test]
    fn single_harmonic_mode_is_diagonal() {
        let h = generate_coupled_oscillator(1, &[1.0], &CouplingSpec::new(), 5, 0).unwrap();
        let full = assemble_full(&h, DEFAULT_DIMENSION_CAP).unwrap();
        for r in 0..5 {
            assert_abs_diff_eq!(full.matrix[(r, r)], r as f64 + 0.5, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(ground_energy(&full).unwrap(), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn uncoupled_pair_ground_energy_is_half_frequency_sum() {
        let h = generate_coupled_oscillator(2, &[1.0, 2.0], &CouplingSpec::new(), 8, 0).unwrap();
        let full = assemble_full(&h, DEFAULT_DIMENSION_CAP).unwrap();
        assert_abs_diff_eq!(ground_energy(&full).unwrap(), 1.5, epsilon = 1e-8);
    }

    #[test]
    fn uncoupled_spectrum_matches_quantum_number_sums() {
        let h = generate_coupled_oscillator(2, &[1.0, 1.3], &CouplingSpec::new(), 4, 0).unwrap();
        let full = assemble_full(&h, DEFAULT_DIMENSION_CAP).unwrap();
        let got = eigenvalues(&full).unwrap();
        let mut expect: Vec<f64> = (0..4)
            .flat_map(|n0| (0..4).map(move |n1| {
                1.0 * (n0 as f64 + 0.5) + 1.3 * (n1 as f64 + 0.5)
            }))
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, e) in got.iter().zip(&expect) {
            assert_abs_diff_eq!(g, e, epsilon = 1e-8);
        }
    }

    #[test]
    fn bilinear_pair_matches_normal_mode_formula() {
        let lambda = 0.1_f64;
        let mut couplings = CouplingSpec::new();
        couplings.insert(vec![0, 1], BTreeMap::from([(vec![1, 1], lambda)]));
        let h = generate_coupled_oscillator(2, &[1.0, 1.0], &couplings, 14, 0).unwrap();
        let full = assemble_full(&h, DEFAULT_DIMENSION_CAP).unwrap();
        let exact = ((1.0 + lambda).sqrt() + (1.0 - lambda).sqrt()) / 2.0;
        assert_abs_diff_eq!(ground_energy(&full).unwrap(), exact, epsilon = 1e-6);
    }

    #[test]
    fn ground_energy_closed_forms() {
        let m = DenseVibrationalMatrix {
            dimension: 3,
            matrix: DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 1.5, 2.5])),
            modals: vec![3],
        };
        assert_abs_diff_eq!(ground_energy(&m).unwrap(), 0.5, epsilon = 1e-12);

        let m = DenseVibrationalMatrix {
            dimension: 2,
            matrix: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]),
            modals: vec![2],
        };
        assert_abs_diff_eq!(ground_energy(&m).unwrap(), 2.0 - 5.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn assembly_is_linear_in_the_couplings() {
        let mut c1 = CouplingSpec::new();
        c1.insert(vec![0, 1], BTreeMap::from([(vec![1, 1], 0.07)]));
        let ha = generate_coupled_oscillator(2, &[1.0, 1.2], &c1, 4, 0).unwrap();

        // same model split: harmonic part and coupling part assembled apart
        let h_harm = generate_coupled_oscillator(2, &[1.0, 1.2], &CouplingSpec::new(), 4, 0).unwrap();
        let mut h_coupling = ha.clone();
        h_coupling.couplings.retain(|mc| mc.order() == 2);

        let full = assemble_full(&ha, DEFAULT_DIMENSION_CAP).unwrap();
        let part1 = assemble_full(&h_harm, DEFAULT_DIMENSION_CAP).unwrap();
        let part2 = assemble_full(&h_coupling, DEFAULT_DIMENSION_CAP).unwrap();
        let dev = (&full.matrix - (&part1.matrix + &part2.matrix)).amax();
        assert!(dev < 1e-12);
    }

    #[test]
    fn ground_energy_invariant_under_coupling_reordering() {
        let mut couplings = CouplingSpec::new();
        couplings.insert(vec![0, 1], BTreeMap::from([(vec![1, 1], 0.05)]));
        couplings.insert(vec![1, 2], BTreeMap::from([(vec![2, 1], -0.03)]));
        let h = generate_coupled_oscillator(3, &[1.0, 1.1, 1.2], &couplings, 4, 0).unwrap();
        let full = assemble_full(&h, DEFAULT_DIMENSION_CAP).unwrap();
        let mut reordered = h.clone();
        reordered.couplings.reverse();
        let full2 = assemble_full(&reordered, DEFAULT_DIMENSION_CAP).unwrap();
        assert_abs_diff_eq!(
            ground_energy(&full).unwrap(),
            ground_energy(&full2).unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn identical_inputs_have_zero_energy_error() {
        let h = generate_coupled_oscillator(2, &[1.0, 1.1], &CouplingSpec::new(), 4, 0).unwrap();
        let full = assemble_full(&h, DEFAULT_DIMENSION_CAP).unwrap();
        let report = energy_error_report(&full, &full.clone()).unwrap();
        assert_eq!(report.delta_e, 0.0);
        assert!(report.within_bound);
    }

    #[test]
    fn cap_is_enforced() {
        let h = generate_coupled_oscillator(4, &[1.0; 4], &CouplingSpec::new(), 6, 0).unwrap();
        assert!(matches!(
            assemble_full(&h, 1000),
            Err(OracleError::CapExceeded { dim: 1296, cap: 1000 })
        ));
    }

    #[test]
    fn zero_hamiltonian_certifies_at_zero_deviation() {
        let mut h = generate_coupled_oscillator(2, &[1.0, 1.0], &CouplingSpec::new(), 3, 0).unwrap();
        for mc in &mut h.couplings {
            mc.coupling_tensor.fill(0.0);
        }
        let dev = certify_lcu(&h, Representation::Triangular).unwrap();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn certification_on_coupled_model_all_representations() {
        let mut couplings = CouplingSpec::new();
        couplings.insert(vec![0, 1], BTreeMap::from([(vec![1, 1], 0.08), (vec![2, 2], 0.02)]));
        let h = generate_coupled_oscillator(2, &[1.0, 1.3], &couplings, 4, 0).unwrap();
        for rep in Representation::ALL {
            let dev = certify_lcu(&h, rep).unwrap();
            let tol = if rep == Representation::Diagonal { 1e-9 } else { 1e-10 };
            assert!(dev < tol, "{rep}: deviation {dev}");
        }
    }

    #[test]
    fn certification_rejects_oversized_modes() {
        let h = generate_coupled_oscillator(2, &[1.0, 1.0], &CouplingSpec::new(), 8, 0).unwrap();
        assert!(matches!(
            certify_lcu(&h, Representation::Triangular),
            Err(OracleError::Precondition(_))
        ));
    }
}
