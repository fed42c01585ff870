//! Synthetic model generation: coupled anharmonic-oscillator Hamiltonians in
//! the dimensionless harmonic-oscillator basis.

use super::harmonic::{harmonic_integrals, OperatorKind};
use super::{Mode, ModeCoupling, OneModeOperator, SopError, SopHamiltonian};
use ndarray::{ArrayD, Dimension};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Polynomial coupling map: per mode tuple, monomial q-power tuples with
/// coefficients, e.g. `{(0,1): {(1,1): 0.1}}` for `0.1 q_0 q_1`.
pub type CouplingSpec = BTreeMap<Vec<usize>, BTreeMap<Vec<u32>, f64>>;

/// Build a coupled-oscillator Hamiltonian.
///
/// Every mode `m` carries the harmonic one-mode part `ω_m (p² + q²)/2`,
/// stored as a one-mode coupling with basis `{p², q²}`. Each entry of
/// `couplings` adds a mode coupling whose operator bases are the q-powers
/// appearing in its monomials. The result is a pure function of the
/// arguments; `seed` is only recorded in the metadata.
pub fn generate_coupled_oscillator(
    n_modes: usize,
    frequencies: &[f64],
    couplings: &CouplingSpec,
    n_modals: usize,
    seed: u64,
) -> Result<SopHamiltonian, SopError> {
    assert_eq!(frequencies.len(), n_modes, "one frequency per mode");
    if n_modals < 2 {
        return Err(SopError::BadModalCount(0, n_modals));
    }
    for &w in frequencies {
        if !w.is_finite() || w <= 0.0 {
            return Err(SopError::BadFrequency(w));
        }
    }

    let mut h = SopHamiltonian::default();
    for (i, &w) in frequencies.iter().enumerate() {
        h.modes.push(Mode::new(i, n_modals, format!("q{i}")));
        let p2 = oper(i, OperatorKind::PSquared, n_modals)?;
        let q2 = oper(i, OperatorKind::QPower(2), n_modals)?;
        h.couplings.push(ModeCoupling {
            modes: vec![i],
            operator_basis: vec![vec![p2, q2]],
            coupling_tensor: ArrayD::from_shape_vec(
                ndarray::IxDyn(&[2]),
                vec![w / 2.0, w / 2.0],
            )
            .expect("shape"),
        });
    }

    for (tuple, monomials) in couplings {
        if tuple.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SopError::DuplicateModeInCoupling(tuple.clone()));
        }
        if tuple.iter().any(|&m| m >= n_modes) {
            return Err(SopError::Schema(format!(
                "coupling {tuple:?} references a mode >= {n_modes}"
            )));
        }
        // Collect the distinct powers used at each tuple position; they form
        // the per-mode operator basis and index the tensor axes.
        let order = tuple.len();
        let mut powers_per_pos: Vec<Vec<u32>> = vec![Vec::new(); order];
        for powers in monomials.keys() {
            if powers.len() != order {
                return Err(SopError::Schema(format!(
                    "monomial {powers:?} arity does not match coupling {tuple:?}"
                )));
            }
            for (pos, &p) in powers.iter().enumerate() {
                if p == 0 {
                    return Err(SopError::BadOperatorPower(p));
                }
                if p > 4 {
                    return Err(SopError::PolynomialOrderTooHigh(p));
                }
                if !powers_per_pos[pos].contains(&p) {
                    powers_per_pos[pos].push(p);
                }
            }
        }
        for v in &mut powers_per_pos {
            v.sort_unstable();
        }

        let shape: Vec<usize> = powers_per_pos.iter().map(Vec::len).collect();
        let mut tensor = ArrayD::zeros(ndarray::IxDyn(&shape));
        for (powers, &coeff) in monomials {
            let idx: Vec<usize> = powers
                .iter()
                .enumerate()
                .map(|(pos, p)| powers_per_pos[pos].binary_search(p).expect("collected"))
                .collect();
            tensor[ndarray::IxDyn(&idx)] = coeff;
        }

        let mut operator_basis = Vec::with_capacity(order);
        for (pos, &mode) in tuple.iter().enumerate() {
            let basis: Result<Vec<_>, _> = powers_per_pos[pos]
                .iter()
                .map(|&p| oper(mode, OperatorKind::QPower(p), n_modals))
                .collect();
            operator_basis.push(basis?);
        }

        h.couplings.push(ModeCoupling {
            modes: tuple.clone(),
            operator_basis,
            coupling_tensor: tensor,
        });
    }

    h.metadata.insert("model".into(), "coupled_oscillator".into());
    h.metadata.insert("seed".into(), seed.to_string());
    Ok(h)
}

fn oper(mode: usize, kind: OperatorKind, n_modals: usize) -> Result<OneModeOperator, SopError> {
    let mut op = harmonic_integrals(kind, n_modals)?;
    op.mode = mode;
    Ok(op)
}

/// Random polynomial couplings on the given mode tuples: per tuple,
/// `terms_per_coupling` monomials with q-powers in 1..=3 and coefficients
/// uniform in `[-amplitude, amplitude]`, all drawn from `seed`.
pub fn generate_random_model(
    n_modes: usize,
    n_modals: usize,
    coupling_tuples: &[Vec<usize>],
    terms_per_coupling: usize,
    amplitude: f64,
    seed: u64,
) -> Result<SopHamiltonian, SopError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frequencies: Vec<f64> = (0..n_modes).map(|_| rng.gen_range(0.8..1.6)).collect();
    let mut couplings: CouplingSpec = BTreeMap::new();
    for tuple in coupling_tuples {
        let entry = couplings.entry(tuple.clone()).or_default();
        while entry.len() < terms_per_coupling {
            let powers: Vec<u32> = tuple.iter().map(|_| rng.gen_range(1..=3)).collect();
            let coeff = rng.gen_range(-amplitude..amplitude);
            entry.insert(powers, coeff);
        }
    }
    let mut h = generate_coupled_oscillator(n_modes, &frequencies, &couplings, n_modals, seed)?;
    h.metadata.insert("model".into(), "random_polynomial".into());
    Ok(h)
}

/// Model whose coupling tensors are sums of random rank-1 components with the
/// given weights, so low-rank truncation at a threshold between two weights
/// retains exactly the heavier components.
///
/// Each coupling uses the q-power basis `{q, q², q³}` on every mode of its
/// tuple; component vectors are seeded, unit-norm and dense.
pub fn generate_low_rank_model(
    n_modes: usize,
    n_modals: usize,
    coupling_tuples: &[Vec<usize>],
    component_weights: &[f64],
    seed: u64,
) -> Result<SopHamiltonian, SopError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frequencies: Vec<f64> = (0..n_modes).map(|_| rng.gen_range(0.9..1.5)).collect();
    let mut h =
        generate_coupled_oscillator(n_modes, &frequencies, &BTreeMap::new(), n_modals, seed)?;

    let n_ops = 3usize;
    for tuple in coupling_tuples {
        if tuple.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SopError::DuplicateModeInCoupling(tuple.clone()));
        }
        let order = tuple.len();
        let shape = vec![n_ops; order];
        let mut tensor = ArrayD::<f64>::zeros(ndarray::IxDyn(&shape));
        for &w in component_weights {
            let vectors: Vec<Vec<f64>> = (0..order)
                .map(|_| {
                    let v: Vec<f64> = (0..n_ops).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / norm).collect()
                })
                .collect();
            for (idx, t) in tensor.indexed_iter_mut() {
                let mut prod = w;
                for (pos, &i) in idx.as_array_view().iter().enumerate() {
                    prod *= vectors[pos][i];
                }
                *t += prod;
            }
        }

        let mut operator_basis = Vec::with_capacity(order);
        for &mode in tuple {
            let basis: Result<Vec<_>, _> = (1..=n_ops as u32)
                .map(|p| oper(mode, OperatorKind::QPower(p), n_modals))
                .collect();
            operator_basis.push(basis?);
        }
        h.couplings.push(ModeCoupling {
            modes: tuple.clone(),
            operator_basis,
            coupling_tensor: tensor,
        });
    }
    h.metadata.insert("model".into(), "low_rank_components".into());
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sop::validate;

    #[test]
    fn uncoupled_pair_is_two_one_mode_couplings() {
        let h = generate_coupled_oscillator(2, &[1.0, 2.0], &BTreeMap::new(), 6, 0).unwrap();
        assert_eq!(h.couplings.len(), 2);
        assert!(h.couplings.iter().all(|c| c.order() == 1));
        assert!(validate(&h).is_empty());
    }

    #[test]
    fn bilinear_coupling_has_expected_shape() {
        let mut couplings = CouplingSpec::new();
        couplings.insert(vec![0, 1], BTreeMap::from([(vec![1, 1], 0.1)]));
        let h = generate_coupled_oscillator(2, &[1.0, 1.0], &couplings, 6, 0).unwrap();
        assert_eq!(h.couplings.len(), 3);
        let mc = &h.couplings[2];
        assert_eq!(mc.modes, vec![0, 1]);
        assert_eq!(mc.coupling_tensor.shape(), &[1, 1]);
        assert_eq!(mc.coupling_tensor[ndarray::IxDyn(&[0, 0])], 0.1);
        assert!(validate(&h).is_empty());
    }

    #[test]
    fn duplicate_mode_in_coupling_rejected() {
        let mut couplings = CouplingSpec::new();
        couplings.insert(vec![1, 1], BTreeMap::from([(vec![1, 1], 0.1)]));
        let err = generate_coupled_oscillator(2, &[1.0, 1.0], &couplings, 4, 0);
        assert!(matches!(err, Err(SopError::DuplicateModeInCoupling(_))));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_random_model(3, 4, &[vec![0, 1], vec![1, 2]], 3, 0.05, 42).unwrap();
        let b = generate_random_model(3, 4, &[vec![0, 1], vec![1, 2]], 3, 0.05, 42).unwrap();
        let ja = crate::sop::write_sop_string(&a).unwrap();
        let jb = crate::sop::write_sop_string(&b).unwrap();
        assert_eq!(ja, jb);
        assert!(validate(&a).is_empty());
    }
}
