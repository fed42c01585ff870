//! Cross-module flows: generate → decompose → estimate → verify against the
//! exact diagonalization oracle.

use qvib::cost::{qpe_cost, QpeParams};
use qvib::decomp::{contract_one_mode, decompose_hamiltonian, DecompOptions};
use qvib::grouping::{build_conflict_graph, evaluate_depth, weighted_grouping, GroupingAlgorithm};
use qvib::lcu::Representation;
use qvib::oracle::{
    assemble_full, certify_lcu, eigenvalues, energy_error_report, ground_energy,
    DEFAULT_DIMENSION_CAP,
};
use qvib::sop::{
    generate_coupled_oscillator, generate_low_rank_model, generate_random_model, validate,
    CouplingSpec,
};
use std::collections::BTreeMap;

#[test]
fn one_mode_contraction_preserves_the_spectrum() {
    let mut couplings = CouplingSpec::new();
    couplings.insert(vec![0, 1], BTreeMap::from([(vec![1, 1], 0.05)]));
    let h = generate_coupled_oscillator(2, &[1.0, 1.4], &couplings, 5, 0).unwrap();
    let contracted = contract_one_mode(&h);

    let a = assemble_full(&h, DEFAULT_DIMENSION_CAP).unwrap();
    let b = assemble_full(&contracted, DEFAULT_DIMENSION_CAP).unwrap();
    let ea = eigenvalues(&a).unwrap();
    let eb = eigenvalues(&b).unwrap();
    for (x, y) in ea.iter().zip(&eb) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn exact_threshold_decomposition_preserves_ground_energy() {
    // Couplings built from a single rank-1 component are exactly recoverable,
    // so zero thresholds must not move the spectrum.
    let h = generate_low_rank_model(3, 4, &[vec![0, 1], vec![0, 1, 2]], &[0.04], 19).unwrap();
    assert!(validate(&h).is_empty());
    let opts = DecompOptions { eps_t: 0.0, eps_lr: 0.0, ..Default::default() };
    let (dec, report) = decompose_hamiltonian(&h, &opts).unwrap();
    assert!(report.epsilon_tensor < 1e-12, "eps_tensor {}", report.epsilon_tensor);

    let full = assemble_full(&h, DEFAULT_DIMENSION_CAP).unwrap();
    let full_dec = assemble_full(&dec, DEFAULT_DIMENSION_CAP).unwrap();
    let e0 = ground_energy(&full).unwrap();
    let e1 = ground_energy(&full_dec).unwrap();
    assert!((e0 - e1).abs() < 1e-10, "{e0} vs {e1}");
}

#[test]
fn lossy_decomposition_stays_within_the_perturbation_bound() {
    let h = generate_low_rank_model(
        3,
        4,
        &[vec![0, 1, 2]],
        &[0.05, 3e-4, 5e-6],
        51,
    )
    .unwrap();
    let opts = DecompOptions { eps_lr: 1e-3, ..Default::default() };
    let (dec, report) = decompose_hamiltonian(&h, &opts).unwrap();
    assert!(report.converged);

    let full = assemble_full(&h, DEFAULT_DIMENSION_CAP).unwrap();
    let full_dec = assemble_full(&dec, DEFAULT_DIMENSION_CAP).unwrap();
    let rep = energy_error_report(&full, &full_dec).unwrap();
    assert!(rep.within_bound, "{rep:?}");
    assert!(rep.delta_e > 0.0 || report.epsilon_tensor == 0.0);
}

#[test]
fn factorized_hamiltonians_certify_like_raw_ones() {
    let h = generate_random_model(3, 4, &[vec![0, 1], vec![1, 2]], 2, 0.04, 3).unwrap();
    let (dec, _) = decompose_hamiltonian(&h, &DecompOptions::default()).unwrap();
    assert!(dec.is_factorized());
    for rep in Representation::ALL {
        let dev = certify_lcu(&dec, rep).unwrap();
        assert!(dev < 1e-9, "{rep}: {dev}");
    }
}

#[test]
fn triangular_estimate_never_exceeds_quadratic() {
    let h = generate_random_model(
        6,
        4,
        &[vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 5], vec![0, 3, 5]],
        3,
        0.03,
        8,
    )
    .unwrap();
    let (dec, _) = decompose_hamiltonian(&h, &DecompOptions::default()).unwrap();
    let mut totals = BTreeMap::new();
    for rep in [Representation::Quadratic, Representation::Triangular] {
        let params = QpeParams { representation: rep, ..Default::default() };
        let est = qpe_cost(&dec, &params, None).unwrap();
        totals.insert(rep, est.estimate.toffoli);
    }
    assert!(totals[&Representation::Triangular] <= totals[&Representation::Quadratic]);
}

#[test]
fn grouped_estimate_matches_depth_evaluation_and_beats_serial() {
    let h = generate_random_model(
        6,
        3,
        &[vec![0, 1], vec![2, 3], vec![4, 5], vec![1, 2], vec![3, 4]],
        3,
        0.03,
        15,
    )
    .unwrap();
    let (dec, _) = decompose_hamiltonian(&h, &DecompOptions::default()).unwrap();

    let params = QpeParams::default();
    let serial = qpe_cost(&dec, &params, None).unwrap();
    let costs: BTreeMap<String, u64> =
        serial.per_mc.iter().map(|r| (r.id.clone(), r.toffoli)).collect();

    let graph = build_conflict_graph(&dec, &costs).unwrap();
    let plan = weighted_grouping(&graph, GroupingAlgorithm::Greedy, 30).unwrap();
    let parallel = qpe_cost(&dec, &params, Some(&plan)).unwrap();

    assert!(parallel.block_toffoli <= serial.block_toffoli);
    assert_eq!(
        evaluate_depth(&plan, &costs).unwrap(),
        parallel.block_toffoli,
        "plan depth must equal the parallel block cost"
    );
    assert_eq!(plan.depth_cost, parallel.block_toffoli);
    assert!(parallel.fanout.is_some());
}

#[test]
fn pipeline_smoke_alpha_identity() {
    // generate → decompose → estimate end to end; the norm identity between
    // the entrywise representations must survive the whole pipeline.
    let mut couplings = CouplingSpec::new();
    couplings.insert(vec![0, 1], BTreeMap::from([(vec![1, 1], 0.1)]));
    let h = generate_coupled_oscillator(2, &[1.0, 1.0], &couplings, 6, 42).unwrap();
    let (dec, _) = decompose_hamiltonian(&h, &DecompOptions::default()).unwrap();
    let quad = qpe_cost(
        &dec,
        &QpeParams { representation: Representation::Quadratic, ..Default::default() },
        None,
    )
    .unwrap();
    let tri = qpe_cost(
        &dec,
        &QpeParams { representation: Representation::Triangular, ..Default::default() },
        None,
    )
    .unwrap();
    assert_eq!(quad.alpha_total, tri.alpha_total);
}
