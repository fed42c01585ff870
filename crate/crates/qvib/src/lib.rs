//! Resource estimation for qubitized quantum phase estimation of vibrational
//! sum-over-products (SOP) Hamiltonians.
//!
//! The crate is organised around the lifecycle of an estimate:
//!
//! * [`sop`] — the SOP Hamiltonian data model, validation, JSON I/O and
//!   synthetic model generation.
//! * [`lcu`] — quadratic, triangular and diagonal LCU representations of
//!   one-mode operators, their norms and basis-rotation angles.
//! * [`decomp`] — tensor compression of coupling tensors (SVD, Tucker/HOOI,
//!   CP-ALS) producing the factorised per-term form.
//! * [`grouping`] — conflict-graph coloring that partitions Hamiltonian terms
//!   into disjoint groups for parallel block encoding.
//! * [`cost`] — closed-form Toffoli and qubit cost functions for one-mode,
//!   product, serial-sum and parallel-sum block encodings, aggregated into a
//!   phase-estimation estimate.
//! * [`oracle`] — exact diagonalization on the direct-product modal space,
//!   used to certify representations and decomposition error control.

pub mod cost;
pub mod decomp;
pub mod grouping;
pub mod lcu;
pub mod oracle;
pub mod sop;
