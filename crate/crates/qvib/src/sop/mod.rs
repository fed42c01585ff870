//! Sum-over-products vibrational Hamiltonian data model.
//!
//! A Hamiltonian is a set of modes, each with a finite modal basis of size
//! `N_m`, plus a list of mode couplings. A coupling over modes
//! `(m_1 < m_2 < ...)` carries one list of one-mode operators per mode and a
//! dense coefficient tensor with one axis per mode, so the operator reads
//!
//!   H = Σ_mc Σ_o c[o_1, o_2, ...] · h^{m_1,o_1} ⊗ h^{m_2,o_2} ⊗ ...
//!
//! All types are immutable after construction and safe to share across
//! threads.

mod gen;
mod harmonic;
mod io;

pub use gen::{generate_coupled_oscillator, generate_low_rank_model, generate_random_model, CouplingSpec};
pub use harmonic::{harmonic_integrals, OperatorKind};
pub use io::{read_sop, read_sop_str, write_sop, write_sop_string, SCHEMA_VERSION};

use nalgebra::DMatrix;
use ndarray::{ArrayD, Dimension};
use std::collections::BTreeMap;
use thiserror::Error;

/// Relative tolerance under which stored matrices must be symmetric.
pub const SYMMETRY_RTOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SopError {
    #[error("mode {0} has {1} modals; at least 2 are required")]
    BadModalCount(usize, usize),
    #[error("operator kind {0:?} requires power >= 1")]
    BadOperatorPower(u32),
    #[error("coupling {0:?} repeats a mode index")]
    DuplicateModeInCoupling(Vec<usize>),
    #[error("frequency {0} is not positive")]
    BadFrequency(f64),
    #[error("coupling polynomial power {0} exceeds the supported maximum of 4")]
    PolynomialOrderTooHigh(u32),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("unknown schema version {0:?}, expected {SCHEMA_VERSION:?}")]
    UnknownVersion(String),
    #[error("non-finite number in {0}")]
    NonFinite(String),
}

/// One vibrational degree of freedom with `n_modals` retained basis functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mode {
    pub index: usize,
    pub n_modals: usize,
    pub label: String,
}

impl Mode {
    pub fn new(index: usize, n_modals: usize, label: impl Into<String>) -> Self {
        Self {
            index,
            n_modals,
            label: label.into(),
        }
    }
}

/// A real symmetric integral matrix `h_rs = <r|h|s>` over one mode's modals.
#[derive(Debug, Clone, PartialEq)]
pub struct OneModeOperator {
    pub mode: usize,
    pub matrix: DMatrix<f64>,
}

impl OneModeOperator {
    pub fn new(mode: usize, matrix: DMatrix<f64>) -> Self {
        Self { mode, matrix }
    }

    pub fn n_modals(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest absolute deviation from symmetry, relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let scale = m.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut dev = 0.0_f64;
        for r in 0..m.nrows() {
            for s in (r + 1)..m.ncols() {
                dev = dev.max((m[(r, s)] - m[(s, r)]).abs());
            }
        }
        dev / scale
    }

    /// Exactly symmetrised copy of the matrix, `(M + M^T) / 2`.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let m = &self.matrix;
        let mut out = m.clone();
        for r in 0..m.nrows() {
            for s in 0..m.ncols() {
                out[(r, s)] = 0.5 * (m[(r, s)] + m[(s, r)]);
            }
        }
        out
    }
}

/// A set of coupled modes with per-mode operator bases and a dense
/// coefficient tensor, one axis per mode in ascending mode order.
#[derive(Debug, Clone)]
pub struct ModeCoupling {
    /// Strictly increasing mode indices.
    pub modes: Vec<usize>,
    /// `operator_basis[i]` lists the operators for `modes[i]`; axis `i` of
    /// `coupling_tensor` indexes this list.
    pub operator_basis: Vec<Vec<OneModeOperator>>,
    pub coupling_tensor: ArrayD<f64>,
}

impl ModeCoupling {
    pub fn order(&self) -> usize {
        self.modes.len()
    }

    /// Number of product terms when the tensor is expanded densely.
    pub fn dense_term_count(&self) -> usize {
        self.coupling_tensor.len()
    }

    /// Number of product terms with nonzero coefficient.
    pub fn term_count(&self) -> usize {
        self.coupling_tensor.iter().filter(|c| **c != 0.0).count()
    }

    /// Iterate nonzero terms as `(multi-index, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.coupling_tensor
            .indexed_iter()
            .filter(|(_, c)| **c != 0.0)
            .map(|(ix, c)| (ix.as_array_view().to_vec(), *c))
    }
}

/// The full sum-over-products Hamiltonian.
#[derive(Debug, Clone, Default)]
pub struct SopHamiltonian {
    pub modes: Vec<Mode>,
    pub couplings: Vec<ModeCoupling>,
    pub metadata: BTreeMap<String, String>,
}

impl SopHamiltonian {
    pub fn mode(&self, index: usize) -> Option<&Mode> {
        self.modes.iter().find(|m| m.index == index)
    }

    /// Total number of qubits needed by the direct (one qubit per modal)
    /// encoding: Σ_m N_m.
    pub fn vibrational_qubits(&self) -> usize {
        self.modes.iter().map(|m| m.n_modals).sum()
    }

    /// Total number of nonzero product terms over all couplings.
    pub fn term_count(&self) -> usize {
        self.couplings.iter().map(|c| c.term_count()).sum()
    }

    /// True if the `factorized` marker is set, i.e. every coupling is stored
    /// as a list of renormalized rank terms.
    pub fn is_factorized(&self) -> bool {
        self.metadata.get("factorized").map(String::as_str) == Some("true")
    }
}

/// One occupied modal per mode; the physical subspace of the direct encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationState {
    /// `occupied[i]` is the occupied modal of `modes[i]`, in mode order.
    pub occupied: Vec<usize>,
}

impl OccupationState {
    /// Linear index in the row-major direct-product basis (mode 0 slowest).
    pub fn linear_index(&self, modals: &[usize]) -> usize {
        self.occupied
            .iter()
            .zip(modals)
            .fold(0, |acc, (&occ, &n)| acc * n + occ)
    }

    /// Inverse of [`linear_index`](Self::linear_index).
    pub fn from_linear_index(mut index: usize, modals: &[usize]) -> Self {
        let mut occupied = vec![0; modals.len()];
        for (i, &n) in modals.iter().enumerate().rev() {
            occupied[i] = index % n;
            index /= n;
        }
        Self { occupied }
    }
}

/// Canonical identifier of a mode coupling, used as the node id in conflict
/// graphs and cost tables: `"mc:0-2-3"` for modes `[0, 2, 3]`.
pub fn mc_id(modes: &[usize]) -> String {
    let joined: Vec<String> = modes.iter().map(usize::to_string).collect();
    format!("mc:{}", joined.join("-"))
}

/// A violation found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateModeIndex {
        index: usize,
    },
    TooFewModals {
        mode: usize,
        n_modals: usize,
    },
    UnknownModeReference {
        coupling: Vec<usize>,
        mode: usize,
    },
    UnsortedCouplingModes {
        coupling: Vec<usize>,
    },
    DuplicateCoupling {
        coupling: Vec<usize>,
    },
    CouplingOrderTooHigh {
        coupling: Vec<usize>,
        order: usize,
    },
    BasisCountMismatch {
        coupling: Vec<usize>,
        axis: usize,
        tensor_len: usize,
        basis_len: usize,
    },
    OperatorShapeMismatch {
        coupling: Vec<usize>,
        mode: usize,
        rows: usize,
        cols: usize,
        n_modals: usize,
    },
    AsymmetricOperator {
        coupling: Vec<usize>,
        mode: usize,
        operator: usize,
        relative_deviation: f64,
    },
    NonFiniteMatrixEntry {
        coupling: Vec<usize>,
        mode: usize,
        operator: usize,
    },
    NonFiniteTensorEntry {
        coupling: Vec<usize>,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DuplicateModeIndex { index } => {
                write!(f, "mode index {index} appears more than once")
            }
            Violation::TooFewModals { mode, n_modals } => {
                write!(f, "mode {mode} has {n_modals} modals; need at least 2")
            }
            Violation::UnknownModeReference { coupling, mode } => {
                write!(f, "coupling {coupling:?} references unknown mode {mode}")
            }
            Violation::UnsortedCouplingModes { coupling } => {
                write!(f, "coupling {coupling:?} modes are not strictly increasing")
            }
            Violation::DuplicateCoupling { coupling } => {
                write!(f, "more than one coupling on mode set {coupling:?}")
            }
            Violation::CouplingOrderTooHigh { coupling, order } => {
                write!(f, "coupling {coupling:?} has order {order} > 4")
            }
            Violation::BasisCountMismatch {
                coupling,
                axis,
                tensor_len,
                basis_len,
            } => write!(
                f,
                "coupling {coupling:?}: tensor axis {axis} has length {tensor_len} but the \
                 operator basis has {basis_len} entries"
            ),
            Violation::OperatorShapeMismatch {
                coupling,
                mode,
                rows,
                cols,
                n_modals,
            } => write!(
                f,
                "coupling {coupling:?}: operator for mode {mode} is {rows}x{cols}, expected \
                 {n_modals}x{n_modals}"
            ),
            Violation::AsymmetricOperator {
                coupling,
                mode,
                operator,
                relative_deviation,
            } => write!(
                f,
                "coupling {coupling:?}: operator {operator} of mode {mode} deviates from \
                 symmetry by {relative_deviation:.3e} (relative)"
            ),
            Violation::NonFiniteMatrixEntry {
                coupling,
                mode,
                operator,
            } => write!(
                f,
                "coupling {coupling:?}: operator {operator} of mode {mode} has a non-finite entry"
            ),
            Violation::NonFiniteTensorEntry { coupling } => {
                write!(f, "coupling {coupling:?}: tensor has a non-finite entry")
            }
        }
    }
}

/// Check every structural invariant of `h` and return the violations found.
///
/// An empty list means the Hamiltonian is well formed: unique modes with at
/// least two modals each, strictly increasing and unique coupling mode sets of
/// order at most 4, tensor axes matching basis lengths, and finite symmetric
/// operator matrices.
pub fn validate(h: &SopHamiltonian) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen = std::collections::BTreeSet::new();
    for m in &h.modes {
        if !seen.insert(m.index) {
            out.push(Violation::DuplicateModeIndex { index: m.index });
        }
        if m.n_modals < 2 {
            out.push(Violation::TooFewModals {
                mode: m.index,
                n_modals: m.n_modals,
            });
        }
    }

    let mut seen_couplings = std::collections::BTreeSet::new();
    for mc in &h.couplings {
        let id = mc.modes.clone();
        if !mc.modes.windows(2).all(|w| w[0] < w[1]) {
            out.push(Violation::UnsortedCouplingModes { coupling: id.clone() });
        }
        if !seen_couplings.insert(mc.modes.clone()) {
            out.push(Violation::DuplicateCoupling { coupling: id.clone() });
        }
        if mc.order() > 4 {
            out.push(Violation::CouplingOrderTooHigh {
                coupling: id.clone(),
                order: mc.order(),
            });
        }
        if mc.coupling_tensor.iter().any(|c| !c.is_finite()) {
            out.push(Violation::NonFiniteTensorEntry { coupling: id.clone() });
        }
        for (axis, &mode) in mc.modes.iter().enumerate() {
            let Some(mode_def) = h.mode(mode) else {
                out.push(Violation::UnknownModeReference {
                    coupling: id.clone(),
                    mode,
                });
                continue;
            };
            let tensor_len = mc
                .coupling_tensor
                .shape()
                .get(axis)
                .copied()
                .unwrap_or(0);
            let basis = mc.operator_basis.get(axis).map(Vec::as_slice).unwrap_or(&[]);
            if tensor_len != basis.len() {
                out.push(Violation::BasisCountMismatch {
                    coupling: id.clone(),
                    axis,
                    tensor_len,
                    basis_len: basis.len(),
                });
            }
            for (oi, op) in basis.iter().enumerate() {
                if op.matrix.nrows() != mode_def.n_modals || op.matrix.ncols() != mode_def.n_modals
                {
                    out.push(Violation::OperatorShapeMismatch {
                        coupling: id.clone(),
                        mode,
                        rows: op.matrix.nrows(),
                        cols: op.matrix.ncols(),
                        n_modals: mode_def.n_modals,
                    });
                    continue;
                }
                if op.matrix.iter().any(|x| !x.is_finite()) {
                    out.push(Violation::NonFiniteMatrixEntry {
                        coupling: id.clone(),
                        mode,
                        operator: oi,
                    });
                    continue;
                }
                let dev = op.asymmetry();
                if dev > SYMMETRY_RTOL {
                    out.push(Violation::AsymmetricOperator {
                        coupling: id.clone(),
                        mode,
                        operator: oi,
                        relative_deviation: dev,
                    });
                }
            }
        }
    }

    out
}
