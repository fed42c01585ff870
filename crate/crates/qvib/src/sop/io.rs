//! JSON serialization of SOP Hamiltonians (schema `sop-v1`).
//!
//! Floats are written with shortest round-trip precision, so
//! `read(write(h)) == h` bit for bit. Coupling tensors are stored as nested
//! arrays, one nesting level per mode axis.

use super::{Mode, ModeCoupling, OneModeOperator, SopError, SopHamiltonian};
use nalgebra::DMatrix;
use ndarray::ArrayD;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;

pub const SCHEMA_VERSION: &str = "sop-v1";

/// Mode-coupling orders beyond this are rejected at parse time.
const MAX_COUPLING_ORDER: usize = 4;

#[derive(Serialize, Deserialize)]
struct ModeSchema {
    index: usize,
    n_modals: usize,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct CouplingSchema {
    modes: Vec<usize>,
    /// Per mode of the coupling, the list of operator matrices (row-major).
    basis: Vec<Vec<Vec<Vec<f64>>>>,
    /// Dense coefficient tensor as nested arrays, one level per mode.
    tensor: Value,
}

#[derive(Serialize, Deserialize)]
struct SopSchema {
    version: String,
    modes: Vec<ModeSchema>,
    couplings: Vec<CouplingSchema>,
    metadata: BTreeMap<String, String>,
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, SopError> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(SopError::Schema("ragged operator matrix".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |r, c| rows[r][c]))
}

fn tensor_to_value(t: &ArrayD<f64>) -> Value {
    fn rec(t: &ArrayD<f64>, prefix: &mut Vec<usize>, depth: usize) -> Value {
        if depth == t.ndim() {
            return Value::from(t[ndarray::IxDyn(prefix)]);
        }
        let len = t.shape()[depth];
        let items: Vec<Value> = (0..len)
            .map(|i| {
                prefix.push(i);
                let v = rec(t, prefix, depth + 1);
                prefix.pop();
                v
            })
            .collect();
        Value::from(items)
    }
    rec(t, &mut Vec::new(), 0)
}

fn tensor_from_value(v: &Value, ndim: usize) -> Result<ArrayD<f64>, SopError> {
    fn shape_of(v: &Value, ndim: usize, shape: &mut Vec<usize>) -> Result<(), SopError> {
        if ndim == 0 {
            if !v.is_number() {
                return Err(SopError::Schema("tensor nesting deeper than mode count".into()));
            }
            return Ok(());
        }
        let arr = v
            .as_array()
            .ok_or_else(|| SopError::Schema("tensor nesting shallower than mode count".into()))?;
        shape.push(arr.len());
        if let Some(first) = arr.first() {
            shape_of(first, ndim - 1, shape)?;
        } else if ndim > 1 {
            return Err(SopError::Schema("empty tensor axis".into()));
        }
        Ok(())
    }
    fn fill(
        v: &Value,
        shape: &[usize],
        depth: usize,
        out: &mut Vec<f64>,
    ) -> Result<(), SopError> {
        if depth == shape.len() {
            let x = v
                .as_f64()
                .ok_or_else(|| SopError::Schema("tensor entry is not a number".into()))?;
            out.push(x);
            return Ok(());
        }
        let arr = v
            .as_array()
            .ok_or_else(|| SopError::Schema("ragged tensor".into()))?;
        if arr.len() != shape[depth] {
            return Err(SopError::Schema("ragged tensor".into()));
        }
        for item in arr {
            fill(item, shape, depth + 1, out)?;
        }
        Ok(())
    }

    let mut shape = Vec::new();
    shape_of(v, ndim, &mut shape)?;
    let mut data = Vec::with_capacity(shape.iter().product());
    fill(v, &shape, 0, &mut data)?;
    ArrayD::from_shape_vec(ndarray::IxDyn(&shape), data)
        .map_err(|e| SopError::Schema(e.to_string()))
}

fn check_finite(h: &SopHamiltonian) -> Result<(), SopError> {
    for mc in &h.couplings {
        if mc.coupling_tensor.iter().any(|c| !c.is_finite()) {
            return Err(SopError::NonFinite(format!("tensor of coupling {:?}", mc.modes)));
        }
        for basis in &mc.operator_basis {
            for op in basis {
                if op.matrix.iter().any(|x| !x.is_finite()) {
                    return Err(SopError::NonFinite(format!(
                        "operator matrix of coupling {:?}",
                        mc.modes
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Serialize to the `sop-v1` JSON text.
pub fn write_sop_string(h: &SopHamiltonian) -> Result<String, SopError> {
    check_finite(h)?;
    let schema = SopSchema {
        version: SCHEMA_VERSION.to_string(),
        modes: h
            .modes
            .iter()
            .map(|m| ModeSchema {
                index: m.index,
                n_modals: m.n_modals,
                label: m.label.clone(),
            })
            .collect(),
        couplings: h
            .couplings
            .iter()
            .map(|mc| CouplingSchema {
                modes: mc.modes.clone(),
                basis: mc
                    .operator_basis
                    .iter()
                    .map(|ops| ops.iter().map(|op| matrix_to_rows(&op.matrix)).collect())
                    .collect(),
                tensor: tensor_to_value(&mc.coupling_tensor),
            })
            .collect(),
        metadata: h.metadata.clone(),
    };
    Ok(serde_json::to_string_pretty(&schema)?)
}

pub fn write_sop(h: &SopHamiltonian, path: impl AsRef<Path>) -> Result<(), SopError> {
    let text = write_sop_string(h)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Parse the `sop-v1` JSON text.
///
/// Rejects unknown version tags, non-finite numbers, tensor/basis shape
/// mismatches and couplings of order above four.
pub fn read_sop_str(text: &str) -> Result<SopHamiltonian, SopError> {
    let schema: SopSchema = serde_json::from_str(text)?;
    if schema.version != SCHEMA_VERSION {
        return Err(SopError::UnknownVersion(schema.version));
    }
    let mut h = SopHamiltonian {
        modes: schema
            .modes
            .iter()
            .map(|m| Mode::new(m.index, m.n_modals, m.label.clone()))
            .collect(),
        couplings: Vec::with_capacity(schema.couplings.len()),
        metadata: schema.metadata,
    };
    for mc in &schema.couplings {
        let order = mc.modes.len();
        if order == 0 {
            return Err(SopError::Schema("coupling with empty mode list".into()));
        }
        if order > MAX_COUPLING_ORDER {
            return Err(SopError::Schema(format!(
                "coupling {:?} has order {order}, maximum supported is {MAX_COUPLING_ORDER}",
                mc.modes
            )));
        }
        if mc.basis.len() != order {
            return Err(SopError::Schema(format!(
                "coupling {:?} has {} basis lists for {order} modes",
                mc.modes,
                mc.basis.len()
            )));
        }
        let tensor = tensor_from_value(&mc.tensor, order)?;
        for (axis, ops) in mc.basis.iter().enumerate() {
            if tensor.shape()[axis] != ops.len() {
                return Err(SopError::Schema(format!(
                    "coupling {:?}: tensor axis {axis} has length {} but basis has {} operators",
                    mc.modes,
                    tensor.shape()[axis],
                    ops.len()
                )));
            }
        }
        let operator_basis: Result<Vec<Vec<OneModeOperator>>, SopError> = mc
            .basis
            .iter()
            .zip(&mc.modes)
            .map(|(ops, &mode)| {
                ops.iter()
                    .map(|rows| Ok(OneModeOperator::new(mode, matrix_from_rows(rows)?)))
                    .collect()
            })
            .collect();
        h.couplings.push(ModeCoupling {
            modes: mc.modes.clone(),
            operator_basis: operator_basis?,
            coupling_tensor: tensor,
        });
    }
    check_finite(&h)?;
    Ok(h)
}

pub fn read_sop(path: impl AsRef<Path>) -> Result<SopHamiltonian, SopError> {
    let text = std::fs::read_to_string(path)?;
    read_sop_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sop::gen::{generate_coupled_oscillator, CouplingSpec};
    use std::collections::BTreeMap;

    fn sample() -> SopHamiltonian {
        let mut couplings = CouplingSpec::new();
        couplings.insert(
            vec![0, 1],
            BTreeMap::from([(vec![1, 1], 0.1), (vec![2, 1], -0.037)]),
        );
        generate_coupled_oscillator(3, &[1.0, 1.25, 2.0], &couplings, 4, 7).unwrap()
    }

    fn assert_same(a: &SopHamiltonian, b: &SopHamiltonian) {
        assert_eq!(a.modes, b.modes);
        assert_eq!(a.metadata, b.metadata);
        assert_eq!(a.couplings.len(), b.couplings.len());
        for (ca, cb) in a.couplings.iter().zip(&b.couplings) {
            assert_eq!(ca.modes, cb.modes);
            assert_eq!(ca.coupling_tensor, cb.coupling_tensor);
            assert_eq!(ca.operator_basis.len(), cb.operator_basis.len());
            for (ba, bb) in ca.operator_basis.iter().zip(&cb.operator_basis) {
                assert_eq!(ba, bb);
            }
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let h = sample();
        let text = write_sop_string(&h).unwrap();
        let back = read_sop_str(&text).unwrap();
        assert_same(&h, &back);
        // And the serialized form is stable.
        assert_eq!(write_sop_string(&back).unwrap(), text);
    }

    #[test]
    fn missing_modes_key_names_the_key() {
        let err = read_sop_str(r#"{"version":"sop-v1","couplings":[],"metadata":{}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("modes"), "error was: {err}");
    }

    #[test]
    fn unknown_version_rejected() {
        let text = write_sop_string(&sample()).unwrap().replace("sop-v1", "sop-v9");
        assert!(matches!(read_sop_str(&text), Err(SopError::UnknownVersion(_))));
    }

    #[test]
    fn nan_tensor_rejected_on_write() {
        let mut h = sample();
        h.couplings[0].coupling_tensor[ndarray::IxDyn(&[0])] = f64::NAN;
        assert!(matches!(write_sop_string(&h), Err(SopError::NonFinite(_))));
    }

    #[test]
    fn order_five_coupling_rejected_at_parse() {
        let text = r#"{
            "version": "sop-v1",
            "modes": [
                {"index":0,"n_modals":2,"label":"a"},{"index":1,"n_modals":2,"label":"b"},
                {"index":2,"n_modals":2,"label":"c"},{"index":3,"n_modals":2,"label":"d"},
                {"index":4,"n_modals":2,"label":"e"}
            ],
            "couplings": [{"modes":[0,1,2,3,4],"basis":[[],[],[],[],[]],"tensor":[]}],
            "metadata": {}
        }"#;
        let err = read_sop_str(text).unwrap_err().to_string();
        assert!(err.contains("order"), "error was: {err}");
    }
}
