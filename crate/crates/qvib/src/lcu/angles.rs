//! Rotation-angle parameterization of real unit vectors.
//!
//! A unit vector `u` of length `n` is encoded by `n - 1` angles through
//!
//!   u_i = sin(θ_0) ... sin(θ_{i-1}) cos(θ_i)      for i < n - 1,
//!   u_{n-1} = sin(θ_0) ... sin(θ_{n-2}),
//!
//! the product form realised by a ladder of two-modal rotations. Each θ_i is
//! recovered with a two-argument arctangent of (tail norm, component), so
//! cos θ_i carries the component's sign and sin θ_i >= 0; the final angle
//! uses the signed last component so its sign survives the round trip. When a
//! tail is exactly zero the remaining angles are set to 0 (any value would
//! reconstruct; 0 is the canonical choice).

use super::LcuError;

/// Tolerance on `|‖c‖₂ − 1|` for inputs.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Recover the ladder angles `θ_0 .. θ_{n-2}` of a unit vector.
pub fn extract_rotation_angles(c: &[f64]) -> Result<Vec<f64>, LcuError> {
    let n = c.len();
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(LcuError::NotUnitVector { norm });
    }
    if n < 2 {
        return Ok(Vec::new());
    }
    // tail[i] = sqrt(c_i^2 + ... + c_{n-1}^2), accumulated from the end.
    let mut tail = vec![0.0_f64; n + 1];
    for i in (0..n).rev() {
        tail[i] = (tail[i + 1].powi(2) + c[i] * c[i]).sqrt();
    }
    let mut angles = vec![0.0; n - 1];
    for i in 0..n - 1 {
        if tail[i] == 0.0 {
            break; // remaining components all zero; keep canonical zeros
        }
        angles[i] = if i == n - 2 {
            f64::atan2(c[n - 1], c[n - 2])
        } else {
            f64::atan2(tail[i + 1], c[i])
        };
    }
    Ok(angles)
}

/// Rebuild the unit vector encoded by `angles` (inverse of
/// [`extract_rotation_angles`]).
pub fn reconstruct_rotation_vector(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut out = vec![0.0; n];
    let mut sin_prefix = 1.0;
    for (i, &theta) in angles.iter().enumerate() {
        out[i] = sin_prefix * theta.cos();
        sin_prefix *= theta.sin();
    }
    out[n - 1] = sin_prefix;
    out
}
