use nalgebra::{Matrix3, Vector3};

use crate::error::{bail, Result};
use crate::numcore::Tensor;

pub const IDENTITY_6D: [f64; 6] = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];

const DEGENERATE_TOL: f64 = 1e-9;

/// 6D rotation to matrix by Gram-Schmidt. The six numbers are the first two
/// columns `a1 = r[0..3]`, `a2 = r[3..6]` of the target matrix.
pub fn rot6d_to_matrix(r: &[f64]) -> Result<Matrix3<f64>> {
    if r.len() != 6 {
        bail!(Usage, "6D rotation needs 6 values, got {}", r.len());
    }
    let a1 = Vector3::new(r[0], r[1], r[2]);
    let a2 = Vector3::new(r[3], r[4], r[5]);
    let n1 = a1.norm();
    if !(n1 > DEGENERATE_TOL) {
        bail!(Numeric, "6D rotation has a zero first column: {r:?}");
    }
    let b1 = a1 / n1;
    let u = a2 - b1 * a2.dot(&b1);
    let n2 = u.norm();
    if !(n2 > DEGENERATE_TOL) {
        bail!(Numeric, "6D rotation columns are parallel or zero: {r:?}");
    }
    let b2 = u / n2;
    let b3 = b1.cross(&b2);
    Ok(Matrix3::from_columns(&[b1, b2, b3]))
}

pub fn matrix_to_rot6d(m: &Matrix3<f64>) -> [f64; 6] {
    [m[(0, 0)], m[(1, 0)], m[(2, 0)], m[(0, 1)], m[(1, 1)], m[(2, 1)]]
}

/// Differentiable Gram-Schmidt: `[6]` tensor to a row-major `[3 × 3]` matrix.
/// Degenerate input yields non-finite values rather than an error.
pub fn rot6d_tensor(r: &Tensor) -> Result<Tensor> {
    if r.numel() != 6 {
        bail!(Usage, "6D rotation needs 6 values, got shape {:?}", r.shape());
    }
    let a1 = r.gather(&[0, 1, 2], &[3])?;
    let a2 = r.gather(&[3, 4, 5], &[3])?;
    let b1 = a1.div(&a1.square().sum().sqrt())?;
    let u = a2.sub(&b1.mul(&a2.mul(&b1)?.sum())?)?;
    let b2 = u.div(&u.square().sum().sqrt())?;
    let b3 = cross(&b1, &b2)?;
    // concat holds the columns back to back; R[i][j] = col_j[i]
    let cols = Tensor::concat(&[&b1, &b2, &b3], 0)?;
    cols.gather(&[0, 3, 6, 1, 4, 7, 2, 5, 8], &[3, 3])
}

fn cross(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let yzx = [1, 2, 0];
    let zxy = [2, 0, 1];
    a.gather(&yzx, &[3])?
        .mul(&b.gather(&zxy, &[3])?)?
        .sub(&a.gather(&zxy, &[3])?.mul(&b.gather(&yzx, &[3])?)?)
}

/// Reflect a 15-joint hand pose across the sagittal plane so a left hand
/// reads as a right hand (and back).
///
/// Each joint rotation `R` becomes `M·R·M` with `M = diag(−1, 1, 1)`. Since
/// Gram-Schmidt commutes with orthogonal maps, this is applied directly to
/// the 6D columns (`a1 → −M·a1`, `a2 → M·a2`), which makes it an exact
/// involution.
pub fn mirror_hand_pose(theta: &[f64]) -> Result<Vec<f64>> {
    if theta.len() % 6 != 0 {
        bail!(Usage, "hand pose length {} is not a multiple of 6", theta.len());
    }
    let mut out = Vec::with_capacity(theta.len());
    for joint in theta.chunks_exact(6) {
        rot6d_to_matrix(joint)?;
        out.extend_from_slice(&mirror_6d(joint));
    }
    Ok(out)
}

pub(crate) fn mirror_6d(r: &[f64]) -> [f64; 6] {
    [r[0], -r[1], -r[2], -r[3], r[4], r[5]]
}
