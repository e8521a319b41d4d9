use serde::{Deserialize, Serialize};

use super::rotation::IDENTITY_6D;
use crate::error::{bail, Result};
use crate::numcore::Tensor;

pub const BODY_JOINTS: usize = 10;
pub const HAND_JOINTS: usize = 15;
pub const EXPRESSION_DIMS: usize = 100;
pub const EYELID_DIMS: usize = 2;
pub const FACE_DIMS: usize = EXPRESSION_DIMS + EYELID_DIMS + 6;

/// Per-frame pose and identity parameters. Rotations are 6D, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseParams {
    pub beta: Vec<f64>,
    /// 10 joints × 6.
    pub body: Vec<f64>,
    /// 15 joints × 6.
    pub left_hand: Vec<f64>,
    /// 15 joints × 6.
    pub right_hand: Vec<f64>,
    /// 100 expression, 2 eyelid, 6 jaw rotation.
    pub face: Vec<f64>,
    pub global_rotation: [f64; 6],
    pub global_translation: [f64; 3],
}

impl PoseParams {
    /// Zero shape and expression with every rotation at identity.
    pub fn neutral(shape_dims: usize) -> PoseParams {
        let mut face = vec![0.0; FACE_DIMS];
        face[EXPRESSION_DIMS + EYELID_DIMS..].copy_from_slice(&IDENTITY_6D);
        PoseParams {
            beta: vec![0.0; shape_dims],
            body: IDENTITY_6D.repeat(BODY_JOINTS),
            left_hand: IDENTITY_6D.repeat(HAND_JOINTS),
            right_hand: IDENTITY_6D.repeat(HAND_JOINTS),
            face,
            global_rotation: IDENTITY_6D,
            global_translation: [0.0; 3],
        }
    }

    pub fn expression(&self) -> &[f64] {
        &self.face[..EXPRESSION_DIMS]
    }

    pub fn eyelids(&self) -> &[f64] {
        &self.face[EXPRESSION_DIMS..EXPRESSION_DIMS + EYELID_DIMS]
    }

    pub fn jaw(&self) -> &[f64] {
        &self.face[EXPRESSION_DIMS + EYELID_DIMS..]
    }

    pub fn check_dims(&self, shape_dims: usize) -> Result<()> {
        let expect = [
            ("beta", self.beta.len(), shape_dims),
            ("body", self.body.len(), BODY_JOINTS * 6),
            ("left_hand", self.left_hand.len(), HAND_JOINTS * 6),
            ("right_hand", self.right_hand.len(), HAND_JOINTS * 6),
            ("face", self.face.len(), FACE_DIMS),
        ];
        for (name, got, want) in expect {
            if got != want {
                bail!(Usage, "pose field {name} has {got} values, model expects {want}");
            }
        }
        Ok(())
    }

    pub fn to_tensors(&self) -> PoseTensors {
        let t = |v: &[f64]| Tensor::new(v.to_vec(), &[v.len()]).expect("non-empty pose field");
        PoseTensors {
            beta: (!self.beta.is_empty()).then(|| t(&self.beta)),
            body: t(&self.body),
            left_hand: t(&self.left_hand),
            right_hand: t(&self.right_hand),
            face: t(&self.face),
            global_rotation: t(&self.global_rotation),
            global_translation: t(&self.global_translation),
        }
    }
}

/// Pose parameters as graph tensors; swap any field for a
/// [`Tensor::parameter`] to optimize it.
#[derive(Debug, Clone)]
pub struct PoseTensors {
    pub beta: Option<Tensor>,
    pub body: Tensor,
    pub left_hand: Tensor,
    pub right_hand: Tensor,
    pub face: Tensor,
    pub global_rotation: Tensor,
    pub global_translation: Tensor,
}
