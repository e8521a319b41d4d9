use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{BodyModel, BodyModelParts, JointSlot};
use super::params::{EXPRESSION_DIMS, EYELID_DIMS};
use crate::error::{bail, Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Dense array with its extents listed ahead of the values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayField {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl ArrayField {
    fn new(shape: Vec<usize>, data: Vec<f64>) -> ArrayField {
        ArrayField { shape, data }
    }

    fn expect(self, name: &str, shape: &[usize]) -> Result<Vec<f64>> {
        if self.shape != shape {
            bail!(Load, "{name} declares shape {:?}, expected {shape:?}", self.shape);
        }
        let n: usize = shape.iter().product();
        if self.data.len() != n {
            bail!(Load, "{name} declares {n} values but holds {}", self.data.len());
        }
        Ok(self.data)
    }

    fn trailing_extent(&self, name: &str, lead: &[usize]) -> Result<usize> {
        if self.shape.len() != lead.len() + 1 || self.shape[..lead.len()] != *lead {
            bail!(Load, "{name} declares shape {:?}, expected {lead:?} + [K]", self.shape);
        }
        Ok(self.shape[lead.len()])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeethField {
    pub vertices: Vec<usize>,
    pub joints: Vec<usize>,
}

/// On-disk layout of a body model (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyModelFile {
    pub version: u32,
    pub n_vertices: usize,
    pub n_joints: usize,
    pub template: ArrayField,
    pub shape_dirs: ArrayField,
    pub pose_dirs: ArrayField,
    pub expr_dirs: ArrayField,
    pub eyelid_dirs: ArrayField,
    pub joint_regressor: ArrayField,
    pub blend_weights: ArrayField,
    pub parents: Vec<i64>,
    pub neck_ring: Vec<(usize, f64)>,
    pub teeth: TeethField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_face_shape: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub face_vertices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_weights: Option<ArrayField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_slots: Option<Vec<JointSlot>>,
}

impl BodyModelFile {
    pub fn from_model(model: &BodyModel) -> BodyModelFile {
        let p = model.parts();
        let (nv, nj) = (p.n_vertices, p.n_joints);
        BodyModelFile {
            version: FORMAT_VERSION,
            n_vertices: nv,
            n_joints: nj,
            template: ArrayField::new(vec![nv, 3], p.template.clone()),
            shape_dirs: ArrayField::new(vec![nv, 3, p.n_shape], p.shape_dirs.clone()),
            pose_dirs: ArrayField::new(vec![nv, 3, p.n_pose], p.pose_dirs.clone()),
            expr_dirs: ArrayField::new(vec![nv, 3, EXPRESSION_DIMS], p.expr_dirs.clone()),
            eyelid_dirs: ArrayField::new(vec![nv, 3, EYELID_DIMS], p.eyelid_dirs.clone()),
            joint_regressor: ArrayField::new(vec![nj, nv], p.joint_regressor.clone()),
            blend_weights: ArrayField::new(vec![nv, nj], p.blend_weights.clone()),
            parents: p.parents.clone(),
            neck_ring: p.neck_ring.clone(),
            teeth: TeethField {
                vertices: p.teeth.iter().map(|t| t.0).collect(),
                joints: p.teeth.iter().map(|t| t.1).collect(),
            },
            n_face_shape: Some(p.n_face_shape),
            face_vertices: p.face_vertices.clone(),
            face_weights: (!p.face_weights.is_empty()).then(|| {
                ArrayField::new(vec![p.face_weights.len(), nj], p.face_weights.concat())
            }),
            joint_slots: Some(p.joint_slots.clone()),
        }
    }

    pub fn into_model(self) -> Result<BodyModel> {
        if self.version != FORMAT_VERSION {
            bail!(Load, "unsupported body model version {}", self.version);
        }
        let (nv, nj) = (self.n_vertices, self.n_joints);
        let n_shape = self.shape_dirs.trailing_extent("shape_dirs", &[nv, 3])?;
        let n_pose = self.pose_dirs.trailing_extent("pose_dirs", &[nv, 3])?;
        let joint_slots = match self.joint_slots {
            Some(slots) => slots,
            None if nj == JointSlot::full_layout().len() => JointSlot::full_layout(),
            None => bail!(Load, "joint_slots is required for a {nj}-joint model"),
        };
        if self.teeth.vertices.len() != self.teeth.joints.len() {
            bail!(
                Load,
                "teeth lists {} vertices but {} joints",
                self.teeth.vertices.len(),
                self.teeth.joints.len()
            );
        }
        let blend_weights = self.blend_weights.expect("blend_weights", &[nv, nj])?;
        let face_weights = match self.face_weights {
            Some(f) => f
                .expect("face_weights", &[self.neck_ring.len(), nj])?
                .chunks(nj)
                .map(<[f64]>::to_vec)
                .collect(),
            // without head-side rows the ring keeps its own weights
            None => self
                .neck_ring
                .iter()
                .map(|&(v, _)| {
                    blend_weights
                        .get(v * nj..(v + 1) * nj)
                        .map(<[f64]>::to_vec)
                        .ok_or_else(|| Error::Load(format!("neck ring vertex {v} out of range")))
                })
                .collect::<Result<_>>()?,
        };
        BodyModel::new(BodyModelParts {
            n_vertices: nv,
            n_joints: nj,
            template: self.template.expect("template", &[nv, 3])?,
            shape_dirs: self.shape_dirs.expect("shape_dirs", &[nv, 3, n_shape])?,
            n_shape,
            n_face_shape: self.n_face_shape.unwrap_or(0),
            pose_dirs: self.pose_dirs.expect("pose_dirs", &[nv, 3, n_pose])?,
            n_pose,
            expr_dirs: self.expr_dirs.expect("expr_dirs", &[nv, 3, EXPRESSION_DIMS])?,
            eyelid_dirs: self.eyelid_dirs.expect("eyelid_dirs", &[nv, 3, EYELID_DIMS])?,
            joint_regressor: self.joint_regressor.expect("joint_regressor", &[nj, nv])?,
            blend_weights,
            parents: self.parents,
            neck_ring: self.neck_ring,
            face_weights,
            face_vertices: self.face_vertices,
            teeth: self.teeth.vertices.into_iter().zip(self.teeth.joints).collect(),
            joint_slots,
        })
    }
}

pub fn parse_body_model(text: &str) -> Result<BodyModel> {
    let file: BodyModelFile = serde_json::from_str(text).map_err(Error::json_parse)?;
    file.into_model()
}

pub fn load_body_model(path: impl AsRef<Path>) -> Result<BodyModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_body_model(&text)
}

pub fn body_model_to_json(model: &BodyModel) -> Result<String> {
    Ok(serde_json::to_string(&BodyModelFile::from_model(model))?)
}

pub fn save_body_model(model: &BodyModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, body_model_to_json(model)?).map_err(|e| Error::io(path, e))
}
