use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::params::{
    PoseParams, PoseTensors, BODY_JOINTS, EXPRESSION_DIMS, EYELID_DIMS, FACE_DIMS, HAND_JOINTS,
};
use crate::error::{bail, Error, Result};
use crate::numcore::Tensor;

const ROW_SUM_TOL: f64 = 1e-6;
const NECK_RATIO_RANGE: (f64, f64) = (0.1, 0.9);

/// Which pose field drives a joint's local rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum JointSlot {
    /// Global orientation.
    Root,
    Body(usize),
    LeftHand(usize),
    RightHand(usize),
    Jaw,
}

impl JointSlot {
    /// Layout used when a 42-joint file omits `joint_slots`.
    pub fn full_layout() -> Vec<JointSlot> {
        let mut slots = vec![JointSlot::Root];
        slots.extend((0..BODY_JOINTS).map(JointSlot::Body));
        slots.push(JointSlot::Jaw);
        slots.extend((0..HAND_JOINTS).map(JointSlot::LeftHand));
        slots.extend((0..HAND_JOINTS).map(JointSlot::RightHand));
        slots
    }
}

impl fmt::Display for JointSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JointSlot::Root => write!(f, "root"),
            JointSlot::Body(i) => write!(f, "body:{i}"),
            JointSlot::LeftHand(i) => write!(f, "left_hand:{i}"),
            JointSlot::RightHand(i) => write!(f, "right_hand:{i}"),
            JointSlot::Jaw => write!(f, "jaw"),
        }
    }
}

impl FromStr for JointSlot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("unknown joint slot {s:?}"));
        match s.split_once(':') {
            None if s == "root" => Ok(JointSlot::Root),
            None if s == "jaw" => Ok(JointSlot::Jaw),
            None => Err(bad()),
            Some((kind, idx)) => {
                let i: usize = idx.parse().map_err(|_| bad())?;
                let (slot, limit) = match kind {
                    "body" => (JointSlot::Body(i), BODY_JOINTS),
                    "left_hand" => (JointSlot::LeftHand(i), HAND_JOINTS),
                    "right_hand" => (JointSlot::RightHand(i), HAND_JOINTS),
                    _ => return Err(bad()),
                };
                if i >= limit {
                    return Err(bad());
                }
                Ok(slot)
            }
        }
    }
}

impl From<JointSlot> for String {
    fn from(s: JointSlot) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for JointSlot {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Raw model arrays, all row-major. Bases are `[N_v·3 × K]` so that a
/// coefficient vector maps to flat vertex offsets by one product.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyModelParts {
    pub n_vertices: usize,
    pub n_joints: usize,
    pub template: Vec<f64>,
    pub shape_dirs: Vec<f64>,
    pub n_shape: usize,
    /// Leading shape columns that belong to the head; the rest are body
    /// shape and are zeroed on `face_vertices`.
    pub n_face_shape: usize,
    pub pose_dirs: Vec<f64>,
    pub n_pose: usize,
    pub expr_dirs: Vec<f64>,
    pub eyelid_dirs: Vec<f64>,
    pub joint_regressor: Vec<f64>,
    pub blend_weights: Vec<f64>,
    pub parents: Vec<i64>,
    /// (vertex, share of body skinning).
    pub neck_ring: Vec<(usize, f64)>,
    /// Head-side skinning row for each neck-ring vertex.
    pub face_weights: Vec<Vec<f64>>,
    pub face_vertices: Vec<usize>,
    /// (vertex, joint) for rigid teeth.
    pub teeth: Vec<(usize, usize)>,
    pub joint_slots: Vec<JointSlot>,
}

/// Validated, immutable parametric mesh model.
#[derive(Debug, Clone)]
pub struct BodyModel {
    parts: BodyModelParts,
    face_shape: Option<Arc<[f64]>>,
    body_shape: Option<Arc<[f64]>>,
    skin_weights: Arc<[f64]>,
    template: Arc<[f64]>,
    expr_dirs: Arc<[f64]>,
    eyelid_dirs: Arc<[f64]>,
    pose_dirs: Arc<[f64]>,
    joint_regressor: Arc<[f64]>,
}

/// Posed mesh and joint positions.
#[derive(Debug, Clone, PartialEq)]
pub struct LbsOutput {
    pub vertices: Vec<[f64; 3]>,
    pub joints: Vec<[f64; 3]>,
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        bail!(Load, "{name} holds {got} values, expected {want}");
    }
    Ok(())
}

fn check_weight_row(what: &str, row: &[f64]) -> Result<()> {
    if let Some(w) = row.iter().find(|w| !(**w >= 0.0)) {
        bail!(Load, "{what} has negative or non-finite weight {w}");
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        bail!(Load, "blend weights row sum is {sum} for {what}, expected 1");
    }
    Ok(())
}

fn to_points(flat: &[f64]) -> Vec<[f64; 3]> {
    flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

impl BodyModel {
    pub fn new(parts: BodyModelParts) -> Result<BodyModel> {
        let nv = parts.n_vertices;
        let nj = parts.n_joints;
        if nv == 0 || nj == 0 {
            bail!(Load, "model needs at least one vertex and one joint");
        }
        check_len("template", parts.template.len(), nv * 3)?;
        check_len("shape_dirs", parts.shape_dirs.len(), nv * 3 * parts.n_shape)?;
        check_len("pose_dirs", parts.pose_dirs.len(), nv * 3 * parts.n_pose)?;
        check_len("expr_dirs", parts.expr_dirs.len(), nv * 3 * EXPRESSION_DIMS)?;
        check_len("eyelid_dirs", parts.eyelid_dirs.len(), nv * 3 * EYELID_DIMS)?;
        check_len("joint_regressor", parts.joint_regressor.len(), nj * nv)?;
        check_len("blend_weights", parts.blend_weights.len(), nv * nj)?;
        check_len("parents", parts.parents.len(), nj)?;
        check_len("joint_slots", parts.joint_slots.len(), nj)?;
        if parts.n_face_shape > parts.n_shape {
            bail!(Load, "n_face_shape {} exceeds shape dims {}", parts.n_face_shape, parts.n_shape);
        }
        if parts.n_pose != 0 && parts.n_pose != 9 * (nj - 1) {
            bail!(
                Load,
                "pose_dirs has {} columns, expected 0 or {} (9 per non-root joint)",
                parts.n_pose,
                9 * (nj - 1)
            );
        }

        if parts.parents[0] != -1 {
            bail!(Load, "parents must form a tree rooted at joint 0 (parents[0] = {})", parts.parents[0]);
        }
        for (j, &p) in parts.parents.iter().enumerate().skip(1) {
            if p < 0 || p as usize >= j {
                bail!(Load, "parents must form a tree rooted at joint 0: joint {j} has parent {p}");
            }
        }
        if parts.joint_slots[0] != JointSlot::Root {
            bail!(Load, "joint 0 must use the root slot");
        }
        for (j, s) in parts.joint_slots.iter().enumerate() {
            if j > 0 && *s == JointSlot::Root {
                bail!(Load, "only joint 0 may use the root slot (joint {j})");
            }
            if parts.joint_slots[..j].contains(s) {
                bail!(Load, "joint slot {s} is used twice");
            }
        }

        for (v, row) in parts.blend_weights.chunks_exact(nj).enumerate() {
            check_weight_row(&format!("vertex {v}"), row)?;
        }
        if parts.face_weights.len() != parts.neck_ring.len() {
            bail!(
                Load,
                "{} neck ring vertices but {} face weight rows",
                parts.neck_ring.len(),
                parts.face_weights.len()
            );
        }
        for (&(v, ratio), row) in parts.neck_ring.iter().zip(&parts.face_weights) {
            if v >= nv {
                bail!(Load, "neck ring vertex {v} out of range");
            }
            let (lo, hi) = NECK_RATIO_RANGE;
            if !(lo..=hi).contains(&ratio) {
                bail!(Load, "neck ring ratio {ratio} at vertex {v} outside [{lo}, {hi}]");
            }
            check_len("face weight row", row.len(), nj)?;
            check_weight_row(&format!("neck ring vertex {v} face weights"), row)?;
        }
        for &(v, j) in &parts.teeth {
            if v >= nv || j >= nj {
                bail!(Load, "teeth entry ({v}, {j}) out of range");
            }
        }
        if let Some(v) = parts.face_vertices.iter().find(|&&v| v >= nv) {
            bail!(Load, "face vertex {v} out of range");
        }

        let mut skin = parts.blend_weights.clone();
        for (&(v, ratio), face_row) in parts.neck_ring.iter().zip(&parts.face_weights) {
            for (j, fw) in face_row.iter().enumerate() {
                let w = &mut skin[v * nj + j];
                *w = ratio * *w + (1.0 - ratio) * fw;
            }
        }
        for &(v, j) in &parts.teeth {
            let row = &mut skin[v * nj..(v + 1) * nj];
            row.fill(0.0);
            row[j] = 1.0;
        }

        let (s, nf) = (parts.n_shape, parts.n_face_shape);
        let column_block = |lo: usize, hi: usize, masked: &[usize]| -> Option<Arc<[f64]>> {
            (hi > lo).then(|| {
                let mut out = Vec::with_capacity(nv * 3 * (hi - lo));
                for r in 0..nv * 3 {
                    let zero = masked.contains(&(r / 3));
                    out.extend(parts.shape_dirs[r * s + lo..r * s + hi].iter().map(|&x| if zero { 0.0 } else { x }));
                }
                out.into()
            })
        };
        let face_shape = column_block(0, nf, &[]);
        let body_shape = column_block(nf, s, &parts.face_vertices);

        Ok(BodyModel {
            face_shape,
            body_shape,
            skin_weights: skin.into(),
            template: parts.template.clone().into(),
            expr_dirs: parts.expr_dirs.clone().into(),
            eyelid_dirs: parts.eyelid_dirs.clone().into(),
            pose_dirs: parts.pose_dirs.clone().into(),
            joint_regressor: parts.joint_regressor.clone().into(),
            parts,
        })
    }

    pub fn parts(&self) -> &BodyModelParts {
        &self.parts
    }

    pub fn n_vertices(&self) -> usize {
        self.parts.n_vertices
    }

    pub fn n_joints(&self) -> usize {
        self.parts.n_joints
    }

    pub fn shape_dims(&self) -> usize {
        self.parts.n_shape
    }

    pub fn template(&self) -> Vec<[f64; 3]> {
        to_points(&self.parts.template)
    }

    pub fn parents(&self) -> &[i64] {
        &self.parts.parents
    }

    pub fn joint_slots(&self) -> &[JointSlot] {
        &self.parts.joint_slots
    }

    /// Skinning weights after neck blending and teeth rigging, `[N_v × N_j]`.
    pub fn skin_weights(&self) -> &[f64] {
        &self.skin_weights
    }

    pub fn neutral_params(&self) -> PoseParams {
        PoseParams::neutral(self.parts.n_shape)
    }

    fn constant(&self, data: &Arc<[f64]>, shape: &[usize]) -> Tensor {
        Tensor::from_shared(Arc::clone(data), shape, false).expect("validated model extents")
    }

    fn check_pose(&self, pose: &PoseTensors) -> Result<()> {
        let beta_len = pose.beta.as_ref().map_or(0, |b| b.numel());
        let fields = [
            ("beta", beta_len, self.parts.n_shape),
            ("body", pose.body.numel(), BODY_JOINTS * 6),
            ("left_hand", pose.left_hand.numel(), HAND_JOINTS * 6),
            ("right_hand", pose.right_hand.numel(), HAND_JOINTS * 6),
            ("face", pose.face.numel(), FACE_DIMS),
            ("global_rotation", pose.global_rotation.numel(), 6),
            ("global_translation", pose.global_translation.numel(), 3),
        ];
        for (name, got, want) in fields {
            if got != want {
                bail!(Usage, "pose field {name} has {got} values, model expects {want}");
            }
        }
        Ok(())
    }

    fn joint_rotation_6d(&self, slot: JointSlot, pose: &PoseTensors) -> Result<Tensor> {
        let six = |t: &Tensor, start: usize| {
            let idx: Vec<usize> = (start..start + 6).collect();
            t.gather(&idx, &[6])
        };
        match slot {
            JointSlot::Root => Ok(pose.global_rotation.clone()),
            JointSlot::Body(i) => six(&pose.body, i * 6),
            JointSlot::LeftHand(i) => six(&pose.left_hand, i * 6),
            JointSlot::RightHand(i) => six(&pose.right_hand, i * 6),
            JointSlot::Jaw => six(&pose.face, EXPRESSION_DIMS + EYELID_DIMS),
        }
    }

    /// Flat `[N_v·3]` mesh before pose-corrective offsets.
    fn shaped_tensor(&self, pose: &PoseTensors) -> Result<Tensor> {
        let nv3 = self.parts.n_vertices * 3;
        let nf = self.parts.n_face_shape;
        let ns = self.parts.n_shape;
        let mut mesh = self.constant(&self.template, &[nv3]);
        let term = |basis: &Arc<[f64]>, coeffs: &Tensor| -> Result<Tensor> {
            let k = coeffs.numel();
            self.constant(basis, &[nv3, k])
                .matmul(&coeffs.reshape(&[k, 1])?)?
                .reshape(&[nv3])
        };
        let beta_slice = |lo: usize, hi: usize| -> Result<Tensor> {
            let beta = pose.beta.as_ref().expect("checked shape dims");
            beta.gather(&(lo..hi).collect::<Vec<_>>(), &[hi - lo])
        };
        if let Some(basis) = &self.face_shape {
            mesh = mesh.add(&term(basis, &beta_slice(0, nf)?)?)?;
        }
        let expr = pose.face.gather(&(0..EXPRESSION_DIMS).collect::<Vec<_>>(), &[EXPRESSION_DIMS])?;
        mesh = mesh.add(&term(&self.expr_dirs, &expr)?)?;
        let eyelid = pose
            .face
            .gather(&[EXPRESSION_DIMS, EXPRESSION_DIMS + 1], &[EYELID_DIMS])?;
        mesh = mesh.add(&term(&self.eyelid_dirs, &eyelid)?)?;
        if let Some(basis) = &self.body_shape {
            mesh = mesh.add(&term(basis, &beta_slice(nf, ns)?)?)?;
        }
        Ok(mesh)
    }

    fn rotations(&self, pose: &PoseTensors) -> Result<Vec<Tensor>> {
        self.parts
            .joint_slots
            .iter()
            .map(|&slot| super::rotation::rot6d_tensor(&self.joint_rotation_6d(slot, pose)?))
            .collect()
    }

    fn check_rotations(&self, rotations: &[Tensor]) -> Result<()> {
        for (j, r) in rotations.iter().enumerate() {
            if r.data().iter().any(|x| !x.is_finite()) {
                bail!(
                    Numeric,
                    "joint {j} ({}) has a degenerate 6D rotation",
                    self.parts.joint_slots[j]
                );
            }
        }
        Ok(())
    }

    fn pose_offsets(&self, rotations: &[Tensor]) -> Result<Option<Tensor>> {
        if self.parts.n_pose == 0 {
            return Ok(None);
        }
        let eye = Tensor::new(
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            &[3, 3],
        )?;
        let feats: Vec<Tensor> = rotations[1..]
            .iter()
            .map(|r| r.sub(&eye)?.reshape(&[9]))
            .collect::<Result<_>>()?;
        let refs: Vec<&Tensor> = feats.iter().collect();
        let feat = Tensor::concat(&refs, 0)?.reshape(&[self.parts.n_pose, 1])?;
        let nv3 = self.parts.n_vertices * 3;
        Ok(Some(
            self.constant(&self.pose_dirs, &[nv3, self.parts.n_pose])
                .matmul(&feat)?
                .reshape(&[nv3])?,
        ))
    }

    /// Rest-pose mesh with shape, expression, eyelid and pose-corrective
    /// offsets, `[N_v × 3]`.
    pub fn rest_pose_tensor(&self, pose: &PoseTensors) -> Result<Tensor> {
        self.check_pose(pose)?;
        let rotations = self.rotations(pose)?;
        self.check_rotations(&rotations)?;
        let mut mesh = self.shaped_tensor(pose)?;
        if let Some(offsets) = self.pose_offsets(&rotations)? {
            mesh = mesh.add(&offsets)?;
        }
        mesh.reshape(&[self.parts.n_vertices, 3])
    }

    pub fn rest_pose_mesh(&self, params: &PoseParams) -> Result<Vec<[f64; 3]>> {
        params.check_dims(self.parts.n_shape)?;
        Ok(to_points(self.rest_pose_tensor(&params.to_tensors())?.data()))
    }

    /// Differentiable skinning. Returns vertices `[N_v × 3]` and joints
    /// `[N_j × 3]`.
    pub fn lbs_tensor(&self, pose: &PoseTensors) -> Result<(Tensor, Tensor)> {
        self.check_pose(pose)?;
        let nv = self.parts.n_vertices;
        let nj = self.parts.n_joints;
        let rotations = self.rotations(pose)?;
        self.check_rotations(&rotations)?;

        let shaped = self.shaped_tensor(pose)?;
        let regressor = self.constant(&self.joint_regressor, &[nj, nv]);
        let rest_joints = regressor.matmul(&shaped.reshape(&[nv, 3])?)?;
        let mut rest = shaped;
        if let Some(offsets) = self.pose_offsets(&rotations)? {
            rest = rest.add(&offsets)?;
        }
        let rest = rest.reshape(&[nv, 3])?;

        let eye = Tensor::new(
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            &[3, 3],
        )?;
        let translation = pose.global_translation.reshape(&[3, 1])?;
        let mut world_rot: Vec<Tensor> = Vec::with_capacity(nj);
        let mut world_shift: Vec<Tensor> = Vec::with_capacity(nj);
        let mut posed_joints = Vec::with_capacity(nj);
        let mut rows = Vec::with_capacity(nj);
        for (j, local) in rotations.iter().enumerate() {
            let joint = rest_joints.gather(&[3 * j, 3 * j + 1, 3 * j + 2], &[3, 1])?;
            // shift that makes `local` pivot about the joint
            let pivot = joint.sub(&local.matmul(&joint)?)?;
            let (rot, shift) = if j == 0 {
                (local.clone(), translation.add(&pivot)?)
            } else {
                let p = self.parts.parents[j] as usize;
                (
                    world_rot[p].matmul(local)?,
                    world_shift[p].add(&world_rot[p].matmul(&pivot)?)?,
                )
            };
            posed_joints.push(rot.matmul(&joint)?.add(&shift)?.reshape(&[1, 3])?);
            rows.push(Tensor::concat(
                &[&rot.sub(&eye)?.reshape(&[1, 9])?, &shift.reshape(&[1, 3])?],
                1,
            )?);
            world_rot.push(rot);
            world_shift.push(shift);
        }
        let row_refs: Vec<&Tensor> = rows.iter().collect();
        let per_joint = Tensor::concat(&row_refs, 0)?;
        let blended = self
            .constant(&self.skin_weights, &[nv, nj])
            .matmul(&per_joint)?;

        let column = |t: &Tensor, width: usize, k: usize| {
            t.gather(&(0..nv).map(|i| i * width + k).collect::<Vec<_>>(), &[nv, 1])
        };
        let coords: Vec<Tensor> = (0..3).map(|c| column(&rest, 3, c)).collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(3);
        for r in 0..3 {
            let mut acc = coords[r].clone();
            for (c, coord) in coords.iter().enumerate() {
                acc = acc.add(&column(&blended, 12, 3 * r + c)?.mul(coord)?)?;
            }
            out.push(acc.add(&column(&blended, 12, 9 + r)?)?);
        }
        let vertices = Tensor::concat(&[&out[0], &out[1], &out[2]], 1)?;
        let joint_refs: Vec<&Tensor> = posed_joints.iter().collect();
        Ok((vertices, Tensor::concat(&joint_refs, 0)?))
    }

    pub fn lbs_forward(&self, params: &PoseParams) -> Result<LbsOutput> {
        params.check_dims(self.parts.n_shape)?;
        let (vertices, joints) = self.lbs_tensor(&params.to_tensors())?;
        Ok(LbsOutput {
            vertices: to_points(vertices.data()),
            joints: to_points(joints.data()),
        })
    }
}
