use serde::{Deserialize, Serialize};

use super::camera::OrthoCamera;
use super::keypoints::KeypointSequence;
use crate::bodymodel::{BodyModel, PoseParams, PoseTensors};
use crate::error::{bail, Result};
use crate::numcore::Tensor;

/// Term weights of the refinement loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWeights {
    pub keypoint: f64,
    pub acceleration: f64,
    pub regularization: f64,
}

impl Default for FitWeights {
    fn default() -> Self {
        FitWeights {
            keypoint: 1.0,
            acceleration: 0.5,
            regularization: 0.01,
        }
    }
}

/// A clip to refine: tracker initialization plus 2-D evidence. Keypoint `k`
/// observes model joint `k`.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub init_params: Vec<PoseParams>,
    pub keypoints: KeypointSequence,
    pub camera: OrthoCamera,
    pub weights: FitWeights,
}

impl FitProblem {
    pub fn validate(&self, model: &BodyModel) -> Result<()> {
        let frames = self.init_params.len();
        if frames < 2 {
            bail!(Usage, "fitting needs at least 2 frames, got {frames}");
        }
        if self.keypoints.n_frames() != frames {
            bail!(
                Usage,
                "{} keypoint frames for {frames} initial frames",
                self.keypoints.n_frames()
            );
        }
        if self.keypoints.n_points() != model.n_joints() {
            bail!(
                Usage,
                "{} keypoints per frame but the model has {} joints",
                self.keypoints.n_points(),
                model.n_joints()
            );
        }
        for p in &self.init_params {
            p.check_dims(model.shape_dims())?;
        }
        self.camera.validate()
    }

    pub fn n_frames(&self) -> usize {
        self.init_params.len()
    }
}

/// Fields pulled toward the initialization, with their lengths.
pub(crate) fn regularized_fields(p: &PoseTensors) -> [&Tensor; 6] {
    [
        &p.global_rotation,
        &p.global_translation,
        &p.body,
        &p.left_hand,
        &p.right_hand,
        &p.face,
    ]
}

/// Weighted refinement loss over a whole clip, differentiable in `poses`.
pub fn fit_loss_tensors(
    model: &BodyModel,
    problem: &FitProblem,
    poses: &[PoseTensors],
) -> Result<Tensor> {
    problem.validate(model)?;
    let frames = problem.n_frames();
    if poses.len() != frames {
        bail!(Usage, "{} parameter frames for a {frames}-frame problem", poses.len());
    }
    let nj = model.n_joints();
    let nv = model.n_vertices();
    let w = problem.weights;

    let mut keypoint = Tensor::scalar(0.0);
    let mut vertices = Vec::with_capacity(frames);
    for (pose, observed) in poses.iter().zip(problem.keypoints.frames()) {
        let (verts, joints) = model.lbs_tensor(pose)?;
        let target: Vec<f64> = observed.iter().flat_map(|k| [k.x, k.y]).collect();
        let conf: Vec<f64> = observed.iter().map(|k| k.confidence).collect();
        let residual = problem
            .camera
            .project_tensor(&joints)?
            .sub(&Tensor::new(target, &[nj, 2])?)?;
        let weighted = residual.square().mul(&Tensor::new(conf, &[nj, 1])?)?;
        keypoint = keypoint.add(&weighted.sum())?;
        vertices.push(verts);
    }
    let keypoint = keypoint.scale(1.0 / (frames * nj) as f64);

    let acceleration = if frames >= 3 {
        let mut acc = Tensor::scalar(0.0);
        for t in 1..frames - 1 {
            let second = vertices[t + 1]
                .sub(&vertices[t].scale(2.0))?
                .add(&vertices[t - 1])?;
            acc = acc.add(&second.square().sum())?;
        }
        acc.scale(1.0 / ((frames - 2) * nv) as f64)
    } else {
        Tensor::scalar(0.0)
    };

    let mut reg = Tensor::scalar(0.0);
    let mut count = 0;
    for (pose, init) in poses.iter().zip(&problem.init_params) {
        let init = init.to_tensors();
        for (cur, start) in regularized_fields(pose).into_iter().zip(regularized_fields(&init)) {
            reg = reg.add(&cur.sub(start)?.square().sum())?;
            count += start.numel();
        }
    }
    let reg = reg.scale(1.0 / count as f64);

    keypoint
        .scale(w.keypoint)
        .add(&acceleration.scale(w.acceleration))?
        .add(&reg.scale(w.regularization))
}

pub fn fit_loss(model: &BodyModel, problem: &FitProblem, params: &[PoseParams]) -> Result<Tensor> {
    for p in params {
        p.check_dims(model.shape_dims())?;
    }
    let poses: Vec<PoseTensors> = params.iter().map(PoseParams::to_tensors).collect();
    fit_loss_tensors(model, problem, &poses)
}
