use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::camera::OrthoCamera;
use super::keypoints::{Keypoint, KeypointSequence};
use super::problem::{FitProblem, FitWeights};
use crate::bodymodel::{matrix_to_rot6d, BodyModel, PoseParams};
use crate::error::Result;

pub const TOY_FIT_FRAMES: usize = 6;

fn axis_angle_6d(axis: [f64; 3], angle: f64) -> [f64; 6] {
    let r = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle);
    matrix_to_rot6d(r.matrix())
}

/// Smooth ground-truth clip for the toy model: the torso turns, the neck
/// nods and the shoulder lifts at constant angular rates.
pub fn toy_ground_truth(model: &BodyModel) -> Vec<PoseParams> {
    (0..TOY_FIT_FRAMES)
        .map(|t| {
            let s = t as f64 / (TOY_FIT_FRAMES - 1) as f64;
            let mut p = model.neutral_params();
            p.global_rotation = axis_angle_6d([0.0, 1.0, 0.0], 0.2 * s);
            p.global_translation = [0.05 * s, 0.0, 0.0];
            p.body[..6].copy_from_slice(&axis_angle_6d([1.0, 0.0, 0.3], 0.3 * s));
            p.body[6..12].copy_from_slice(&axis_angle_6d([0.0, 0.2, 1.0], 0.5 * s));
            p
        })
        .collect()
}

/// Keypoints observed from `truth` through `camera`, all at full confidence.
pub fn observe(model: &BodyModel, truth: &[PoseParams], camera: &OrthoCamera) -> Result<KeypointSequence> {
    let frames = truth
        .iter()
        .map(|p| {
            let joints = model.lbs_forward(p)?.joints;
            Ok(joints
                .iter()
                .map(|j| {
                    let [x, y] = camera.project(j);
                    Keypoint { x, y, confidence: 1.0 }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    KeypointSequence::new(frames)
}

/// The ground-truth clip observed exactly, initialized with seeded noise of
/// size `perturbation` on global motion and the two driven body joints.
pub fn toy_fit_problem(model: &BodyModel, seed: u64, perturbation: f64) -> Result<FitProblem> {
    let truth = toy_ground_truth(model);
    let camera = OrthoCamera::new(1.0, [0.0, 0.0])?;
    let keypoints = observe(model, &truth, &camera)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init_params = truth
        .iter()
        .map(|p| {
            let mut q = p.clone();
            let mut jitter = |v: &mut [f64]| {
                for x in v {
                    *x += perturbation * rng.random_range(-1.0..1.0);
                }
            };
            jitter(&mut q.global_rotation);
            jitter(&mut q.global_translation);
            jitter(&mut q.body[..12]);
            q
        })
        .collect();
    Ok(FitProblem {
        init_params,
        keypoints,
        camera,
        weights: FitWeights::default(),
    })
}
