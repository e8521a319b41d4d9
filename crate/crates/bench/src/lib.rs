//! Shared inputs for the benchmarks.

use m3t_core::bodymodel::{toy_body_model, BodyModel, PoseParams};
use m3t_core::fitting::toy_ground_truth;
use m3t_core::metrics::JointSequence;

/// Deterministic pseudo-random values in `[-1, 1)`.
pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

pub fn joint_sequence(frames: usize, joints: usize, seed: u64) -> JointSequence {
    let v = noise(frames * joints * 3, seed);
    JointSequence::new(
        v.chunks_exact(joints * 3)
            .map(|f| f.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect())
            .collect(),
    )
    .expect("finite values")
}

pub fn posed_toy() -> (BodyModel, Vec<PoseParams>) {
    let model = toy_body_model();
    let poses = toy_ground_truth(&model);
    (model, poses)
}
