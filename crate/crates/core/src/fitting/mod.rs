//! Refinement of per-frame pose parameters against 2-D keypoints.
//!
//! The loss mixes confidence-weighted reprojection error of the model
//! joints, vertex acceleration, and a pull toward the tracker
//! initialization. [`refine_sequence`] minimizes it with Adam.

mod camera;
mod fixture;
mod keypoints;
mod problem;
mod refine;


pub use camera::{project_orthographic, OrthoCamera};
pub use fixture::{observe, toy_fit_problem, toy_ground_truth, TOY_FIT_FRAMES};
pub use keypoints::{Keypoint, KeypointSequence};
pub use problem::{fit_loss, fit_loss_tensors, FitProblem, FitWeights};
pub use refine::{refine_sequence, FitResult};
