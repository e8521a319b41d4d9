//! Upper-body parametric mesh model.
//!
//! A [`BodyModel`] maps [`PoseParams`] to a posed mesh: blendshape offsets on
//! a template, joints regressed from the shaped mesh, 6D local rotations
//! chained down the kinematic tree, and linear blend skinning. Neck-ring
//! vertices mix body and head skinning; teeth follow their joint rigidly.

mod io;
mod model;
mod params;
mod rotation;
mod toy;


pub use io::{
    body_model_to_json, load_body_model, parse_body_model, save_body_model, ArrayField,
    BodyModelFile, TeethField, FORMAT_VERSION,
};
pub use model::{BodyModel, BodyModelParts, JointSlot, LbsOutput};
pub use params::{
    PoseParams, PoseTensors, BODY_JOINTS, EXPRESSION_DIMS, EYELID_DIMS, FACE_DIMS, HAND_JOINTS,
};
pub use rotation::{
    matrix_to_rot6d, mirror_hand_pose, rot6d_tensor, rot6d_to_matrix, IDENTITY_6D,
};
pub(crate) use rotation::mirror_6d;
pub use toy::{toy_body_model, TOY_FACE_SHAPE_DIMS, TOY_SHAPE_DIMS};
