//! Per-modality convolutional tokenizers.
//!
//! A [`Vae`] compresses `w = 2^stages` frames of motion into one latent
//! vector, quantizes it (FSQ or a learned VQ codebook) and decodes it back.
//! Body, hand and face each get their own network; both hands share one by
//! reflecting left-hand input onto the right.

mod checkpoint;
mod config;
mod data;
mod motionfile;
mod network;
mod sequence;
mod tokenize;
mod train;

#[cfg(test)]
mod tests;

pub use checkpoint::{load_vae, save_vae, vae_from_json, vae_to_json, CHECKPOINT_VERSION};
pub use config::{QuantizerConfig, VaeConfig};
pub use data::{face_dataset, sinusoid_dataset, FaceGenerator, FIXTURE_FPS};
pub use motionfile::{
    load_motion, motion_from_bytes, motion_from_json, motion_to_bytes, motion_to_json, save_motion,
    MOTION_MAGIC, MOTION_VERSION,
};
pub use network::{residual_block, Vae};
pub use sequence::MotionSequence;
pub use train::{train, Rounding, TrainOptions, TrainReport};
