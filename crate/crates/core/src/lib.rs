//! Discrete multi-modal motion tokenization.
//!
//! Building blocks, bottom-up:
//!
//! * [`numcore`]: a small reverse-mode autodiff core (f64) with Adam.
//! * [`quantizers`]: finite scalar quantization, a baseline vector quantizer,
//!   mixed-radix token packing and codebook utilization statistics.
//! * [`bodymodel`]: an upper-body parametric mesh model with 6D rotations,
//!   blendshapes, linear blend skinning, neck blending and rigid teeth.
//! * [`fitting`]: sequence refinement of pose parameters against 2-D keypoints.
//! * [`motionvae`]: per-modality convolutional tokenizers.
//! * [`tokencodec`]: joint vocabulary, token documents, greedy multi-head
//!   decoding, and recognition preprocessing.
//! * [`metrics`]: DTW, Procrustes-aligned joint errors, BLEU-4, ROUGE-L.

pub mod bodymodel;
pub mod error;
pub mod fitting;
pub mod metrics;
pub mod motionvae;
pub mod numcore;
pub mod quantizers;
pub mod tokencodec;
pub mod types;

pub use error::{Error, Result};
pub use types::{Modality, TokenizerFamily};
