use serde::{Deserialize, Serialize};

use crate::bodymodel::mirror_6d;
use crate::error::{bail, Result};
use crate::numcore::Tensor;
use crate::types::Modality;

/// `T × D` motion parameters for one modality, row-major by frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionSequence {
    pub modality: Modality,
    pub fps: f64,
    frames: Vec<f64>,
}

impl MotionSequence {
    pub fn new(modality: Modality, fps: f64, frames: Vec<f64>) -> Result<MotionSequence> {
        let dim = modality.frame_dim();
        if frames.len() % dim != 0 {
            bail!(
                Dimension,
                "{} values do not split into {dim}-wide {} frames",
                frames.len(),
                modality.name()
            );
        }
        if !(fps.is_finite() && fps > 0.0) {
            bail!(Usage, "fps must be positive, got {fps}");
        }
        if let Some(i) = frames.iter().position(|v| !v.is_finite()) {
            bail!(Data, "frame value {i} is not finite");
        }
        Ok(MotionSequence { modality, fps, frames })
    }

    pub fn dim(&self) -> usize {
        self.modality.frame_dim()
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len() / self.dim()
    }

    pub fn frames(&self) -> &[f64] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let d = self.dim();
        &self.frames[t * d..(t + 1) * d]
    }

    /// First `n` frames.
    pub fn truncated(&self, n: usize) -> MotionSequence {
        let n = n.min(self.n_frames());
        MotionSequence {
            modality: self.modality,
            fps: self.fps,
            frames: self.frames[..n * self.dim()].to_vec(),
        }
    }

    /// Hand sequence reflected to the other side; other modalities unchanged.
    pub fn mirrored(&self, modality: Modality) -> MotionSequence {
        let frames = if matches!(self.modality, Modality::LeftHand | Modality::RightHand) {
            self.frames.chunks_exact(6).flat_map(mirror_6d).collect()
        } else {
            self.frames.clone()
        };
        MotionSequence {
            modality,
            fps: self.fps,
            frames,
        }
    }

    /// `[D × T]` channels-first tensor, right-padded to `len` frames by
    /// repeating the last frame.
    pub fn to_channels(&self, len: usize) -> Result<Tensor> {
        let (d, t) = (self.dim(), self.n_frames());
        if t == 0 || len == 0 {
            bail!(Usage, "cannot lay out an empty sequence");
        }
        let mut data = Vec::with_capacity(d * len);
        for c in 0..d {
            data.extend((0..len).map(|i| self.frames[i.min(t - 1) * d + c]));
        }
        Tensor::new(data, &[d, len])
    }

    pub(crate) fn from_channels(modality: Modality, fps: f64, x: &Tensor) -> Result<MotionSequence> {
        let (d, t) = match *x.shape() {
            [d, t] => (d, t),
            _ => bail!(Dimension, "expected [D×T] output, got {:?}", x.shape()),
        };
        let data = x.data();
        let frames = (0..t)
            .flat_map(|i| (0..d).map(move |c| data[c * t + i]))
            .collect();
        MotionSequence::new(modality, fps, frames)
    }
}
