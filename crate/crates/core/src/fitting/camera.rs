use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::numcore::Tensor;

/// Orthographic camera: `(x, y, z) ↦ scale·(x, y) + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthoCamera {
    pub scale: f64,
    pub offset: [f64; 2],
}

impl Default for OrthoCamera {
    fn default() -> Self {
        OrthoCamera {
            scale: 1.0,
            offset: [0.0; 2],
        }
    }
}

impl OrthoCamera {
    pub fn new(scale: f64, offset: [f64; 2]) -> Result<OrthoCamera> {
        let cam = OrthoCamera { scale, offset };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            bail!(Usage, "camera scale must be finite and positive, got {}", self.scale);
        }
        if self.offset.iter().any(|o| !o.is_finite()) {
            bail!(Usage, "camera offset must be finite, got {:?}", self.offset);
        }
        Ok(())
    }

    pub fn project(&self, p: &[f64; 3]) -> [f64; 2] {
        [
            self.scale * p[0] + self.offset[0],
            self.scale * p[1] + self.offset[1],
        ]
    }

    /// `[K × 3]` points to `[K × 2]` image coordinates.
    pub fn project_tensor(&self, points: &Tensor) -> Result<Tensor> {
        let k = match *points.shape() {
            [k, 3] => k,
            _ => bail!(Dimension, "expected [K×3] points, got {:?}", points.shape()),
        };
        let idx: Vec<usize> = (0..k).flat_map(|i| [3 * i, 3 * i + 1]).collect();
        let offset = Tensor::new(self.offset.to_vec(), &[2])?;
        points.gather(&idx, &[k, 2])?.scale(self.scale).add(&offset)
    }
}

pub fn project_orthographic(points: &[[f64; 3]], camera: &OrthoCamera) -> Vec<[f64; 2]> {
    points.iter().map(|p| camera.project(p)).collect()
}
