use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::quantizers::LevelSpec;
use crate::types::TokenizerFamily;

/// Discrete bottleneck of a tokenizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuantizerConfig {
    Fsq { levels: LevelSpec },
    /// Learned codebook of `size` entries; `beta` weights the commitment loss.
    Vq { size: usize, beta: f64 },
}

impl QuantizerConfig {
    pub fn codebook_size(&self) -> usize {
        match self {
            QuantizerConfig::Fsq { levels } => levels.codebook_size(),
            QuantizerConfig::Vq { size, .. } => *size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeConfig {
    pub family: TokenizerFamily,
    pub input_dim: usize,
    pub width: usize,
    pub n_res_blocks: usize,
    pub dilation_growth: usize,
    pub downsample_stages: usize,
    pub latent_dim: usize,
    pub quantizer: QuantizerConfig,
}

impl VaeConfig {
    /// Small CPU-friendly network with the family's preset FSQ levels.
    pub fn desk(family: TokenizerFamily) -> VaeConfig {
        VaeConfig {
            family,
            input_dim: family.input_dim(),
            width: 32,
            n_res_blocks: 1,
            dilation_growth: 3,
            downsample_stages: 2,
            latent_dim: 3,
            quantizer: QuantizerConfig::Fsq {
                levels: LevelSpec::preset(family),
            },
        }
    }

    /// Full-size network (~120M parameters).
    pub fn paper(family: TokenizerFamily) -> VaeConfig {
        VaeConfig {
            width: 1024,
            n_res_blocks: 6,
            ..VaeConfig::desk(family)
        }
    }

    /// Same network with a learned codebook of the FSQ preset's size.
    pub fn with_vq(mut self, beta: f64) -> VaeConfig {
        let size = self.quantizer.codebook_size();
        self.quantizer = QuantizerConfig::Vq { size, beta };
        self
    }

    /// Frames per token.
    pub fn window(&self) -> usize {
        1 << self.downsample_stages
    }

    pub fn codebook_size(&self) -> usize {
        self.quantizer.codebook_size()
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim != self.family.input_dim() {
            bail!(
                Usage,
                "{} tokenizer takes {} values per frame, config says {}",
                self.family.name(),
                self.family.input_dim(),
                self.input_dim
            );
        }
        if self.width == 0 || self.latent_dim == 0 || self.dilation_growth == 0 {
            bail!(Usage, "width, latent_dim and dilation_growth must be positive");
        }
        if self.downsample_stages > 8 {
            bail!(Usage, "{} downsample stages is too many", self.downsample_stages);
        }
        match &self.quantizer {
            QuantizerConfig::Fsq { levels } if levels.dims() != self.latent_dim => bail!(
                Usage,
                "FSQ has {} level dims but latent_dim is {}",
                levels.dims(),
                self.latent_dim
            ),
            QuantizerConfig::Vq { size, beta } if *size == 0 || !(beta.is_finite() && *beta >= 0.0) => {
                bail!(Usage, "VQ needs a non-empty codebook and finite beta ≥ 0")
            }
            _ => Ok(()),
        }
    }
}
