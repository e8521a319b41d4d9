use super::network::Vae;
use super::sequence::MotionSequence;
use crate::error::{bail, Result};
use crate::numcore::Tensor;
use crate::quantizers::TokenStream;
use crate::types::Modality;

impl Vae {
    fn check_modality(&self, modality: Modality) -> Result<()> {
        if !self.config().family.accepts(modality) {
            bail!(
                Usage,
                "{} tokenizer cannot handle {} motion",
                self.config().family.name(),
                modality.name()
            );
        }
        Ok(())
    }

    /// Input as the network sees it: left hands reflected onto the right.
    fn canonical_input(&self, x: &MotionSequence) -> Result<MotionSequence> {
        self.check_modality(x.modality)?;
        Ok(match x.modality {
            Modality::LeftHand => x.mirrored(Modality::RightHand),
            _ => x.clone(),
        })
    }

    /// Continuous latents, one row of `latent_dim` values per window. A
    /// trailing partial window is filled by repeating the last frame.
    pub fn encode(&self, x: &MotionSequence) -> Result<Vec<Vec<f64>>> {
        let w = self.config().window();
        let t = x.n_frames();
        if t < w {
            bail!(Usage, "need at least {w} frames to encode, got {t}");
        }
        let x = self.canonical_input(x)?;
        let z = self.encode_with(&x.to_channels(t.div_ceil(w) * w)?, &self.constants())?;
        Ok(rows(&z))
    }

    /// Token per complete window; trailing `T mod w` frames are dropped so
    /// that detokenizing returns exactly `⌊T/w⌋·w` frames.
    pub fn tokenize(&self, x: &MotionSequence) -> Result<TokenStream> {
        let w = self.config().window();
        let t = x.n_frames();
        if t < w {
            bail!(Usage, "need at least {w} frames to tokenize, got {t}");
        }
        let x_can = self.canonical_input(x)?;
        let weights = self.constants();
        let z = self.encode_with(&x_can.to_channels(t / w * w)?, &weights)?;
        let q = self.quantize_with(&z, &weights)?;
        Ok(TokenStream::new(x.modality, "", q.indices))
    }

    /// Decode a token stream into `w` frames per token, reflecting left
    /// hands back.
    pub fn detokenize(&self, stream: &TokenStream, fps: f64) -> Result<MotionSequence> {
        self.check_modality(stream.modality)?;
        let size = self.config().codebook_size();
        if let Some(bad) = stream.indices.iter().find(|&&i| i >= size) {
            bail!(Data, "token {bad} outside codebook of {size}");
        }
        if stream.indices.is_empty() {
            bail!(Usage, "cannot decode an empty token stream");
        }
        let weights = self.constants();
        let y = self.decode_with(&self.dequantize(&stream.indices, &weights)?, &weights)?;
        let canonical = self.config().family.canonical_modality();
        let out = MotionSequence::from_channels(canonical, fps, &y)?;
        Ok(match stream.modality {
            Modality::LeftHand => out.mirrored(Modality::LeftHand),
            _ => out,
        })
    }

    /// Decoded reconstruction of `x` through the quantizer.
    pub fn reconstruct(&self, x: &MotionSequence) -> Result<MotionSequence> {
        let stream = self.tokenize(x)?;
        self.detokenize(&stream, x.fps)
    }
}

fn rows(z: &Tensor) -> Vec<Vec<f64>> {
    let (d, n) = (z.shape()[0], z.shape()[1]);
    (0..n)
        .map(|j| (0..d).map(|i| z.data()[i * n + j]).collect())
        .collect()
}
