use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::QuantizerConfig;
use super::network::Vae;
use super::sequence::MotionSequence;
use crate::error::{bail, Result};
use crate::numcore::{adam_step, mse, AdamState, CosineSchedule, Parameter, Tensor};
use crate::quantizers::{decoder_input, fsq_bound_tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    pub min_lr: f64,
    pub warmup_epochs: usize,
    /// Drives the per-epoch shuffle.
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: 50,
            batch_size: 16,
            base_lr: 2e-3,
            min_lr: 1e-5,
            warmup_epochs: 5,
            seed: 0,
        }
    }
}

impl TrainOptions {
    /// 100 epochs of batch 8 at 1e-4, cosine decay to 1e-6 after a 25-epoch
    /// warm-up.
    pub fn paper() -> TrainOptions {
        TrainOptions {
            epochs: 100,
            batch_size: 8,
            base_lr: 1e-4,
            min_lr: 1e-6,
            warmup_epochs: 25,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean reconstruction loss over each epoch's minibatches.
    pub epoch_losses: Vec<f64>,
    /// Reconstruction loss on the validation set after each epoch; empty
    /// when no validation set was given.
    pub validation_losses: Vec<f64>,
    /// Epoch whose weights were kept (lowest validation loss, or lowest
    /// training loss without a validation set).
    pub best_epoch: Option<usize>,
}

fn check_dataset(vae: &Vae, data: &[MotionSequence], what: &str) -> Result<()> {
    let w = vae.config().window();
    for (i, seq) in data.iter().enumerate() {
        if !vae.config().family.accepts(seq.modality) {
            bail!(
                Usage,
                "{what} sequence {i} is {} motion, tokenizer is {}",
                seq.modality.name(),
                vae.config().family.name()
            );
        }
        if seq.n_frames() < w {
            bail!(Usage, "{what} sequence {i} has {} frames, need at least {w}", seq.n_frames());
        }
    }
    Ok(())
}

/// How the FSQ rounding is treated when building a loss graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Round forward, identity backward.
    StraightThrough,
    /// No rounding at all: the decoder sees the bounded latent. Its exact
    /// gradient is what the straight-through pass reports.
    Smooth,
}

impl Vae {
    /// Differentiable reconstruction loss of a `[D × T]` input (`T` a
    /// multiple of the window) under the current weights.
    pub fn loss_graph(&self, x: &Tensor, rounding: Rounding) -> Result<Tensor> {
        let weights = self.constants();
        let z = self.encode_with(x, &weights)?;
        let decoder_in = match (rounding, &self.config().quantizer) {
            (Rounding::Smooth, QuantizerConfig::Fsq { levels }) => {
                decoder_input(&fsq_bound_tensor(&z, levels)?, levels)?
            }
            (Rounding::Smooth, QuantizerConfig::Vq { .. }) => {
                bail!(Usage, "smooth rounding applies to FSQ only")
            }
            (Rounding::StraightThrough, _) => self.quantize_with(&z, &weights)?.decoder_in,
        };
        mse(&self.decode_with(&decoder_in, &weights)?, x)
    }

    /// Reconstruction (and, for VQ, codebook) loss of one sequence.
    fn sequence_loss(&self, seq: &MotionSequence, weights: &[Tensor]) -> Result<(Tensor, Tensor)> {
        let w = self.config().window();
        let seq = match seq.modality {
            crate::types::Modality::LeftHand => seq.mirrored(crate::types::Modality::RightHand),
            _ => seq.clone(),
        };
        let x = seq.to_channels(seq.n_frames() / w * w)?;
        let z = self.encode_with(&x, weights)?;
        let q = self.quantize_with(&z, weights)?;
        let recon = mse(&self.decode_with(&q.decoder_in, weights)?, &x)?;
        let total = match q.aux_loss {
            Some(aux) => recon.add(&aux)?,
            None => recon.clone(),
        };
        Ok((recon, total))
    }

    /// Mean reconstruction error through the quantizer, without gradients.
    pub fn reconstruction_loss(&self, data: &[MotionSequence]) -> Result<f64> {
        if data.is_empty() {
            bail!(Usage, "reconstruction loss of an empty dataset");
        }
        check_dataset(self, data, "evaluation")?;
        let weights = self.constants();
        let mut total = 0.0;
        for seq in data {
            total += self.sequence_loss(seq, &weights)?.0.item()?;
        }
        Ok(total / data.len() as f64)
    }
}

/// Adam with a per-epoch cosine schedule on the ℓ2 reconstruction loss.
/// Ends with the weights of the best epoch.
pub fn train(
    vae: &mut Vae,
    train_set: &[MotionSequence],
    validation_set: &[MotionSequence],
    opts: &TrainOptions,
) -> Result<TrainReport> {
    let mut report = TrainReport {
        epoch_losses: Vec::new(),
        validation_losses: Vec::new(),
        best_epoch: None,
    };
    if opts.epochs == 0 {
        return Ok(report);
    }
    if train_set.is_empty() {
        bail!(Usage, "training set is empty");
    }
    if opts.batch_size == 0 {
        bail!(Usage, "batch size must be positive");
    }
    check_dataset(vae, train_set, "training")?;
    check_dataset(vae, validation_set, "validation")?;
    let schedule = CosineSchedule::new(opts.base_lr, opts.min_lr, opts.warmup_epochs.max(1), opts.epochs)?;
    let mut adam = AdamState::new(opts.base_lr);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best: Option<(f64, Vec<Parameter>)> = None;

    for epoch in 0..opts.epochs {
        adam.lr = schedule.lr(epoch)?;
        order.shuffle(&mut rng);
        let mut recon_sum = 0.0;
        for batch in order.chunks(opts.batch_size) {
            let leaves = vae.leaves();
            let mut total = Tensor::scalar(0.0);
            for &i in batch {
                let (recon, loss) = vae.sequence_loss(&train_set[i], &leaves)?;
                recon_sum += recon.item()?;
                total = total.add(&loss)?;
            }
            let total = total.scale(1.0 / batch.len() as f64);
            let value = total.item()?;
            if !value.is_finite() {
                bail!(Numeric, "training loss became {value} in epoch {epoch}");
            }
            total.backward()?;
            for (p, leaf) in vae.parameters_mut().iter_mut().zip(&leaves) {
                p.zero_grad();
                p.absorb_leaf_grad(leaf)?;
            }
            adam_step(vae.parameters_mut(), &mut adam)?;
        }
        let epoch_loss = recon_sum / train_set.len() as f64;
        report.epoch_losses.push(epoch_loss);
        let score = if validation_set.is_empty() {
            epoch_loss
        } else {
            let v = vae.reconstruction_loss(validation_set)?;
            report.validation_losses.push(v);
            v
        };
        if !score.is_finite() {
            bail!(Numeric, "validation loss became {score} in epoch {epoch}");
        }
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, vae.parameters().to_vec()));
            report.best_epoch = Some(epoch);
        }
    }
    if let Some((_, params)) = best {
        for (p, kept) in vae.parameters_mut().iter_mut().zip(params) {
            p.set_value(kept.value().to_vec())?;
        }
    }
    Ok(report)
}
