use crate::error::{bail, Result};

/// Linear warm-up followed by cosine annealing, evaluated per epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineSchedule {
    pub base_lr: f64,
    pub min_lr: f64,
    pub warmup_epochs: usize,
    pub total_epochs: usize,
}

impl CosineSchedule {
    pub fn new(base_lr: f64, min_lr: f64, warmup_epochs: usize, total_epochs: usize) -> Result<Self> {
        if !(base_lr > 0.0 && min_lr > 0.0 && min_lr <= base_lr) {
            bail!(Usage, "need 0 < min_lr <= base_lr, got {min_lr} / {base_lr}");
        }
        if warmup_epochs == 0 || total_epochs == 0 {
            bail!(Usage, "warm-up and total epochs must be positive");
        }
        Ok(CosineSchedule {
            base_lr,
            min_lr,
            warmup_epochs,
            total_epochs,
        })
    }

    /// The ramp runs from `min_lr` at epoch 0 to `base_lr` at
    /// `warmup_epochs`; the last epoch is pinned to `min_lr`.
    pub fn lr(&self, epoch: usize) -> Result<f64> {
        cosine_lr(self, epoch)
    }
}

pub fn cosine_lr(s: &CosineSchedule, epoch: usize) -> Result<f64> {
    if epoch >= s.total_epochs {
        bail!(Usage, "epoch {epoch} outside schedule of {} epochs", s.total_epochs);
    }
    let span = s.base_lr - s.min_lr;
    if epoch + 1 == s.total_epochs {
        return Ok(s.min_lr);
    }
    if epoch < s.warmup_epochs {
        return Ok(s.min_lr + span * epoch as f64 / s.warmup_epochs as f64);
    }
    // epoch < total-1 and epoch >= warmup, so the denominator is positive
    let progress = (epoch - s.warmup_epochs) as f64 / (s.total_epochs - 1 - s.warmup_epochs) as f64;
    Ok(s.min_lr + span * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos()))
}
