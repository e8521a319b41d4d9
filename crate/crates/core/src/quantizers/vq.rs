use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::numcore::Tensor;

/// Learned codebook for the vector-quantization baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    dim: usize,
    entries: Vec<f64>,
    usage_counts: Vec<u64>,
}

impl Codebook {
    pub fn new(entries: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || entries.is_empty() || entries.len() % dim != 0 {
            bail!(
                Usage,
                "codebook needs K >= 1 entries of dimension {dim}, got {} values",
                entries.len()
            );
        }
        if entries.iter().any(|v| !v.is_finite()) {
            bail!(Data, "codebook entries must be finite");
        }
        let k = entries.len() / dim;
        Ok(Codebook {
            dim,
            entries,
            usage_counts: vec![0; k],
        })
    }

    /// Uniform in `(−1/K, 1/K)`, the usual VQ-VAE initialization.
    pub fn random(size: usize, dim: usize, rng: &mut impl Rng) -> Result<Self> {
        let r = 1.0 / size.max(1) as f64;
        let entries = (0..size * dim).map(|_| rng.random_range(-r..r)).collect();
        Self::new(entries, dim)
    }

    pub fn size(&self) -> usize {
        self.usage_counts.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> &[f64] {
        &self.entries[index * self.dim..(index + 1) * self.dim]
    }

    pub fn usage_counts(&self) -> &[u64] {
        &self.usage_counts
    }

    pub fn reset_usage(&mut self) {
        self.usage_counts.iter_mut().for_each(|c| *c = 0);
    }

    pub fn set_entries(&mut self, entries: Vec<f64>) -> Result<()> {
        if entries.len() != self.entries.len() {
            bail!(Dimension, "codebook update has wrong size");
        }
        self.entries = entries;
        Ok(())
    }

    /// Nearest entry by squared L2 distance; ties go to the lowest index.
    pub fn nearest(&self, z: &[f64]) -> Result<(usize, f64)> {
        nearest_entry(&self.entries, self.dim, z)
    }

    /// Nearest entry and its index; bumps the entry's usage count.
    pub fn vq_quantize(&mut self, z: &[f64]) -> Result<(Vec<f64>, usize)> {
        vq_quantize(z, self)
    }
}

pub(crate) fn nearest_entry(entries: &[f64], dim: usize, z: &[f64]) -> Result<(usize, f64)> {
    if entries.is_empty() {
        bail!(Usage, "empty codebook");
    }
    if z.len() != dim {
        bail!(Usage, "latent has {} dimensions, codebook has {dim}", z.len());
    }
    let mut best = (0, f64::INFINITY);
    for (k, e) in entries.chunks_exact(dim).enumerate() {
        let d: f64 = e.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (k, d);
        }
    }
    Ok(best)
}

pub fn vq_quantize(z: &[f64], cb: &mut Codebook) -> Result<(Vec<f64>, usize)> {
    let (index, _) = cb.nearest(z)?;
    cb.usage_counts[index] += 1;
    Ok((cb.entry(index).to_vec(), index))
}

/// Differentiable VQ over a `[d × n]` latent against a `[K × d]` codebook
/// tensor. Returns the straight-through output `z + sg(e − z)`, the gathered
/// entries `[d × n]` (gradient flows to the codebook), and the indices.
pub fn vq_quantize_tensor(z: &Tensor, codebook: &Tensor) -> Result<(Tensor, Tensor, Vec<usize>)> {
    let (d, n) = match *z.shape() {
        [d, n] => (d, n),
        _ => bail!(Usage, "latent must be [d × n], got {:?}", z.shape()),
    };
    match *codebook.shape() {
        [_, cd] if cd == d => {}
        _ => bail!(
            Usage,
            "codebook shape {:?} does not match latent dimension {d}",
            codebook.shape()
        ),
    }
    let zd = z.data();
    let mut indices = Vec::with_capacity(n);
    let mut frame = vec![0.0; d];
    for j in 0..n {
        for i in 0..d {
            frame[i] = zd[i * n + j];
        }
        indices.push(nearest_entry(codebook.data(), d, &frame)?.0);
    }
    let gather: Vec<usize> = (0..d)
        .flat_map(|i| indices.iter().map(move |&k| k * d + i))
        .collect();
    let entries = codebook.gather(&gather, &[d, n])?;
    let st = z.add(&entries.sub(z)?.detach())?;
    Ok((st, entries, indices))
}

/// `(‖sg(z) − e‖², ‖z − sg(e)‖²)`, each summed over dimensions and averaged
/// over columns. The first trains the codebook, the second the encoder.
pub fn vq_losses(z: &Tensor, entry: &Tensor) -> Result<(Tensor, Tensor)> {
    if z.shape() != entry.shape() {
        bail!(
            Dimension,
            "latent {:?} and entry {:?} differ",
            z.shape(),
            entry.shape()
        );
    }
    let cols = if z.shape().len() == 2 { z.shape()[1] } else { 1 } as f64;
    let codebook = z.detach().sub(entry)?.square().sum().scale(1.0 / cols);
    let commitment = z.sub(&entry.detach())?.square().sum().scale(1.0 / cols);
    Ok((codebook, commitment))
}
