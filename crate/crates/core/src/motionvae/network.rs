use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{QuantizerConfig, VaeConfig};
use crate::error::{bail, Result};
use crate::numcore::{Parameter, Tensor};
use crate::quantizers::{decoder_input, fsq_quantize_tensor, vq_losses, vq_quantize_tensor};

#[derive(Debug, Clone, Copy)]
struct Conv {
    weight: usize,
    bias: usize,
    stride: usize,
    dilation: usize,
}

#[derive(Debug, Clone, Copy)]
struct ResBlock {
    dilated: Conv,
    pointwise: Conv,
}

#[derive(Debug, Clone)]
struct Layout {
    enc_in: Conv,
    enc_stages: Vec<(Conv, Vec<ResBlock>)>,
    enc_out: Conv,
    dec_in: Conv,
    dec_stages: Vec<(Vec<ResBlock>, Conv)>,
    dec_mid: Conv,
    dec_out: Conv,
    codebook: Option<usize>,
}

/// Output of the quantizer on one latent sequence.
pub(crate) struct Quantized {
    /// What the decoder consumes, `[d × n]`.
    pub decoder_in: Tensor,
    pub indices: Vec<usize>,
    /// Codebook and commitment terms (VQ only).
    pub aux_loss: Option<Tensor>,
}

/// `x + conv1(relu(conv3_dilated(relu(x))))` on a `[C × T]` input; each
/// layer is `[weight, bias]` with bias shaped `[C × 1]`.
pub fn residual_block(x: &Tensor, dilated: [&Tensor; 2], pointwise: [&Tensor; 2], dilation: usize) -> Result<Tensor> {
    let h = x.relu().conv1d(dilated[0], 1, dilation)?.add(dilated[1])?;
    let h = h.relu().conv1d(pointwise[0], 1, 1)?.add(pointwise[1])?;
    x.add(&h)
}

/// Convolutional encoder/decoder pair around a discrete bottleneck.
///
/// Encoder: conv → per stage (stride-2 conv, residual stack with dilations
/// growing toward the input) → conv to `latent_dim`. The decoder mirrors it
/// with nearest-neighbour upsampling in place of strided convolutions.
#[derive(Debug, Clone)]
pub struct Vae {
    config: VaeConfig,
    params: Vec<Parameter>,
    layout: Layout,
}

struct Builder<'a> {
    params: Vec<Parameter>,
    init: &'a mut dyn FnMut(usize, usize) -> f64,
}

impl Builder<'_> {
    fn conv(&mut self, name: &str, c_in: usize, c_out: usize, k: usize, stride: usize, dilation: usize) -> Conv {
        let fan_in = c_in * k;
        let w: Vec<f64> = (0..c_out * c_in * k).map(|_| (self.init)(fan_in, 0)).collect();
        let b: Vec<f64> = (0..c_out).map(|_| (self.init)(fan_in, 1)).collect();
        let weight = self.push(format!("{name}.weight"), w, &[c_out, c_in, k]);
        let bias = self.push(format!("{name}.bias"), b, &[c_out, 1]);
        Conv {
            weight,
            bias,
            stride,
            dilation,
        }
    }

    fn push(&mut self, name: String, value: Vec<f64>, shape: &[usize]) -> usize {
        self.params
            .push(Parameter::new(name, value, shape).expect("layer extents are positive"));
        self.params.len() - 1
    }

    fn res_stack(&mut self, name: &str, width: usize, dilations: &[usize]) -> Vec<ResBlock> {
        dilations
            .iter()
            .enumerate()
            .map(|(i, &d)| ResBlock {
                dilated: self.conv(&format!("{name}.{i}.dilated"), width, width, 3, 1, d),
                pointwise: self.conv(&format!("{name}.{i}.pointwise"), width, width, 1, 1, 1),
            })
            .collect()
    }
}

impl Vae {
    /// Seeded initialization: uniform in `±1/√fan_in` for convolutions,
    /// `±1/K` for a VQ codebook.
    pub fn new(config: VaeConfig, seed: u64) -> Result<Vae> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut conv_init = |fan_in: usize, _: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            rng.random_range(-bound..bound)
        };
        let mut vae = Self::build(config, &mut conv_init)?;
        if let (Some(idx), QuantizerConfig::Vq { size, .. }) = (vae.layout.codebook, &vae.config.quantizer) {
            let bound = 1.0 / *size as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0de_b00c);
            let entries = (0..vae.params[idx].len())
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            vae.params[idx].set_value(entries)?;
        }
        Ok(vae)
    }

    /// Every weight and bias zero.
    pub fn zeroed(config: VaeConfig) -> Result<Vae> {
        Self::build(config, &mut |_, _| 0.0)
    }

    fn build(config: VaeConfig, init: &mut dyn FnMut(usize, usize) -> f64) -> Result<Vae> {
        config.validate()?;
        let w = config.width;
        let dilations: Vec<usize> = (0..config.n_res_blocks)
            .map(|i| config.dilation_growth.pow(i as u32))
            .collect();
        let reversed: Vec<usize> = dilations.iter().rev().copied().collect();
        let mut b = Builder {
            params: Vec::new(),
            init,
        };
        let enc_in = b.conv("encoder.input", config.input_dim, w, 3, 1, 1);
        let enc_stages = (0..config.downsample_stages)
            .map(|s| {
                let down = b.conv(&format!("encoder.stage{s}.down"), w, w, 3, 2, 1);
                (down, b.res_stack(&format!("encoder.stage{s}.res"), w, &reversed))
            })
            .collect();
        let enc_out = b.conv("encoder.output", w, config.latent_dim, 3, 1, 1);
        let dec_in = b.conv("decoder.input", config.latent_dim, w, 3, 1, 1);
        let dec_stages = (0..config.downsample_stages)
            .map(|s| {
                let res = b.res_stack(&format!("decoder.stage{s}.res"), w, &dilations);
                (res, b.conv(&format!("decoder.stage{s}.up"), w, w, 3, 1, 1))
            })
            .collect();
        let dec_mid = b.conv("decoder.mid", w, w, 3, 1, 1);
        let dec_out = b.conv("decoder.output", w, config.input_dim, 3, 1, 1);
        let codebook = match config.quantizer {
            QuantizerConfig::Vq { size, .. } => {
                Some(b.push("codebook".into(), vec![0.0; size * config.latent_dim], &[size, config.latent_dim]))
            }
            QuantizerConfig::Fsq { .. } => None,
        };
        Ok(Vae {
            layout: Layout {
                enc_in,
                enc_stages,
                enc_out,
                dec_in,
                dec_stages,
                dec_mid,
                dec_out,
                codebook,
            },
            params: b.params,
            config,
        })
    }

    /// Rebuild from named parameter values, checking names and extents.
    pub fn from_parameters(config: VaeConfig, values: Vec<(String, Vec<usize>, Vec<f64>)>) -> Result<Vae> {
        let mut vae = Self::zeroed(config)?;
        if values.len() != vae.params.len() {
            bail!(Load, "checkpoint has {} tensors, network needs {}", values.len(), vae.params.len());
        }
        for (p, (name, shape, data)) in vae.params.iter_mut().zip(values) {
            if p.name != name || p.shape() != shape.as_slice() {
                bail!(
                    Load,
                    "checkpoint tensor {name} {shape:?} does not match {} {:?}",
                    p.name,
                    p.shape()
                );
            }
            p.set_value(data)?;
        }
        Ok(vae)
    }

    pub fn config(&self) -> &VaeConfig {
        &self.config
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.params
    }

    pub(crate) fn parameters_mut(&mut self) -> &mut [Parameter] {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(Parameter::len).sum()
    }

    /// Graph leaves for training.
    pub(crate) fn leaves(&self) -> Vec<Tensor> {
        self.params.iter().map(Parameter::leaf).collect()
    }

    /// Gradient-free views for inference.
    pub(crate) fn constants(&self) -> Vec<Tensor> {
        self.params.iter().map(Parameter::constant).collect()
    }

    fn conv(x: &Tensor, conv: Conv, w: &[Tensor]) -> Result<Tensor> {
        x.conv1d(&w[conv.weight], conv.stride, conv.dilation)?
            .add(&w[conv.bias])
    }

    fn res_stack(x: Tensor, blocks: &[ResBlock], w: &[Tensor]) -> Result<Tensor> {
        blocks.iter().try_fold(x, |x, b| {
            residual_block(
                &x,
                [&w[b.dilated.weight], &w[b.dilated.bias]],
                [&w[b.pointwise.weight], &w[b.pointwise.bias]],
                b.dilated.dilation,
            )
        })
    }

    /// `[D × T]` input (T a multiple of the window) to `[d × T/w]` latents.
    pub(crate) fn encode_with(&self, x: &Tensor, w: &[Tensor]) -> Result<Tensor> {
        let l = &self.layout;
        let mut h = Self::conv(x, l.enc_in, w)?.relu();
        for (down, blocks) in &l.enc_stages {
            h = Self::conv(&h, *down, w)?;
            h = Self::res_stack(h, blocks, w)?;
        }
        Self::conv(&h, l.enc_out, w)
    }

    /// `[d × n]` decoder input to `[D × n·w]` reconstruction.
    pub(crate) fn decode_with(&self, q: &Tensor, w: &[Tensor]) -> Result<Tensor> {
        let l = &self.layout;
        let mut h = Self::conv(q, l.dec_in, w)?.relu();
        for (blocks, up) in &l.dec_stages {
            h = Self::res_stack(h, blocks, w)?;
            h = Self::conv(&h.upsample_nearest(2)?, *up, w)?;
        }
        h = Self::conv(&h, l.dec_mid, w)?.relu();
        Self::conv(&h, l.dec_out, w)
    }

    pub(crate) fn quantize_with(&self, z: &Tensor, w: &[Tensor]) -> Result<Quantized> {
        match &self.config.quantizer {
            QuantizerConfig::Fsq { levels } => {
                let (q, digits) = fsq_quantize_tensor(z, levels)?;
                let indices = digits
                    .iter()
                    .map(|d| levels.digits_to_index(d))
                    .collect::<Result<_>>()?;
                Ok(Quantized {
                    decoder_in: decoder_input(&q, levels)?,
                    indices,
                    aux_loss: None,
                })
            }
            QuantizerConfig::Vq { beta, .. } => {
                let codebook = &w[self.layout.codebook.expect("vq layout has a codebook")];
                let (st, entries, indices) = vq_quantize_tensor(z, codebook)?;
                let (cb_loss, commit) = vq_losses(z, &entries)?;
                Ok(Quantized {
                    decoder_in: st,
                    indices,
                    aux_loss: Some(cb_loss.add(&commit.scale(*beta))?),
                })
            }
        }
    }

    /// Decoder input for token indices (no gradient).
    pub(crate) fn dequantize(&self, indices: &[usize], w: &[Tensor]) -> Result<Tensor> {
        let d = self.config.latent_dim;
        let n = indices.len();
        let mut data = vec![0.0; d * n];
        match &self.config.quantizer {
            QuantizerConfig::Fsq { levels } => {
                for (j, &idx) in indices.iter().enumerate() {
                    let digits = levels.index_to_digits(idx)?;
                    for (i, (&dg, &l)) in digits.iter().zip(levels.levels()).enumerate() {
                        let centered = dg as f64 - (l / 2) as f64;
                        data[i * n + j] = centered * 2.0 / l as f64;
                    }
                }
            }
            QuantizerConfig::Vq { size, .. } => {
                let cb = w[self.layout.codebook.expect("vq layout has a codebook")].data();
                for (j, &idx) in indices.iter().enumerate() {
                    if idx >= *size {
                        bail!(Data, "token {idx} outside codebook of {size}");
                    }
                    for i in 0..d {
                        data[i * n + j] = cb[idx * d + i];
                    }
                }
            }
        }
        Tensor::new(data, &[d, n])
    }
}
