use super::levels::LevelSpec;
use crate::error::{bail, Result};
use crate::numcore::Tensor;

/// Even level counts are shifted down by half a unit before rounding so that
/// exactly `L` integers are reachable.
fn half_offset(levels: usize) -> f64 {
    if levels % 2 == 0 {
        0.5
    } else {
        0.0
    }
}

/// Smallest and largest quantized integer for `levels`:
/// `−⌊L/2⌋ ..= ⌈L/2⌉−1`.
fn level_bounds(levels: usize) -> (f64, f64) {
    let lo = -((levels / 2) as f64);
    let hi = (levels.div_ceil(2) - 1) as f64;
    (lo, hi)
}

fn bound(z: f64, levels: usize) -> f64 {
    levels as f64 / 2.0 * z.tanh() - half_offset(levels)
}

fn round_level(b: f64, levels: usize) -> f64 {
    let (lo, hi) = level_bounds(levels);
    // tanh saturates to exactly 1.0 for large inputs, so clamp the top level
    b.round().clamp(lo, hi)
}

/// Output of quantizing one latent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FsqCode {
    /// Centered integer level per dimension.
    pub values: Vec<f64>,
    /// Level index per dimension, in `[0, Lᵢ)`.
    pub digits: Vec<usize>,
}

/// Quantize one latent frame: per dimension, `(L/2)·tanh(z)` (half-shifted
/// for even `L`) rounded to the nearest level.
pub fn fsq_quantize(z: &[f64], spec: &LevelSpec) -> Result<FsqCode> {
    if z.len() != spec.dims() {
        bail!(
            Usage,
            "latent has {} dimensions, level spec has {}",
            z.len(),
            spec.dims()
        );
    }
    let values: Vec<f64> = z
        .iter()
        .zip(spec.levels())
        .map(|(&zi, &l)| round_level(bound(zi, l), l))
        .collect();
    let digits = values
        .iter()
        .zip(spec.levels())
        .map(|(&v, &l)| (v + (l / 2) as f64) as usize)
        .collect();
    Ok(FsqCode { values, digits })
}

/// Latent value whose bound lands exactly on each digit's level.
pub fn level_latent(digits: &[usize], spec: &LevelSpec) -> Result<Vec<f64>> {
    spec.digits_to_index(digits)?;
    Ok(digits
        .iter()
        .zip(spec.levels())
        .map(|(&d, &l)| {
            let k = d as f64 - (l / 2) as f64;
            ((k + half_offset(l)) / (l as f64 / 2.0)).atanh()
        })
        .collect())
}

/// Centered integer levels for the given digits.
pub fn digit_values(digits: &[usize], spec: &LevelSpec) -> Vec<f64> {
    digits
        .iter()
        .zip(spec.levels())
        .map(|(&d, &l)| d as f64 - (l / 2) as f64)
        .collect()
}

fn column(spec: &LevelSpec, f: impl Fn(usize) -> f64) -> Tensor {
    let data: Vec<f64> = spec.levels().iter().map(|&l| f(l)).collect();
    Tensor::new(data, &[spec.dims(), 1]).expect("non-empty level spec")
}

/// Smooth pre-rounding value `(L/2)·tanh(z) − offset` for a `[d × n]` latent.
pub fn fsq_bound_tensor(z: &Tensor, spec: &LevelSpec) -> Result<Tensor> {
    check_latent(z, spec)?;
    let half = column(spec, |l| l as f64 / 2.0);
    let offset = column(spec, half_offset);
    z.tanh().mul(&half)?.sub(&offset)
}

/// Straight-through rounding: the forward pass rounds, the backward pass is
/// the identity.
pub fn round_ste(bounded: &Tensor, spec: &LevelSpec) -> Result<Tensor> {
    check_latent(bounded, spec)?;
    let n = bounded.shape()[1];
    let data: Vec<f64> = bounded
        .data()
        .iter()
        .enumerate()
        .map(|(i, &b)| round_level(b, spec.levels()[i / n]))
        .collect();
    Tensor::custom(&[bounded], data, bounded.shape(), |g| vec![g.to_vec()])
}

/// Differentiable FSQ over a `[d × n]` latent (one column per window).
/// Returns the centered integer levels and the digits of each column.
pub fn fsq_quantize_tensor(z: &Tensor, spec: &LevelSpec) -> Result<(Tensor, Vec<Vec<usize>>)> {
    let q = round_ste(&fsq_bound_tensor(z, spec)?, spec)?;
    let n = q.shape()[1];
    let digits = (0..n)
        .map(|j| {
            spec.levels()
                .iter()
                .enumerate()
                .map(|(i, &l)| (q.data()[i * n + j] + (l / 2) as f64) as usize)
                .collect()
        })
        .collect();
    Ok((q, digits))
}

/// Rescale centered levels by `2/L` into `[−1, 1)` for the decoder.
pub fn decoder_input(q: &Tensor, spec: &LevelSpec) -> Result<Tensor> {
    check_latent(q, spec)?;
    q.mul(&column(spec, |l| 2.0 / l as f64))
}

fn check_latent(z: &Tensor, spec: &LevelSpec) -> Result<()> {
    match *z.shape() {
        [d, _] if d == spec.dims() => Ok(()),
        _ => bail!(
            Usage,
            "latent shape {:?} does not match {} FSQ dimensions",
            z.shape(),
            spec.dims()
        ),
    }
}
