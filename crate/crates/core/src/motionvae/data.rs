use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::sequence::MotionSequence;
use crate::bodymodel::{EXPRESSION_DIMS, EYELID_DIMS, IDENTITY_6D};
use crate::error::{bail, Result};
use crate::types::Modality;

pub const FIXTURE_FPS: f64 = 25.0;

/// Sum-of-sinusoids motion: `sources` oscillators with random frequency,
/// phase and amplitude per sequence, mixed into the frame dimensions by one
/// fixed random matrix per `seed`.
pub fn sinusoid_dataset(modality: Modality, count: usize, frames: usize, seed: u64) -> Result<Vec<MotionSequence>> {
    const SOURCES: usize = 3;
    if frames == 0 {
        bail!(Usage, "sequences need at least one frame");
    }
    let dim = modality.frame_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mixing: Vec<f64> = (0..dim * SOURCES)
        .map(|_| rng.random_range(-1.0..1.0) / (SOURCES as f64).sqrt())
        .collect();
    (0..count)
        .map(|_| {
            let osc: Vec<(f64, f64, f64)> = (0..SOURCES)
                .map(|_| {
                    (
                        rng.random_range(0.5..2.0),
                        rng.random_range(0.0..TAU),
                        rng.random_range(0.5..1.0),
                    )
                })
                .collect();
            let mut data = Vec::with_capacity(frames * dim);
            for t in 0..frames {
                let time = t as f64 / FIXTURE_FPS;
                let src: Vec<f64> = osc
                    .iter()
                    .map(|&(f, phase, amp)| amp * (TAU * f * time + phase).sin())
                    .collect();
                for c in 0..dim {
                    data.push((0..SOURCES).map(|s| mixing[c * SOURCES + s] * src[s]).sum());
                }
            }
            MotionSequence::new(modality, FIXTURE_FPS, data)
        })
        .collect()
}

/// Settings of the synthetic expressive-face generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGenerator {
    /// Latent factors behind the expression coefficients.
    pub rank: usize,
    /// Expression prototypes the factors start near.
    pub clusters: usize,
    /// Per-frame step size of the factor random walk.
    pub drift: f64,
}

impl Default for FaceGenerator {
    fn default() -> Self {
        FaceGenerator {
            rank: 6,
            clusters: 12,
            drift: 0.15,
        }
    }
}

/// Face parameters from a low-rank PCA-style model: smooth factor
/// trajectories starting near random prototypes, mapped through a fixed
/// basis with decaying component scales. Eyelids follow the first factors;
/// the jaw opens about x with the first factor.
pub fn face_dataset(gen: &FaceGenerator, count: usize, frames: usize, seed: u64) -> Result<Vec<MotionSequence>> {
    if frames == 0 || gen.rank == 0 || gen.clusters == 0 {
        bail!(Usage, "face generator needs frames, rank and clusters");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let basis: Vec<f64> = (0..EXPRESSION_DIMS * gen.rank)
        .map(|i| {
            let component = (i / gen.rank) as f64;
            normal.sample(&mut rng) / (1.0 + 0.1 * component)
        })
        .collect();
    let prototypes: Vec<Vec<f64>> = (0..gen.clusters)
        .map(|_| (0..gen.rank).map(|_| normal.sample(&mut rng)).collect())
        .collect();
    let scale = 1.0 / (gen.rank as f64).sqrt();
    (0..count)
        .map(|_| {
            let proto = &prototypes[rng.random_range(0..gen.clusters)];
            let mut factors: Vec<f64> = proto.iter().map(|p| p + 0.3 * normal.sample(&mut rng)).collect();
            let mut velocity = vec![0.0; gen.rank];
            let mut data = Vec::with_capacity(frames * Modality::Face.frame_dim());
            for _ in 0..frames {
                for e in 0..EXPRESSION_DIMS {
                    let row = &basis[e * gen.rank..(e + 1) * gen.rank];
                    data.push(scale * row.iter().zip(&factors).map(|(b, f)| b * f).sum::<f64>());
                }
                for k in 0..EYELID_DIMS {
                    data.push(0.5 * factors[k % gen.rank].tanh());
                }
                let opening = 0.2 * (1.0 + factors[0].tanh());
                let mut jaw = IDENTITY_6D;
                jaw[4] = opening.cos();
                jaw[5] = opening.sin();
                data.extend_from_slice(&jaw);
                for (f, v) in factors.iter_mut().zip(velocity.iter_mut()) {
                    *v = 0.8 * *v + gen.drift * normal.sample(&mut rng);
                    *f += *v;
                }
            }
            MotionSequence::new(Modality::Face, FIXTURE_FPS, data)
        })
        .collect()
}
