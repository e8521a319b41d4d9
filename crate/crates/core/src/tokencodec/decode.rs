use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::document::MultiModalStep;
use super::vocab::Vocabulary;
use crate::error::{bail, Result};
use crate::types::Modality;

/// Source of next-step logits for the decoding loop.
///
/// `history` holds one embedding per prompt tag followed by the fused
/// embedding of every step decoded so far. The returned vectors, one per
/// modality in vocabulary order, have `C_m + 1` entries; the last is EOS.
pub trait Predictor {
    fn next_logits(&mut self, history: &[Vec<f64>], prompt: &[usize]) -> Vec<Vec<f64>>;
}

impl<F> Predictor for F
where
    F: FnMut(&[Vec<f64>], &[usize]) -> Vec<Vec<f64>>,
{
    fn next_logits(&mut self, history: &[Vec<f64>], prompt: &[usize]) -> Vec<Vec<f64>> {
        self(history, prompt)
    }
}

/// Fixed random token embeddings, one row per vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    rows: Vec<f64>,
}

impl EmbeddingTable {
    pub fn seeded(vocab_len: usize, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 || vocab_len == 0 {
            bail!(Usage, "embedding table needs a positive size and dimension");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (dim as f64).sqrt();
        let rows = (0..vocab_len * dim)
            .map(|_| { let v: f64 = StandardNormal.sample(&mut rng); scale * v })
            .collect::<Vec<f64>>();
        Ok(EmbeddingTable { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn embed(&self, id: usize) -> Result<&[f64]> {
        if id >= self.len() {
            bail!(Usage, "token id {id} outside embedding table of {}", self.len());
        }
        Ok(&self.rows[id * self.dim..(id + 1) * self.dim])
    }

    pub fn fuse_step(&self, step: &MultiModalStep) -> Result<Vec<f64>> {
        let parts = step
            .ids
            .iter()
            .map(|&id| self.embed(id))
            .collect::<Result<Vec<_>>>()?;
        fuse_embeddings(&parts)
    }
}

/// Equal-weight average of the four modality embeddings.
///
/// Values are sorted per coordinate before summing, so the result does not
/// depend on argument order and four equal inputs return that input exactly.
pub fn fuse_embeddings(parts: &[&[f64]]) -> Result<Vec<f64>> {
    if parts.len() != 4 {
        bail!(Usage, "fusion takes 4 modality embeddings, got {}", parts.len());
    }
    let d = parts[0].len();
    if let Some(p) = parts.iter().find(|p| p.len() != d) {
        bail!(Usage, "embedding dimensions differ: {} vs {d}", p.len());
    }
    Ok((0..d)
        .map(|i| {
            let mut v = [parts[0][i], parts[1][i], parts[2][i], parts[3][i]];
            v.sort_by(f64::total_cmp);
            ((v[0] + v[1]) + (v[2] + v[3])) * 0.25
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutput {
    /// Includes the step that carried the terminating EOS.
    pub steps: Vec<MultiModalStep>,
    /// First modality that emitted EOS, if decoding stopped early.
    pub terminated_by: Option<Modality>,
}

/// Position of the largest logit; ties resolve to the lowest position.
fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate().skip(1) {
        if v > logits[best] {
            best = i;
        }
    }
    best
}

fn check_logits(logits: &[Vec<f64>], vocab: &Vocabulary) -> Result<()> {
    if logits.len() != 4 {
        bail!(Contract, "predictor returned {} heads, expected 4", logits.len());
    }
    for m in Modality::ALL {
        let head = &logits[m.index()];
        let want = vocab.codebook_size(m) + 1;
        if head.len() != want {
            bail!(
                Contract,
                "{} head has {} logits, expected {want}",
                m.name(),
                head.len()
            );
        }
        if head.iter().any(|v| v.is_nan()) {
            bail!(Contract, "{} head returned NaN", m.name());
        }
    }
    Ok(())
}

/// Greedy multi-head decoding. Each step takes the argmax of every head and
/// appends the fused embedding of the chosen tokens to the history. Stops
/// after the first step in which any head picks EOS, or after `max_steps`.
pub fn greedy_decode(
    predictor: &mut impl Predictor,
    vocab: &Vocabulary,
    table: &EmbeddingTable,
    prompt: &[usize],
    max_steps: usize,
) -> Result<DecodeOutput> {
    if max_steps == 0 {
        bail!(Usage, "max_steps must be at least 1");
    }
    if table.len() < vocab.len() {
        bail!(
            Usage,
            "embedding table covers {} ids, vocabulary has {}",
            table.len(),
            vocab.len()
        );
    }
    if let Some(&bad) = prompt.iter().find(|&&id| !vocab.is_tag(id)) {
        bail!(Usage, "prompt id {bad} is not a language tag");
    }

    let mut history = prompt
        .iter()
        .map(|&id| table.embed(id).map(<[f64]>::to_vec))
        .collect::<Result<Vec<_>>>()?;
    let mut steps = Vec::new();
    while steps.len() < max_steps {
        let logits = predictor.next_logits(&history, prompt);
        check_logits(&logits, vocab)?;
        let mut ids = [0; 4];
        for m in Modality::ALL {
            let k = argmax(&logits[m.index()]);
            ids[m.index()] = if k == vocab.codebook_size(m) {
                vocab.eos()
            } else {
                vocab.motion_id(m, k)?
            };
        }
        let step = MultiModalStep::new(ids);
        steps.push(step);
        if let Some(m) = step.eos_modality(vocab) {
            return Ok(DecodeOutput {
                steps,
                terminated_by: Some(m),
            });
        }
        history.push(table.fuse_step(&step)?);
    }
    Ok(DecodeOutput {
        steps,
        terminated_by: None,
    })
}
