use std::collections::HashMap;

use crate::error::{bail, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BleuSmoothing {
    None,
    /// Orders with no matches use `1 / (candidates + 1)`.
    #[default]
    AddOne,
}

/// Whitespace tokenization.
pub fn tokenize(sentence: &str) -> Vec<&str> {
    sentence.split_whitespace().collect()
}

fn ngram_counts<'a, S: AsRef<str>>(words: &'a [S], n: usize) -> HashMap<Vec<&'a str>, usize> {
    let mut counts = HashMap::new();
    if words.len() >= n {
        for w in words.windows(n) {
            *counts
                .entry(w.iter().map(AsRef::as_ref).collect())
                .or_insert(0) += 1;
        }
    }
    counts
}

fn check_corpus<S>(hyps: &[Vec<S>], refs: &[Vec<S>]) -> Result<()> {
    if hyps.is_empty() {
        bail!(Usage, "empty corpus");
    }
    if hyps.len() != refs.len() {
        bail!(
            Usage,
            "{} hypotheses but {} references",
            hyps.len(),
            refs.len()
        );
    }
    Ok(())
}

/// Corpus BLEU-4 with one reference per hypothesis: geometric mean of the
/// clipped 1- to 4-gram precisions times the brevity penalty.
pub fn bleu4<S: AsRef<str>>(
    hypotheses: &[Vec<S>],
    references: &[Vec<S>],
    smoothing: BleuSmoothing,
) -> Result<f64> {
    check_corpus(hypotheses, references)?;
    let mut matches = [0usize; 4];
    let mut totals = [0usize; 4];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (h, r) in hypotheses.iter().zip(references) {
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=4 {
            let hc = ngram_counts(h, n);
            let rc = ngram_counts(r, n);
            totals[n - 1] += hc.values().sum::<usize>();
            matches[n - 1] += hc
                .iter()
                .map(|(g, &c)| c.min(rc.get(g).copied().unwrap_or(0)))
                .sum::<usize>();
        }
    }
    if hyp_len == 0 {
        return Ok(0.0);
    }

    let mut log_sum = 0.0;
    for n in 0..4 {
        let p = match (matches[n], smoothing) {
            (0, BleuSmoothing::None) => return Ok(0.0),
            (0, BleuSmoothing::AddOne) => 1.0 / (totals[n] + 1) as f64,
            (m, _) => m as f64 / totals[n] as f64,
        };
        log_sum += p.ln();
    }
    let bp = if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    Ok(bp * (log_sum / 4.0).exp())
}

pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x.as_ref() == y.as_ref() {
                diag + 1
            } else {
                up.max(row[j])
            };
            diag = up;
        }
    }
    row[b.len()]
}

/// Recall weight of the LCS F-measure.
pub const ROUGE_BETA_SQ: f64 = 8.0;

/// LCS F-measure per sentence, averaged over the corpus.
pub fn rouge_l<S: AsRef<str>>(
    hypotheses: &[Vec<S>],
    references: &[Vec<S>],
    beta_sq: f64,
) -> Result<f64> {
    check_corpus(hypotheses, references)?;
    let total: f64 = hypotheses
        .iter()
        .zip(references)
        .map(|(h, r)| {
            let lcs = lcs_len(h, r) as f64;
            if lcs == 0.0 {
                return 0.0;
            }
            let p = lcs / h.len() as f64;
            let rc = lcs / r.len() as f64;
            (1.0 + beta_sq) * p * rc / (rc + beta_sq * p)
        })
        .sum();
    Ok(total / hypotheses.len() as f64)
}
