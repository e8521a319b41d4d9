use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::types::Modality;

/// Token indices emitted for one stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub modality: Modality,
    pub language: String,
    pub indices: Vec<usize>,
    pub includes_eos: bool,
}

impl TokenStream {
    pub fn new(modality: Modality, language: impl Into<String>, indices: Vec<usize>) -> Self {
        TokenStream {
            modality,
            language: language.into(),
            indices,
            includes_eos: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilizationReport {
    pub codebook_size: usize,
    pub total_tokens: u64,
    /// Fraction of codes seen at least once.
    pub used_fraction: f64,
    pub frequency_histogram: Vec<u64>,
    /// Population standard deviation of the histogram counts.
    pub frequency_sd: f64,
}

pub fn utilization(streams: &[TokenStream], codebook_size: usize) -> Result<UtilizationReport> {
    let all = streams.iter().flat_map(|s| s.indices.iter().copied());
    histogram_report(all, codebook_size)
}

pub(crate) fn histogram_report(
    indices: impl Iterator<Item = usize>,
    codebook_size: usize,
) -> Result<UtilizationReport> {
    if codebook_size == 0 {
        bail!(Usage, "codebook size must be positive");
    }
    let mut hist = vec![0u64; codebook_size];
    for idx in indices {
        if idx >= codebook_size {
            bail!(Data, "token {idx} outside codebook of size {codebook_size}");
        }
        hist[idx] += 1;
    }
    Ok(report_from_histogram(hist))
}

pub fn report_from_histogram(hist: Vec<u64>) -> UtilizationReport {
    let c = hist.len() as f64;
    let total: u64 = hist.iter().sum();
    let used = hist.iter().filter(|&&h| h > 0).count();
    let mean = total as f64 / c;
    let var = hist
        .iter()
        .map(|&h| (h as f64 - mean).powi(2))
        .sum::<f64>()
        / c;
    UtilizationReport {
        codebook_size: hist.len(),
        total_tokens: total,
        used_fraction: used as f64 / c,
        frequency_histogram: hist,
        frequency_sd: var.sqrt(),
    }
}
