use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::joints::{joint_alignment_path, path_error, Alignment, JointSequence};
use crate::error::Result;

pub const KEY_JPE: &str = "dtw_jpe";
pub const KEY_PA_JPE: &str = "dtw_pa_jpe";
pub const KEY_VPE: &str = "dtw_vpe";
pub const KEY_BLEU4: &str = "bleu4";
pub const KEY_ROUGE_L: &str = "rouge_l";

/// Per-sequence and corpus metric values under stable key names.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub sequences: Vec<BTreeMap<String, f64>>,
    pub corpus: BTreeMap<String, f64>,
}

impl MetricReport {
    pub fn push_sequence(&mut self, values: BTreeMap<String, f64>) {
        self.sequences.push(values);
    }

    /// Set each corpus key that appears in the per-sequence entries to its
    /// mean over the sequences that report it.
    pub fn aggregate(&mut self) {
        let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        for s in &self.sequences {
            for (k, &v) in s {
                let e = sums.entry(k).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
        }
        for (k, (sum, n)) in sums {
            self.corpus.insert(k.to_string(), sum / n as f64);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Joint errors (plain and rigidly aligned) on one DTW path, plus the vertex
/// error when meshes are supplied.
pub fn sequence_metrics(
    pred: &JointSequence,
    gt: &JointSequence,
    vertices: Option<(&JointSequence, &JointSequence)>,
) -> Result<BTreeMap<String, f64>> {
    let path = joint_alignment_path(pred, gt)?;
    let mut out = BTreeMap::new();
    out.insert(KEY_JPE.into(), path_error(pred, gt, &path, Alignment::None)?);
    out.insert(
        KEY_PA_JPE.into(),
        path_error(pred, gt, &path, Alignment::Procrustes)?,
    );
    if let Some((pv, gv)) = vertices {
        let vpath = joint_alignment_path(pv, gv)?;
        out.insert(KEY_VPE.into(), path_error(pv, gv, &vpath, Alignment::None)?);
    }
    Ok(out)
}
