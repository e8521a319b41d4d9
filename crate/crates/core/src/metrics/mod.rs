//! Evaluation: DTW alignment, joint and vertex position errors with optional
//! rigid alignment, BLEU-4 and ROUGE-L.

mod dtw;
mod joints;
mod procrustes;
mod report;
mod text;


pub use dtw::{dtw, AlignmentPath};
pub use joints::{dtw_jpe, joint_alignment_path, path_error, Alignment, JointSequence};
pub use procrustes::{procrustes_align, RigidAlignment};
pub use report::{
    sequence_metrics, MetricReport, KEY_BLEU4, KEY_JPE, KEY_PA_JPE, KEY_ROUGE_L, KEY_VPE,
};
pub use text::{bleu4, lcs_len, rouge_l, tokenize, BleuSmoothing, ROUGE_BETA_SQ};
