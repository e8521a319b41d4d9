use super::dtw::{dtw, AlignmentPath};
use super::procrustes::procrustes_align;
use crate::error::{bail, Result};

/// `T × N × 3` positions: joints, or mesh vertices for vertex errors.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSequence {
    frames: Vec<Vec<[f64; 3]>>,
}

impl JointSequence {
    pub fn new(frames: Vec<Vec<[f64; 3]>>) -> Result<Self> {
        let Some(first) = frames.first() else {
            bail!(Usage, "joint sequence needs at least one frame");
        };
        let n = first.len();
        if n == 0 {
            bail!(Usage, "joint sequence frames are empty");
        }
        for (t, f) in frames.iter().enumerate() {
            if f.len() != n {
                bail!(Data, "frame {t} has {} points, expected {n}", f.len());
            }
            if f.iter().flatten().any(|v| !v.is_finite()) {
                bail!(Data, "frame {t} has non-finite coordinates");
            }
        }
        Ok(JointSequence { frames })
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn n_points(&self) -> usize {
        self.frames[0].len()
    }

    pub fn frames(&self) -> &[Vec<[f64; 3]>] {
        &self.frames
    }

    /// Restrict every frame to the given point indices.
    pub fn select(&self, indices: &[usize]) -> Result<JointSequence> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_points()) {
            bail!(Usage, "point index {bad} out of range {}", self.n_points());
        }
        JointSequence::new(
            self.frames
                .iter()
                .map(|f| indices.iter().map(|&i| f[i]).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    None,
    /// Per-frame rigid Procrustes of the prediction onto the ground truth.
    Procrustes,
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Euclidean norm of the stacked joint difference.
fn frame_distance(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (0..3).map(|k| (p[k] - q[k]).powi(2)).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

fn mean_point_error(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    a.iter().zip(b).map(|(p, q)| dist3(p, q)).sum::<f64>() / a.len() as f64
}

/// DTW path between two sequences under the stacked-joint L2 distance.
pub fn joint_alignment_path(pred: &JointSequence, gt: &JointSequence) -> Result<AlignmentPath> {
    if pred.n_points() != gt.n_points() {
        bail!(
            Usage,
            "joint counts differ: {} vs {}",
            pred.n_points(),
            gt.n_points()
        );
    }
    Ok(dtw(pred.frames(), gt.frames(), |a, b| frame_distance(a, b))?.1)
}

/// Mean per-point error along a given alignment path.
pub fn path_error(
    pred: &JointSequence,
    gt: &JointSequence,
    path: &AlignmentPath,
    align: Alignment,
) -> Result<f64> {
    let mut total = 0.0;
    for &(i, j) in path.pairs() {
        let (p, g) = (&pred.frames()[i], &gt.frames()[j]);
        total += match align {
            Alignment::None => mean_point_error(p, g),
            Alignment::Procrustes => mean_point_error(&procrustes_align(p, g)?.aligned, g),
        };
    }
    Ok(total / path.len() as f64)
}

/// Mean per-joint position error after DTW alignment. The path always comes
/// from raw positions; Procrustes only affects the error measurement.
pub fn dtw_jpe(pred: &JointSequence, gt: &JointSequence, align: Alignment) -> Result<f64> {
    let path = joint_alignment_path(pred, gt)?;
    path_error(pred, gt, &path, align)
}
