use crate::error::{bail, Result};

/// Activity thresholds for window trimming, in model units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimThresholds {
    /// Wrist rise above its rest height.
    pub height: f64,
    /// Wrist distance from its rest position.
    pub displacement: f64,
}

impl TrimThresholds {
    /// 5% and 10% of the torso height.
    pub fn from_torso_height(torso: f64) -> Self {
        TrimThresholds {
            height: 0.05 * torso,
            displacement: 0.10 * torso,
        }
    }
}

/// Half-open frame range `[start, end)` of active signing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigningWindow {
    pub start: usize,
    pub end: usize,
}

impl SigningWindow {
    /// No frame crossed either threshold.
    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }
}

/// Wrist positions for one frame: `[left, right]`, y up.
pub type Wrists = [[f64; 3]; 2];

pub fn is_active(frame: &Wrists, rest: &Wrists, t: &TrimThresholds) -> bool {
    frame.iter().zip(rest).any(|(w, r)| {
        let dist = w.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        w[1] > r[1] + t.height || dist > t.displacement
    })
}

/// Drop the leading and trailing frames in which both hands stay near rest.
/// The window runs from the first active frame through the last one; an
/// all-rest sequence yields an empty window at 0.
pub fn trim_signing_window(
    wrists: &[Wrists],
    rest: &Wrists,
    thresholds: TrimThresholds,
) -> Result<SigningWindow> {
    if !(thresholds.height > 0.0 && thresholds.displacement > 0.0) {
        bail!(Usage, "trim thresholds must be positive");
    }
    let active = |f: &Wrists| is_active(f, rest, &thresholds);
    let Some(start) = wrists.iter().position(active) else {
        return Ok(SigningWindow { start: 0, end: 0 });
    };
    let end = wrists.iter().rposition(active).map_or(start, |i| i + 1);
    Ok(SigningWindow { start, end })
}

/// Merge four equal-length per-modality sequences into one, ordered body,
/// left hand, right hand, face within each time step.
pub fn interleave<T: Clone>(streams: [&[T]; 4]) -> Result<Vec<T>> {
    let t = streams[0].len();
    if streams.iter().any(|s| s.len() != t) {
        let lens: Vec<usize> = streams.iter().map(|s| s.len()).collect();
        bail!(Usage, "modality sequences differ in length: {lens:?}");
    }
    Ok((0..t)
        .flat_map(|u| streams.iter().map(move |s| s[u].clone()))
        .collect())
}

pub fn deinterleave<T: Clone>(seq: &[T]) -> Result<[Vec<T>; 4]> {
    if seq.len() % 4 != 0 {
        bail!(Usage, "interleaved length {} is not a multiple of 4", seq.len());
    }
    let mut out: [Vec<T>; 4] = Default::default();
    for (i, x) in seq.iter().enumerate() {
        out[i % 4].push(x.clone());
    }
    Ok(out)
}
