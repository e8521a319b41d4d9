use std::fmt::Write as _;
use std::path::Path;

use crate::error::{bail, Error, Result};

const HEADER: &str = "KEYPOINTS";

/// A 2-D detection with its confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

/// Per-frame 2-D keypoints, every frame holding the same number of points.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointSequence {
    frames: Vec<Vec<Keypoint>>,
}

impl KeypointSequence {
    pub fn new(frames: Vec<Vec<Keypoint>>) -> Result<KeypointSequence> {
        let points = frames.first().map_or(0, Vec::len);
        for (t, frame) in frames.iter().enumerate() {
            if frame.len() != points {
                bail!(Data, "frame {t} has {} keypoints, frame 0 has {points}", frame.len());
            }
            for (k, kp) in frame.iter().enumerate() {
                if !(0.0..=1.0).contains(&kp.confidence) {
                    bail!(Data, "keypoint {k} of frame {t} has confidence {} outside [0, 1]", kp.confidence);
                }
                if !(kp.x.is_finite() && kp.y.is_finite()) {
                    bail!(Data, "keypoint {k} of frame {t} is not finite");
                }
            }
        }
        Ok(KeypointSequence { frames })
    }

    pub fn frames(&self) -> &[Vec<Keypoint>] {
        &self.frames
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn n_points(&self) -> usize {
        self.frames.first().map_or(0, Vec::len)
    }

    /// Text form: a `KEYPOINTS <frames> <points>` header, then one line per
    /// frame of `x y confidence` triples.
    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER} {} {}\n", self.n_frames(), self.n_points());
        for frame in &self.frames {
            let fields: Vec<String> = frame
                .iter()
                .map(|k| format!("{} {} {}", k.x, k.y, k.confidence))
                .collect();
            let _ = writeln!(out, "{}", fields.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<KeypointSequence> {
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing keypoint header".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let (n_frames, n_points) = match head.as_slice() {
            [tag, f, p] if *tag == HEADER => (
                f.parse::<usize>()
                    .map_err(|e| parse_err(hline, format!("frame count: {e}")))?,
                p.parse::<usize>()
                    .map_err(|e| parse_err(hline, format!("point count: {e}")))?,
            ),
            _ => return Err(parse_err(hline, format!("expected `{HEADER} <frames> <points>`"))),
        };
        let mut frames = Vec::with_capacity(n_frames);
        for (line, body) in lines {
            if frames.len() == n_frames {
                return Err(parse_err(line, format!("more than {n_frames} frames")));
            }
            let values = body
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|e| parse_err(line, format!("{v:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if values.len() != 3 * n_points {
                return Err(parse_err(
                    line,
                    format!("expected {} values, found {}", 3 * n_points, values.len()),
                ));
            }
            frames.push(
                values
                    .chunks_exact(3)
                    .map(|c| Keypoint {
                        x: c[0],
                        y: c[1],
                        confidence: c[2],
                    })
                    .collect(),
            );
        }
        if frames.len() != n_frames {
            let last = text.lines().count().max(1);
            return Err(parse_err(last, format!("header promises {n_frames} frames, found {}", frames.len())));
        }
        KeypointSequence::new(frames)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<KeypointSequence> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
