use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sequence::MotionSequence;
use crate::error::{bail, Error, Result};
use crate::types::Modality;

pub const MOTION_MAGIC: &[u8; 4] = b"M3TK";
pub const MOTION_VERSION: u16 = 1;
/// magic, version, modality, reserved byte, fps, frames, dim
const HEADER_LEN: usize = 4 + 2 + 1 + 1 + 8 + 4 + 4;

/// Binary motion file: little-endian header then `T × D` row-major f64.
pub fn motion_to_bytes(seq: &MotionSequence) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + seq.frames().len() * 8);
    out.extend_from_slice(MOTION_MAGIC);
    out.extend_from_slice(&MOTION_VERSION.to_le_bytes());
    out.push(seq.modality.index() as u8);
    out.push(0);
    out.extend_from_slice(&seq.fps.to_le_bytes());
    out.extend_from_slice(&(seq.n_frames() as u32).to_le_bytes());
    out.extend_from_slice(&(seq.dim() as u32).to_le_bytes());
    for v in seq.frames() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn take<const N: usize>(bytes: &[u8], at: usize) -> [u8; N] {
    bytes[at..at + N].try_into().expect("length checked")
}

pub fn motion_from_bytes(bytes: &[u8]) -> Result<MotionSequence> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MOTION_MAGIC {
        bail!(Load, "not an M3TK motion file");
    }
    let version = u16::from_le_bytes(take(bytes, 4));
    if version != MOTION_VERSION {
        bail!(Load, "unsupported motion file version {version}");
    }
    let Some(modality) = Modality::from_code(bytes[6]) else {
        bail!(Load, "unknown modality code {}", bytes[6]);
    };
    let fps = f64::from_le_bytes(take(bytes, 8));
    let frames = u32::from_le_bytes(take(bytes, 16)) as usize;
    let dim = u32::from_le_bytes(take(bytes, 20)) as usize;
    if dim != modality.frame_dim() {
        bail!(
            Load,
            "{} motion has {} values per frame, file says {dim}",
            modality.name(),
            modality.frame_dim()
        );
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != frames * dim * 8 {
        bail!(
            Load,
            "expected {} bytes of frame data, found {}",
            frames * dim * 8,
            body.len()
        );
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    MotionSequence::new(modality, fps, values).map_err(|e| Error::Load(e.to_string()))
}

/// Text form of a motion file, one array per frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MotionText {
    format: String,
    version: u16,
    modality: Modality,
    fps: f64,
    frames: Vec<Vec<f64>>,
}

pub fn motion_to_json(seq: &MotionSequence) -> String {
    let text = MotionText {
        format: "M3TK".into(),
        version: MOTION_VERSION,
        modality: seq.modality,
        fps: seq.fps,
        frames: (0..seq.n_frames()).map(|t| seq.frame(t).to_vec()).collect(),
    };
    serde_json::to_string_pretty(&text).expect("motion serializes")
}

pub fn motion_from_json(text: &str) -> Result<MotionSequence> {
    let m: MotionText = serde_json::from_str(text).map_err(Error::json_parse)?;
    if m.format != "M3TK" || m.version != MOTION_VERSION {
        bail!(Load, "unsupported motion text format {} v{}", m.format, m.version);
    }
    let dim = m.modality.frame_dim();
    if let Some(t) = m.frames.iter().position(|f| f.len() != dim) {
        bail!(Load, "frame {t} has {} values, expected {dim}", m.frames[t].len());
    }
    MotionSequence::new(m.modality, m.fps, m.frames.concat()).map_err(|e| Error::Load(e.to_string()))
}

fn is_json_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

/// Binary unless the path ends in `.json`.
pub fn save_motion(path: impl AsRef<Path>, seq: &MotionSequence) -> Result<()> {
    let path = path.as_ref();
    let bytes = if is_json_path(path) {
        motion_to_json(seq).into_bytes()
    } else {
        motion_to_bytes(seq)
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads either form; JSON is recognized by its extension.
pub fn load_motion(path: impl AsRef<Path>) -> Result<MotionSequence> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if is_json_path(path) {
        let text = String::from_utf8(bytes).map_err(|e| Error::Load(e.to_string()))?;
        motion_from_json(&text)
    } else {
        motion_from_bytes(&bytes)
    }
}
