use std::path::{Path, PathBuf};

use m3t_core::bodymodel::PoseParams;
use m3t_core::motionvae::{load_motion, MotionSequence};
use m3t_core::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn is_motion_file(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e == "m3tk" || e == "json")
}

/// Motion files under `path` in name order, or `path` itself.
pub fn motion_paths(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if !meta.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out = Vec::new();
    for entry in std::fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let p = entry.map_err(|e| Error::io(path, e))?.path();
        if p.is_file() && is_motion_file(&p) {
            out.push(p);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(Error::Usage(format!("no motion files in {}", path.display())));
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<MotionSequence>> {
    motion_paths(path)?.iter().map(load_motion).collect()
}

pub fn load_poses(path: &Path) -> Result<Vec<PoseParams>> {
    serde_json::from_str(&read_text(path)?).map_err(Error::json_parse)
}

pub fn save_poses(path: &Path, poses: &[PoseParams]) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(poses)?)
}

/// One whitespace-tokenized sentence per line.
pub fn load_sentences(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(read_text(path)?
        .lines()
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect())
}

/// `<path>.trace.tsv` next to an output file.
pub fn default_trace(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".trace.tsv");
    PathBuf::from(name)
}
