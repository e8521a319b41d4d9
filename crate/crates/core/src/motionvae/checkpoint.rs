use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::VaeConfig;
use super::network::Vae;
use crate::error::{bail, Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NamedArray {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Versioned JSON checkpoint: the config followed by every parameter in
/// network order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    version: u32,
    config: VaeConfig,
    parameters: Vec<NamedArray>,
}

pub fn vae_to_json(vae: &Vae) -> Result<String> {
    let ckpt = Checkpoint {
        version: CHECKPOINT_VERSION,
        config: vae.config().clone(),
        parameters: vae
            .parameters()
            .iter()
            .map(|p| NamedArray {
                name: p.name.clone(),
                shape: p.shape().to_vec(),
                data: p.value().to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&ckpt)?)
}

pub fn vae_from_json(text: &str) -> Result<Vae> {
    let ckpt: Checkpoint = serde_json::from_str(text).map_err(Error::json_parse)?;
    if ckpt.version != CHECKPOINT_VERSION {
        bail!(Load, "unsupported checkpoint version {}", ckpt.version);
    }
    ckpt.config
        .validate()
        .map_err(|e| Error::Load(format!("checkpoint config: {e}")))?;
    Vae::from_parameters(
        ckpt.config,
        ckpt.parameters
            .into_iter()
            .map(|a| (a.name, a.shape, a.data))
            .collect(),
    )
}

pub fn save_vae(vae: &Vae, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, vae_to_json(vae)?).map_err(|e| Error::io(path, e))
}

pub fn load_vae(path: impl AsRef<Path>) -> Result<Vae> {
    let path = path.as_ref();
    vae_from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
