//! Self-describing model checkpoint container: versioned magic header, a
//! JSON configuration block, then named parameter tensors in fixed order.
//! Saving the same model twice produces byte-identical files.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::encoding::EncoderSpec;
use crate::error::{Error, Result};
use crate::history::HistoryConfig;
use crate::labeling::ClassThresholds;

use super::bpe::BpeVocab;
use super::{
    BaselineConfig, BaselineFpe, DynamicFpe, DynamicFpeConfig, Model, ModelKind, Parameterized,
    StaticFpe, StaticFpeConfig,
};

const MAGIC: &[u8; 8] = b"FPECHKP1";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineMeta {
    pub vocab: BpeVocab,
    pub token_embed_dim: usize,
    pub text_hidden_dim: usize,
    pub max_tokens: usize,
}

/// Everything needed to rebuild the model shell and to evaluate it the way
/// it was trained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub model: ModelKind,
    pub classes: usize,
    /// Track embedding dimension; unused by the baseline.
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub encoder: EncoderSpec,
    pub labeler: String,
    pub history: HistoryConfig,
    pub thresholds: ClassThresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineMeta>,
}

/// Build a zero-initialized model matching the checkpoint configuration.
pub fn model_from_meta(meta: &CheckpointMeta) -> Result<Model> {
    match meta.model {
        ModelKind::StaticFpe => Ok(Model::Static(StaticFpe::zeros(StaticFpeConfig {
            embed_dim: meta.embed_dim,
            hidden_dim: meta.hidden_dim,
            classes: meta.classes,
        }))),
        ModelKind::DynamicFpe => Ok(Model::Dynamic(DynamicFpe::zeros(DynamicFpeConfig {
            embed_dim: meta.embed_dim,
            hidden_dim: meta.hidden_dim,
            classes: meta.classes,
        }))),
        ModelKind::Baseline => {
            let b = meta
                .baseline
                .as_ref()
                .ok_or_else(|| Error::Checkpoint("baseline checkpoint missing vocabulary".into()))?;
            let cfg = BaselineConfig {
                token_embed_dim: b.token_embed_dim,
                text_hidden_dim: b.text_hidden_dim,
                hidden_dim: meta.hidden_dim,
                classes: meta.classes,
                max_tokens: b.max_tokens,
            };
            Ok(Model::Baseline(BaselineFpe::zeros(
                cfg,
                b.vocab.clone().reindex(),
            )))
        }
    }
}

pub fn save_checkpoint(path: &Path, model: &Model, meta: &CheckpointMeta) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());

    let meta_json = serde_json::to_vec(meta)?;
    out.extend_from_slice(&(meta_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta_json);

    let tensors = model.tensors();
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for tensor in tensors {
        let name = tensor.name.as_bytes();
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name);
        out.push(tensor.shape.len() as u8);
        for &dim in &tensor.shape {
            out.extend_from_slice(&(dim as u64).to_le_bytes());
        }
        for &value in tensor.data {
            out.extend_from_slice(&value.to_le_bytes());
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(Model, CheckpointMeta)> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic header".into()));
    }
    let version = read_u32(&mut file)?;
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version}"
        )));
    }
    let meta_len = read_u32(&mut file)? as usize;
    let mut meta_bytes = vec![0u8; meta_len];
    file.read_exact(&mut meta_bytes)?;
    let meta: CheckpointMeta = serde_json::from_slice(&meta_bytes)?;

    let mut model = model_from_meta(&meta)?;
    let tensor_count = read_u32(&mut file)? as usize;
    let mut loaded: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
    for _ in 0..tensor_count {
        let name_len = read_u16(&mut file)? as usize;
        let mut name_bytes = vec![0u8; name_len];
        file.read_exact(&mut name_bytes)?;
        let name = String::from_utf8(name_bytes)
            .map_err(|_| Error::Checkpoint("non-utf8 tensor name".into()))?;
        let rank = read_u8(&mut file)? as usize;
        let mut len = 1usize;
        for _ in 0..rank {
            len *= read_u64(&mut file)? as usize;
        }
        let mut data = vec![0f64; len];
        for value in &mut data {
            let mut buf = [0u8; 8];
            file.read_exact(&mut buf)?;
            *value = f64::from_le_bytes(buf);
        }
        loaded.insert(name, data);
    }

    for tensor in model.tensors_mut() {
        let data = loaded.remove(&tensor.name).ok_or_else(|| {
            Error::Checkpoint(format!("checkpoint missing tensor `{}`", tensor.name))
        })?;
        if data.len() != tensor.data.len() {
            return Err(Error::Checkpoint(format!(
                "tensor `{}` has {} values, expected {}",
                tensor.name,
                data.len(),
                tensor.data.len()
            )));
        }
        tensor.data.copy_from_slice(&data);
    }
    if let Some(extra) = loaded.keys().next() {
        return Err(Error::Checkpoint(format!(
            "checkpoint has unexpected tensor `{extra}`"
        )));
    }
    Ok((model, meta))
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut buf = [0u8; 1];
    r.read_exact(&mut buf)?;
    Ok(buf[0])
}

fn read_u16<R: Read>(r: &mut R) -> Result<u16> {
    let mut buf = [0u8; 2];
    r.read_exact(&mut buf)?;
    Ok(u16::from_le_bytes(buf))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Hex sha-256 of a file, used to compare run artifacts.
pub fn file_digest(path: &Path) -> Result<String> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
