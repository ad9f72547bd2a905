//! Run configuration and the run manifest. A manifest is a resolved
//! configuration snapshot plus input digests; it is written before any
//! training step and suffices to reproduce the run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fpe_core::encoding::EncoderSpec;
use fpe_core::error::{Error, Result};
use fpe_core::history::{HistoryConfig, HistoryKind, DEFAULT_DYNAMIC_LENGTH, DEFAULT_STATIC_LENGTH};
use fpe_core::labeling::LabelerSpec;
use fpe_core::models::checkpoint::file_digest;
use fpe_core::models::ModelKind;
use fpe_core::training::{ModelHyper, TrainConfig};

use crate::args::CommonArgs;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSettings {
    pub test_frac: f64,
    pub val_frac: f64,
    pub min_comments: usize,
}

impl Default for SplitSettings {
    fn default() -> Self {
        SplitSettings {
            test_frac: 0.1,
            val_frac: 0.1,
            min_comments: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub model: ModelKind,
    pub train: TrainConfig,
    pub history: HistoryConfig,
    pub encoder: EncoderSpec,
    pub labelers: Vec<LabelerSpec>,
    pub hyper: ModelHyper,
    pub split: SplitSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelKind::DynamicFpe,
            train: TrainConfig::default(),
            history: HistoryConfig::default(),
            encoder: EncoderSpec::default(),
            labelers: vec![LabelerSpec::Lexicon],
            hyper: ModelHyper::default(),
            split: SplitSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub seed: u64,
    pub corpus_path: PathBuf,
    pub corpus_digest: String,
    pub config: RunConfig,
    pub artifacts: ArtifactPaths,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactPaths {
    pub checkpoint: PathBuf,
    pub history_csv: PathBuf,
}

/// Load a run config. Accepts either a bare `RunConfig` JSON file or a
/// manifest (whose `config` field is extracted).
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let raw = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&raw)?;
    if value.get("config").is_some() {
        let manifest: Manifest = serde_json::from_value(value)?;
        Ok(manifest.config)
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

/// Resolve the effective configuration: file first, then flag overrides.
pub fn resolve_config(common: &CommonArgs, manifest: Option<&Path>) -> Result<RunConfig> {
    let mut config = match (manifest, &common.config) {
        (Some(path), _) => load_config(path)?,
        (None, Some(path)) => load_config(path)?,
        (None, None) => RunConfig::default(),
    };

    if let Some(model) = &common.model {
        config.model = ModelKind::parse(model)?;
    }
    if let Some(history) = &common.history {
        config.history.kind = match history.as_str() {
            "static" => HistoryKind::Static,
            "dynamic" => HistoryKind::Dynamic,
            other => return Err(Error::Config(format!("unknown history kind `{other}`"))),
        };
        // Changing the kind without a length picks that kind's default.
        if common.length.is_none() {
            config.history.length = match config.history.kind {
                HistoryKind::Static => DEFAULT_STATIC_LENGTH,
                HistoryKind::Dynamic => DEFAULT_DYNAMIC_LENGTH,
            };
        }
    }
    if let Some(length) = common.length {
        config.history.length = length;
    }
    if let Some(dimension) = common.dimension {
        config.encoder.dimension = dimension;
    }
    if let Some(encoder) = &common.encoder {
        config.encoder = EncoderSpec::parse(encoder, config.encoder.dimension)?;
    }
    if let Some(labeler) = &common.labeler {
        let spec = LabelerSpec::parse(labeler)?;
        config.train.labeler = spec.label_name();
        if !config.labelers.contains(&spec) {
            config.labelers.push(spec);
        }
    }
    if let Some(seed) = common.seed {
        config.train.seed = seed;
    }
    Ok(config)
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

pub fn build_manifest(
    config: &RunConfig,
    corpus_path: &Path,
    out_dir: &Path,
) -> Result<Manifest> {
    Ok(Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.train.seed,
        corpus_path: corpus_path.to_path_buf(),
        corpus_digest: format!("sha256:{}", file_digest(corpus_path)?),
        config: config.clone(),
        artifacts: ArtifactPaths {
            checkpoint: out_dir.join("checkpoint.fpe"),
            history_csv: out_dir.join("history.csv"),
        },
    })
}
