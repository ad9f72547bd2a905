//! Text embedding: fixed-dimension vectors for single texts and
//! conditioned text pairs, cosine similarity, a persistent embedding
//! cache, and the subprocess plugin protocol that stands in for
//! pretrained transformer encoders.

pub mod cache;
pub mod plugin;
pub mod reference;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{CachedEncoder, EmbeddingCache};
pub use reference::ReferenceEncoder;

/// Default embedding dimension when nothing else is configured.
pub const DEFAULT_DIMENSION: usize = 768;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodeMode {
    Single,
    Pair,
}

/// A fixed-dimension embedding standing in for a summary token output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub source: String,
    pub mode: EncodeMode,
}

impl EmbeddingVector {
    pub fn dimension(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EncoderKind {
    Reference,
    /// External process speaking the plugin protocol; `command` is split on
    /// whitespace into program and arguments.
    Plugin { command: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSpec {
    #[serde(flatten)]
    pub kind: EncoderKind,
    /// Requested dimension. Plugins declare their own in the handshake,
    /// which wins; the reference encoder uses this value.
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    /// Trainable encoders are re-queried every epoch instead of cached.
    /// The reference encoder is always frozen.
    #[serde(default)]
    pub trainable: bool,
    /// Per-request plugin timeout in seconds; ignored by the reference
    /// encoder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_secs: Option<u64>,
}

fn default_dimension() -> usize {
    DEFAULT_DIMENSION
}

impl Default for EncoderSpec {
    fn default() -> Self {
        EncoderSpec {
            kind: EncoderKind::Reference,
            dimension: DEFAULT_DIMENSION,
            trainable: false,
            timeout_secs: None,
        }
    }
}

impl EncoderSpec {
    pub fn reference(dimension: usize) -> Self {
        EncoderSpec {
            kind: EncoderKind::Reference,
            dimension,
            trainable: false,
            timeout_secs: None,
        }
    }

    /// Parse a CLI-style name: `reference` or `plugin:CMD`.
    pub fn parse(name: &str, dimension: usize) -> Result<Self> {
        if name == "reference" {
            return Ok(EncoderSpec::reference(dimension));
        }
        if let Some(command) = name.strip_prefix("plugin:") {
            return Ok(EncoderSpec {
                kind: EncoderKind::Plugin {
                    command: command.to_string(),
                },
                dimension,
                trainable: false,
                timeout_secs: None,
            });
        }
        Err(Error::Config(format!("unknown encoder `{name}`")))
    }

    pub fn build(&self) -> Result<Arc<dyn Encoder>> {
        let timeout = self.timeout_secs.map(std::time::Duration::from_secs);
        match &self.kind {
            EncoderKind::Reference => Ok(Arc::new(ReferenceEncoder::new(self.dimension)?)),
            EncoderKind::Plugin { command } => {
                Ok(Arc::new(plugin::PluginEncoder::spawn(command, timeout)?))
            }
        }
    }

    pub fn display_name(&self) -> String {
        match &self.kind {
            EncoderKind::Reference => "reference".into(),
            EncoderKind::Plugin { command } => format!("plugin:{command}"),
        }
    }
}

/// Something that turns text into fixed-dimension vectors.
pub trait Encoder: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn encode_single(&self, text: &str) -> Result<EmbeddingVector>;
    fn encode_pair(&self, text_a: &str, text_b: &str) -> Result<EmbeddingVector>;
}

/// Cosine of the angle between two vectors.
pub fn cosine_raw(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    cosine_raw(&u.values, &v.values)
}
