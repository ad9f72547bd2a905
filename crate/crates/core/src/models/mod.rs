//! The three predictive architectures (static fingerprint, dynamic
//! fingerprint, and the subword baseline) over a shared recurrent encoder
//! and affine heads, with exact analytic gradients.

pub mod baseline;
pub mod bpe;
pub mod checkpoint;
pub mod dynamic_fpe;
pub mod gru;
pub mod math;
pub mod params;
pub mod static_fpe;

use std::collections::BTreeMap;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::corpus::{ArticleId, UserId};
use crate::encoding::EmbeddingVector;
use crate::error::{Error, Result};
use crate::history::TrackSequence;

pub use baseline::{BaselineConfig, BaselineForward, BaselineFpe};
pub use dynamic_fpe::{DynamicForward, DynamicFpe, DynamicFpeConfig};
pub use gru::{Affine, GruForward, GruStack};
pub use params::{Parameterized, TensorMut, TensorRef};
pub use static_fpe::{StaticForward, StaticFpe, StaticFpeConfig};

pub const DEFAULT_HIDDEN_DIM: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    StaticFpe,
    DynamicFpe,
    Baseline,
}

impl ModelKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "static_fpe" => Ok(ModelKind::StaticFpe),
            "dynamic_fpe" => Ok(ModelKind::DynamicFpe),
            "baseline" => Ok(ModelKind::Baseline),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::StaticFpe => "static_fpe",
            ModelKind::DynamicFpe => "dynamic_fpe",
            ModelKind::Baseline => "baseline",
        }
    }
}

/// Final hidden state(s) summarizing a user's history for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fingerprint {
    Static(Vec<f64>),
    Dynamic { reading: Vec<f64>, writing: Vec<f64> },
    Baseline(Vec<f64>),
}

impl Fingerprint {
    /// Flatten to one vector (dynamic fingerprints concatenate reading
    /// then writing).
    pub fn flat(&self) -> Vec<f64> {
        match self {
            Fingerprint::Static(h) | Fingerprint::Baseline(h) => h.clone(),
            Fingerprint::Dynamic { reading, writing } => {
                let mut out = reading.clone();
                out.extend_from_slice(writing);
                out
            }
        }
    }
}

/// One (target interaction, history window, tracks) instance, ready for a
/// model. Fingerprint models carry embedded tracks; the baseline carries
/// the raw texts.
#[derive(Debug, Clone)]
pub struct Example {
    pub user_id: UserId,
    pub target_article: ArticleId,
    pub data: ExampleData,
    /// Class code of each window item's comment under the active labeler.
    pub step_labels: Vec<usize>,
    /// Class code of the target comment under the active labeler.
    pub final_label: usize,
    /// Class code of the target comment under every available labeler.
    pub golds: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub enum ExampleData {
    Tracks {
        reading: Vec<Array1<f64>>,
        writing: Vec<Array1<f64>>,
        target_cls: Array1<f64>,
    },
    Texts {
        /// (title, comment body) per window item, chronological.
        items: Vec<(String, String)>,
        target_title: String,
    },
}

impl Example {
    pub fn window_len(&self) -> usize {
        match &self.data {
            ExampleData::Tracks { reading, .. } => reading.len(),
            ExampleData::Texts { items, .. } => items.len(),
        }
    }
}

pub enum ModelForward {
    Static(StaticForward),
    Dynamic(DynamicForward),
    Baseline(BaselineForward),
}

impl ModelForward {
    pub fn step_logits(&self) -> &[Array1<f64>] {
        match self {
            ModelForward::Static(f) => &f.step_logits,
            ModelForward::Dynamic(f) => &f.step_logits,
            ModelForward::Baseline(_) => &[],
        }
    }

    pub fn final_logits(&self) -> &Array1<f64> {
        match self {
            ModelForward::Static(f) => &f.final_logits,
            ModelForward::Dynamic(f) => &f.final_logits,
            ModelForward::Baseline(f) => &f.final_logits,
        }
    }

    pub fn fingerprint(&self) -> Fingerprint {
        match self {
            ModelForward::Static(f) => Fingerprint::Static(f.fingerprint()),
            ModelForward::Dynamic(f) => Fingerprint::Dynamic {
                reading: f.reading_fingerprint(),
                writing: f.writing_fingerprint(),
            },
            ModelForward::Baseline(f) => Fingerprint::Baseline(f.fingerprint()),
        }
    }
}

#[derive(Clone)]
pub enum Model {
    Static(StaticFpe),
    Dynamic(DynamicFpe),
    Baseline(BaselineFpe),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Static(_) => ModelKind::StaticFpe,
            Model::Dynamic(_) => ModelKind::DynamicFpe,
            Model::Baseline(_) => ModelKind::Baseline,
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            Model::Static(m) => m.cfg.classes,
            Model::Dynamic(m) => m.cfg.classes,
            Model::Baseline(m) => m.cfg.classes,
        }
    }

    /// A structurally identical model with every parameter zeroed, used as
    /// a gradient accumulator.
    pub fn zeros_like(&self) -> Model {
        match self {
            Model::Static(m) => Model::Static(StaticFpe::zeros(m.cfg)),
            Model::Dynamic(m) => Model::Dynamic(DynamicFpe::zeros(m.cfg)),
            Model::Baseline(m) => Model::Baseline(BaselineFpe::zeros(m.cfg, m.vocab.clone())),
        }
    }

    pub fn forward_example(&self, example: &Example) -> Result<ModelForward> {
        match (self, &example.data) {
            (Model::Static(m), ExampleData::Tracks { reading, writing, target_cls }) => {
                Ok(ModelForward::Static(m.forward(reading, writing, target_cls)?))
            }
            (Model::Dynamic(m), ExampleData::Tracks { reading, writing, target_cls }) => {
                Ok(ModelForward::Dynamic(m.forward(reading, writing, target_cls)?))
            }
            (Model::Baseline(m), ExampleData::Texts { items, target_title }) => {
                Ok(ModelForward::Baseline(m.forward(items, target_title)?))
            }
            _ => Err(Error::Config(
                "example data kind does not match model kind".into(),
            )),
        }
    }

    /// Accumulate one example's parameter gradients into `grads` given the
    /// loss gradients on the logits.
    pub fn backward_example(
        &self,
        fwd: &ModelForward,
        d_step_logits: &[Array1<f64>],
        d_final_logits: &Array1<f64>,
        grads: &mut Model,
    ) {
        match (self, fwd, grads) {
            (Model::Static(m), ModelForward::Static(f), Model::Static(g)) => {
                m.backward(f, d_step_logits, d_final_logits, g)
            }
            (Model::Dynamic(m), ModelForward::Dynamic(f), Model::Dynamic(g)) => {
                m.backward(f, d_step_logits, d_final_logits, g)
            }
            (Model::Baseline(m), ModelForward::Baseline(f), Model::Baseline(g)) => {
                m.backward(f, d_final_logits, g)
            }
            _ => unreachable!("forward/grads built from this model"),
        }
    }
}

impl Parameterized for Model {
    fn tensors(&self) -> Vec<TensorRef<'_>> {
        match self {
            Model::Static(m) => m.tensors(),
            Model::Dynamic(m) => m.tensors(),
            Model::Baseline(m) => m.tensors(),
        }
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        match self {
            Model::Static(m) => m.tensors_mut(),
            Model::Dynamic(m) => m.tensors_mut(),
            Model::Baseline(m) => m.tensors_mut(),
        }
    }
}

fn track_arrays(track: &TrackSequence) -> Vec<Array1<f64>> {
    track
        .vectors
        .iter()
        .map(|v| Array1::from_vec(v.values.clone()))
        .collect()
}

/// Run the recurrent encoder alone over a sequence of embeddings,
/// returning the per-step last-layer hidden states and the final hidden
/// state.
pub fn gru_forward(stack: &GruStack, sequence: &[EmbeddingVector]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let inputs: Vec<Array1<f64>> = sequence
        .iter()
        .map(|v| Array1::from_vec(v.values.clone()))
        .collect();
    let fwd = stack.forward(&inputs)?;
    let states = fwd.states().iter().map(|h| h.to_vec()).collect();
    Ok((states, fwd.final_hidden().to_vec()))
}

/// Track-level entry point for the static model.
pub fn static_fpe_forward(
    model: &StaticFpe,
    reading: &TrackSequence,
    writing: &TrackSequence,
    target_cls: &EmbeddingVector,
) -> Result<(Vec<Array1<f64>>, Array1<f64>, Fingerprint)> {
    let fwd = model.forward(
        &track_arrays(reading),
        &track_arrays(writing),
        &Array1::from_vec(target_cls.values.clone()),
    )?;
    let fingerprint = Fingerprint::Static(fwd.fingerprint());
    Ok((fwd.step_logits, fwd.final_logits, fingerprint))
}

/// Track-level entry point for the dynamic model.
pub fn dynamic_fpe_forward(
    model: &DynamicFpe,
    reading: &TrackSequence,
    writing: &TrackSequence,
    target_cls: &EmbeddingVector,
) -> Result<(Vec<Array1<f64>>, Array1<f64>, Fingerprint)> {
    let fwd = model.forward(
        &track_arrays(reading),
        &track_arrays(writing),
        &Array1::from_vec(target_cls.values.clone()),
    )?;
    let fingerprint = Fingerprint::Dynamic {
        reading: fwd.reading_fingerprint(),
        writing: fwd.writing_fingerprint(),
    };
    Ok((fwd.step_logits, fwd.final_logits, fingerprint))
}

/// Raw-text entry point for the baseline model.
pub fn baseline_fpe_forward(
    model: &BaselineFpe,
    items: &[(String, String)],
    target_title: &str,
) -> Result<Array1<f64>> {
    Ok(model.forward(items, target_title)?.final_logits)
}
