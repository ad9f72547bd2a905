//! Dynamic fingerprint model: reading and writing tracks get their own
//! recurrent encoders (two layers for reading, one for writing) and their
//! own fingerprints. Step supervision applies to the reading encoder only;
//! the prediction head consumes [reading fp; writing fp; target embedding].

use ndarray::{concatenate, s, Array1, Axis};
use rand::Rng;

use crate::error::{Error, Result};

use super::gru::{Affine, GruForward, GruStack};
use super::params::{Parameterized, TensorMut, TensorRef};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicFpeConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicFpe {
    pub cfg: DynamicFpeConfig,
    pub reading_gru: GruStack,
    pub writing_gru: GruStack,
    pub step_head: Affine,
    pub head: Affine,
}

pub struct DynamicForward {
    reading_fwd: GruForward,
    writing_fwd: GruForward,
    final_in: Array1<f64>,
    pub step_logits: Vec<Array1<f64>>,
    pub final_logits: Array1<f64>,
}

impl DynamicForward {
    pub fn reading_fingerprint(&self) -> Vec<f64> {
        self.reading_fwd.final_hidden().to_vec()
    }

    pub fn writing_fingerprint(&self) -> Vec<f64> {
        self.writing_fwd.final_hidden().to_vec()
    }
}

impl DynamicFpe {
    pub fn zeros(cfg: DynamicFpeConfig) -> Self {
        DynamicFpe {
            cfg,
            reading_gru: GruStack::zeros("reading_gru", cfg.embed_dim, cfg.hidden_dim, 2),
            writing_gru: GruStack::zeros("writing_gru", cfg.embed_dim, cfg.hidden_dim, 1),
            step_head: Affine::zeros("step_head", cfg.hidden_dim, cfg.classes),
            head: Affine::zeros("head", 2 * cfg.hidden_dim + cfg.embed_dim, cfg.classes),
        }
    }

    pub fn init<R: Rng>(cfg: DynamicFpeConfig, rng: &mut R) -> Self {
        DynamicFpe {
            cfg,
            reading_gru: GruStack::init("reading_gru", cfg.embed_dim, cfg.hidden_dim, 2, rng),
            writing_gru: GruStack::init("writing_gru", cfg.embed_dim, cfg.hidden_dim, 1, rng),
            step_head: Affine::init("step_head", cfg.hidden_dim, cfg.classes, rng),
            head: Affine::init("head", 2 * cfg.hidden_dim + cfg.embed_dim, cfg.classes, rng),
        }
    }

    pub fn forward(
        &self,
        reading: &[Array1<f64>],
        writing: &[Array1<f64>],
        target_cls: &Array1<f64>,
    ) -> Result<DynamicForward> {
        if reading.is_empty() {
            return Err(Error::EmptySequence);
        }
        if reading.len() != writing.len() {
            return Err(Error::Shape(format!(
                "track length mismatch: reading {} vs writing {}",
                reading.len(),
                writing.len()
            )));
        }
        if target_cls.len() != self.cfg.embed_dim {
            return Err(Error::DimensionMismatch {
                expected: self.cfg.embed_dim,
                got: target_cls.len(),
            });
        }
        let reading_fwd = self.reading_gru.forward(reading)?;
        let writing_fwd = self.writing_gru.forward(writing)?;
        let step_logits: Vec<Array1<f64>> = reading_fwd
            .states()
            .iter()
            .map(|h| self.step_head.forward(h))
            .collect();
        let final_in = concatenate![
            Axis(0),
            reading_fwd.final_hidden().view(),
            writing_fwd.final_hidden().view(),
            target_cls.view()
        ];
        let final_logits = self.head.forward(&final_in);
        Ok(DynamicForward {
            reading_fwd,
            writing_fwd,
            final_in,
            step_logits,
            final_logits,
        })
    }

    pub fn backward(
        &self,
        fwd: &DynamicForward,
        d_step_logits: &[Array1<f64>],
        d_final_logits: &Array1<f64>,
        grads: &mut DynamicFpe,
    ) {
        let hidden = self.cfg.hidden_dim;
        let d_final_in = self.head.backward(&fwd.final_in, d_final_logits, &mut grads.head);

        // Reading encoder: step supervision at every step plus the reading
        // fingerprint slice of the head input at the last step.
        let reading_states = fwd.reading_fwd.states();
        let mut d_reading: Vec<Array1<f64>> = reading_states
            .iter()
            .zip(d_step_logits)
            .map(|(h, d_logit)| self.step_head.backward(h, d_logit, &mut grads.step_head))
            .collect();
        let last = d_reading.len() - 1;
        d_reading[last] += &d_final_in.slice(s![..hidden]);
        self.reading_gru
            .backward(&fwd.reading_fwd, d_reading, &mut grads.reading_gru);

        // Writing encoder trains through the final loss only.
        let mut d_writing: Vec<Array1<f64>> =
            vec![Array1::zeros(hidden); fwd.writing_fwd.len()];
        let w_last = d_writing.len() - 1;
        d_writing[w_last] = d_final_in.slice(s![hidden..2 * hidden]).to_owned();
        self.writing_gru
            .backward(&fwd.writing_fwd, d_writing, &mut grads.writing_gru);
    }
}

impl Parameterized for DynamicFpe {
    fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = self.reading_gru.tensors();
        out.extend(self.writing_gru.tensors());
        out.extend(self.step_head.tensors());
        out.extend(self.head.tensors());
        out
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = self.reading_gru.tensors_mut();
        out.extend(self.writing_gru.tensors_mut());
        out.extend(self.step_head.tensors_mut());
        out.extend(self.head.tensors_mut());
        out
    }
}
