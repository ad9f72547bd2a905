//! Static fingerprint model: reading and writing track embeddings are
//! concatenated per step and run through a two-layer GRU. The final hidden
//! state is the user fingerprint; a shared affine step head supervises
//! every step and the prediction head consumes [fingerprint; target
//! embedding].

use ndarray::{concatenate, Array1, Axis};
use rand::Rng;

use crate::error::{Error, Result};

use super::gru::{Affine, GruForward, GruStack};
use super::params::{Parameterized, TensorMut, TensorRef};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticFpeConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticFpe {
    pub cfg: StaticFpeConfig,
    pub gru: GruStack,
    pub step_head: Affine,
    pub head: Affine,
}

pub struct StaticForward {
    inputs: Vec<Array1<f64>>,
    gru_fwd: GruForward,
    final_in: Array1<f64>,
    pub step_logits: Vec<Array1<f64>>,
    pub final_logits: Array1<f64>,
}

impl StaticForward {
    pub fn fingerprint(&self) -> Vec<f64> {
        self.gru_fwd.final_hidden().to_vec()
    }
}

impl StaticFpe {
    pub fn zeros(cfg: StaticFpeConfig) -> Self {
        StaticFpe {
            cfg,
            gru: GruStack::zeros("gru", 2 * cfg.embed_dim, cfg.hidden_dim, 2),
            step_head: Affine::zeros("step_head", cfg.hidden_dim, cfg.classes),
            head: Affine::zeros("head", cfg.hidden_dim + cfg.embed_dim, cfg.classes),
        }
    }

    pub fn init<R: Rng>(cfg: StaticFpeConfig, rng: &mut R) -> Self {
        StaticFpe {
            cfg,
            gru: GruStack::init("gru", 2 * cfg.embed_dim, cfg.hidden_dim, 2, rng),
            step_head: Affine::init("step_head", cfg.hidden_dim, cfg.classes, rng),
            head: Affine::init("head", cfg.hidden_dim + cfg.embed_dim, cfg.classes, rng),
        }
    }

    pub fn forward(
        &self,
        reading: &[Array1<f64>],
        writing: &[Array1<f64>],
        target_cls: &Array1<f64>,
    ) -> Result<StaticForward> {
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
        let inputs: Vec<Array1<f64>> = reading
            .iter()
            .zip(writing)
            .map(|(r, w)| concatenate![Axis(0), r.view(), w.view()])
            .collect();
        let gru_fwd = self.gru.forward(&inputs)?;
        let step_logits: Vec<Array1<f64>> = gru_fwd
            .states()
            .iter()
            .map(|h| self.step_head.forward(h))
            .collect();
        let final_in = concatenate![Axis(0), gru_fwd.final_hidden().view(), target_cls.view()];
        let final_logits = self.head.forward(&final_in);
        Ok(StaticForward {
            inputs,
            gru_fwd,
            final_in,
            step_logits,
            final_logits,
        })
    }

    /// Accumulate parameter gradients for one example into `grads`.
    pub fn backward(
        &self,
        fwd: &StaticForward,
        d_step_logits: &[Array1<f64>],
        d_final_logits: &Array1<f64>,
        grads: &mut StaticFpe,
    ) {
        let hidden = self.cfg.hidden_dim;
        let d_final_in = self.head.backward(&fwd.final_in, d_final_logits, &mut grads.head);

        let states = fwd.gru_fwd.states();
        let mut d_states: Vec<Array1<f64>> = states
            .iter()
            .zip(d_step_logits)
            .map(|(h, d_logit)| self.step_head.backward(h, d_logit, &mut grads.step_head))
            .collect();
        let last = d_states.len() - 1;
        d_states[last] += &d_final_in.slice(ndarray::s![..hidden]);

        self.gru.backward(&fwd.gru_fwd, d_states, &mut grads.gru);
        // Gradient w.r.t. the frozen track embeddings is discarded.
        let _ = fwd.inputs.len();
    }
}

impl Parameterized for StaticFpe {
    fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = self.gru.tensors();
        out.extend(self.step_head.tensors());
        out.extend(self.head.tensors());
        out
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = self.gru.tensors_mut();
        out.extend(self.step_head.tensors_mut());
        out.extend(self.head.tensors_mut());
        out
    }
}
