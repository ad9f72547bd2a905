//! Baseline fingerprint model: byte-pair token embeddings, a text-level
//! GRU that turns each title or comment into a fixed vector, a
//! history-level GRU over the per-step [title; comment] concatenations,
//! and an affine head on [fingerprint; target title vector]. No step
//! supervision.

use ndarray::{concatenate, s, Array1, Array2, Axis};
use rand::Rng;

use crate::error::{Error, Result};

use super::bpe::BpeVocab;
use super::gru::{Affine, GruForward, GruStack};
use super::params::{init_matrix, tensor_mut, tensor_ref, Parameterized, TensorMut, TensorRef};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub token_embed_dim: usize,
    pub text_hidden_dim: usize,
    pub hidden_dim: usize,
    pub classes: usize,
    /// Token sequences are truncated to this length.
    pub max_tokens: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            token_embed_dim: 300,
            text_hidden_dim: 256,
            hidden_dim: 256,
            classes: 3,
            max_tokens: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineFpe {
    pub cfg: BaselineConfig,
    pub vocab: BpeVocab,
    pub embed: Array2<f64>,
    pub text_gru: GruStack,
    pub hist_gru: GruStack,
    pub head: Affine,
}

struct TextCache {
    ids: Vec<usize>,
    fwd: GruForward,
}

pub struct BaselineForward {
    item_caches: Vec<(TextCache, TextCache)>,
    hist_inputs: Vec<Array1<f64>>,
    hist_fwd: GruForward,
    target_cache: TextCache,
    final_in: Array1<f64>,
    pub final_logits: Array1<f64>,
}

impl BaselineForward {
    pub fn fingerprint(&self) -> Vec<f64> {
        self.hist_fwd.final_hidden().to_vec()
    }
}

impl BaselineFpe {
    pub fn zeros(cfg: BaselineConfig, vocab: BpeVocab) -> Self {
        let vocab_len = vocab.len();
        BaselineFpe {
            cfg,
            vocab,
            embed: Array2::zeros((vocab_len, cfg.token_embed_dim)),
            text_gru: GruStack::zeros("text_gru", cfg.token_embed_dim, cfg.text_hidden_dim, 1),
            hist_gru: GruStack::zeros("hist_gru", 2 * cfg.text_hidden_dim, cfg.hidden_dim, 1),
            head: Affine::zeros("head", cfg.hidden_dim + cfg.text_hidden_dim, cfg.classes),
        }
    }

    pub fn init<R: Rng>(cfg: BaselineConfig, vocab: BpeVocab, rng: &mut R) -> Self {
        let vocab_len = vocab.len();
        BaselineFpe {
            cfg,
            vocab,
            embed: init_matrix(vocab_len, cfg.token_embed_dim, cfg.token_embed_dim, rng),
            text_gru: GruStack::init("text_gru", cfg.token_embed_dim, cfg.text_hidden_dim, 1, rng),
            hist_gru: GruStack::init("hist_gru", 2 * cfg.text_hidden_dim, cfg.hidden_dim, 1, rng),
            head: Affine::init("head", cfg.hidden_dim + cfg.text_hidden_dim, cfg.classes, rng),
        }
    }

    fn token_ids(&self, text: &str) -> Vec<usize> {
        let mut ids = self.vocab.tokenize(text);
        ids.truncate(self.cfg.max_tokens);
        if ids.is_empty() {
            ids.push(super::bpe::OOV_ID);
        }
        ids
    }

    fn encode_text(&self, text: &str) -> Result<TextCache> {
        let ids = self.token_ids(text);
        let inputs: Vec<Array1<f64>> = ids.iter().map(|&id| self.embed.row(id).to_owned()).collect();
        let fwd = self.text_gru.forward(&inputs)?;
        Ok(TextCache { ids, fwd })
    }

    /// `items` are the raw (title, comment body) pairs of the window in
    /// chronological order.
    pub fn forward(&self, items: &[(String, String)], target_title: &str) -> Result<BaselineForward> {
        if items.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let mut item_caches = Vec::with_capacity(items.len());
        let mut hist_inputs = Vec::with_capacity(items.len());
        for (title, comment) in items {
            let title_cache = self.encode_text(title)?;
            let comment_cache = self.encode_text(comment)?;
            hist_inputs.push(concatenate![
                Axis(0),
                title_cache.fwd.final_hidden().view(),
                comment_cache.fwd.final_hidden().view()
            ]);
            item_caches.push((title_cache, comment_cache));
        }
        let hist_fwd = self.hist_gru.forward(&hist_inputs)?;
        let target_cache = self.encode_text(target_title)?;
        let final_in = concatenate![
            Axis(0),
            hist_fwd.final_hidden().view(),
            target_cache.fwd.final_hidden().view()
        ];
        let final_logits = self.head.forward(&final_in);
        Ok(BaselineForward {
            item_caches,
            hist_inputs,
            hist_fwd,
            target_cache,
            final_in,
            final_logits,
        })
    }

    fn backward_text(&self, cache: &TextCache, d_final_vec: Array1<f64>, grads: &mut BaselineFpe) {
        let mut d_states = vec![Array1::zeros(self.cfg.text_hidden_dim); cache.fwd.len()];
        let last = d_states.len() - 1;
        d_states[last] = d_final_vec;
        let d_inputs = self.text_gru.backward(&cache.fwd, d_states, &mut grads.text_gru);
        for (pos, &id) in cache.ids.iter().enumerate() {
            grads.embed.row_mut(id).scaled_add(1.0, &d_inputs[pos]);
        }
    }

    pub fn backward(&self, fwd: &BaselineForward, d_final_logits: &Array1<f64>, grads: &mut BaselineFpe) {
        let hidden = self.cfg.hidden_dim;
        let text_hidden = self.cfg.text_hidden_dim;
        let d_final_in = self.head.backward(&fwd.final_in, d_final_logits, &mut grads.head);

        let mut d_hist_states: Vec<Array1<f64>> = vec![Array1::zeros(hidden); fwd.hist_fwd.len()];
        let last = d_hist_states.len() - 1;
        d_hist_states[last] = d_final_in.slice(s![..hidden]).to_owned();
        let d_hist_inputs = self
            .hist_gru
            .backward(&fwd.hist_fwd, d_hist_states, &mut grads.hist_gru);
        debug_assert_eq!(d_hist_inputs.len(), fwd.hist_inputs.len());

        for ((title_cache, comment_cache), d_step) in fwd.item_caches.iter().zip(&d_hist_inputs) {
            self.backward_text(title_cache, d_step.slice(s![..text_hidden]).to_owned(), grads);
            self.backward_text(comment_cache, d_step.slice(s![text_hidden..]).to_owned(), grads);
        }
        self.backward_text(
            &fwd.target_cache,
            d_final_in.slice(s![hidden..]).to_owned(),
            grads,
        );
    }
}

impl Parameterized for BaselineFpe {
    fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = vec![tensor_ref("embed.table", &self.embed)];
        out.extend(self.text_gru.tensors());
        out.extend(self.hist_gru.tensors());
        out.extend(self.head.tensors());
        out
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = vec![tensor_mut("embed.table", &mut self.embed)];
        out.extend(self.text_gru.tensors_mut());
        out.extend(self.hist_gru.tensors_mut());
        out.extend(self.head.tensors_mut());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::bpe::train_bpe;
    use crate::models::math::softmax;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn tiny() -> BaselineFpe {
        let vocab = train_bpe(
            ["the tax bill", "great news today", "terrible news today"].iter().copied(),
            40,
        );
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        BaselineFpe::init(
            BaselineConfig {
                token_embed_dim: 8,
                text_hidden_dim: 6,
                hidden_dim: 5,
                classes: 3,
                max_tokens: 16,
            },
            vocab,
            &mut rng,
        )
    }

    fn items() -> Vec<(String, String)> {
        vec![
            ("the tax bill".into(), "great news today".into()),
            ("the tax bill".into(), "terrible news today".into()),
        ]
    }

    #[test]
    fn forward_produces_distribution() {
        let model = tiny();
        let fwd = model.forward(&items(), "the tax bill").unwrap();
        let p = softmax(&fwd.final_logits);
        assert!((p.sum() - 1.0).abs() < 1e-9);
        assert_eq!(fwd.fingerprint().len(), 5);
    }

    #[test]
    fn unknown_words_hit_oov_row_and_still_work() {
        let model = tiny();
        let fwd = model.forward(&items(), "zzz qqq www").unwrap();
        assert_eq!(fwd.final_logits.len(), 3);
        assert!(model.vocab.tokenize("zzz").contains(&super::super::bpe::OOV_ID));
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let a = tiny();
        let b = tiny();
        let fa = a.forward(&items(), "the tax bill").unwrap();
        let fb = b.forward(&items(), "the tax bill").unwrap();
        assert_eq!(fa.final_logits, fb.final_logits);
    }

    #[test]
    fn empty_window_rejected() {
        let model = tiny();
        assert!(matches!(
            model.forward(&[], "anything"),
            Err(Error::EmptyWindow)
        ));
    }
}
