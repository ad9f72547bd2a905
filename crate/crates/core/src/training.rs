//! Joint optimization: cross-entropy with auxiliary step supervision,
//! warmup plus cosine annealing with hard restarts, Adam with decoupled
//! weight decay, and best-epoch checkpoint selection on validation
//! micro-F1.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SplitIndex};
use crate::encoding::CachedEncoder;
use crate::error::{Error, Result};
use crate::history::{build_reading_track, build_writing_track, select_history, HistoryConfig};
use crate::labeling::{discretize, ClassThresholds, SentimentClass};
use crate::models::math::cross_entropy_with_grad;
use crate::models::{
    baseline::BaselineConfig, bpe::train_bpe, BaselineFpe, DynamicFpe, DynamicFpeConfig, Example,
    ExampleData, Model, ModelKind, Parameterized, StaticFpe, StaticFpeConfig,
};
use crate::par;

/// Fixed chunk width for intra-batch parallelism. Chunk boundaries depend
/// only on the batch length, so gradient summation has one association in
/// both parallel and sequential builds.
const GRAD_CHUNK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionCriterion {
    /// Validation micro-F1 of the active labeler.
    PerLabeler,
    /// Mean validation micro-F1 over all labelers present on the data.
    MeanOverLabelers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub base_lr: f64,
    pub weight_decay: f64,
    pub warmup_fraction: f64,
    pub restart_cycles: usize,
    pub batch_size: usize,
    /// Weight of the mean step-supervision cross-entropy.
    pub aux_weight: f64,
    pub grad_clip_norm: f64,
    pub seed: u64,
    /// Labeler whose classes supervise training.
    pub labeler: String,
    pub selection: SelectionCriterion,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            base_lr: 0.001,
            weight_decay: 0.01,
            warmup_fraction: 0.1,
            restart_cycles: 2,
            batch_size: 32,
            aux_weight: 1.0,
            grad_clip_norm: 1.0,
            seed: 0,
            labeler: "lexicon".into(),
            selection: SelectionCriterion::MeanOverLabelers,
        }
    }
}

/// Model-shape settings shared by training and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelHyper {
    pub hidden_dim: usize,
    pub classes: usize,
    pub thresholds: ClassThresholds,
    pub bpe_vocab_size: usize,
    pub token_embed_dim: usize,
    pub text_hidden_dim: usize,
    pub max_tokens: usize,
}

impl Default for ModelHyper {
    fn default() -> Self {
        ModelHyper {
            hidden_dim: crate::models::DEFAULT_HIDDEN_DIM,
            classes: SentimentClass::COUNT,
            thresholds: ClassThresholds::default(),
            bpe_vocab_size: 10_000,
            token_embed_dim: 300,
            text_hidden_dim: 256,
            max_tokens: 128,
        }
    }
}

/// Total loss and logit gradients:
/// `CE(final) + aux_weight * mean_k CE(step_k)`.
pub fn compute_loss(
    step_logits: &[Array1<f64>],
    final_logits: &Array1<f64>,
    step_labels: &[usize],
    final_label: usize,
    aux_weight: f64,
) -> Result<(f64, Vec<Array1<f64>>, Array1<f64>)> {
    let classes = final_logits.len();
    if final_label >= classes {
        return Err(Error::LabelOutOfRange {
            label: final_label,
            classes,
        });
    }
    if step_logits.len() != step_labels.len() {
        return Err(Error::Shape(format!(
            "step logits/labels mismatch: {} vs {}",
            step_logits.len(),
            step_labels.len()
        )));
    }
    let (final_loss, d_final) = cross_entropy_with_grad(final_logits, final_label);
    let mut loss = final_loss;
    let mut d_steps = Vec::with_capacity(step_logits.len());
    if !step_logits.is_empty() && aux_weight != 0.0 {
        let scale = aux_weight / step_logits.len() as f64;
        let mut aux = 0.0;
        for (logits, &label) in step_logits.iter().zip(step_labels) {
            if label >= classes {
                return Err(Error::LabelOutOfRange {
                    label,
                    classes,
                });
            }
            let (step_loss, d_step) = cross_entropy_with_grad(logits, label);
            aux += step_loss;
            d_steps.push(d_step * scale);
        }
        loss += aux_weight * aux / step_logits.len() as f64;
    } else {
        d_steps = step_logits
            .iter()
            .map(|l| Array1::zeros(l.len()))
            .collect();
    }
    Ok((loss, d_steps, d_final))
}

/// Learning rate at `step` of `total_steps`: linear warmup to `base_lr`
/// over `floor(warmup_fraction * total_steps)` steps, then cosine decay
/// restarted `restart_cycles` times across the remaining span.
pub fn lr_schedule(
    step: usize,
    total_steps: usize,
    warmup_fraction: f64,
    restart_cycles: usize,
    base_lr: f64,
) -> f64 {
    debug_assert!(step <= total_steps);
    let warmup_steps = (warmup_fraction * total_steps as f64).floor() as usize;
    if step < warmup_steps {
        return base_lr * step as f64 / warmup_steps as f64;
    }
    let span = total_steps - warmup_steps;
    if span == 0 {
        return base_lr;
    }
    let progress = (step - warmup_steps) as f64 / span as f64;
    let cycle_pos = progress * restart_cycles.max(1) as f64;
    let frac = cycle_pos - cycle_pos.floor();
    base_lr * 0.5 * (1.0 + (std::f64::consts::PI * frac).cos())
}

/// Adam with decoupled weight decay. Moment state is keyed by tensor
/// position, which is stable for a fixed model shape.
pub struct AdamW {
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    moments: Vec<(Vec<f64>, Vec<f64>)>,
}

impl AdamW {
    pub fn new(model: &Model) -> Self {
        let moments = model
            .tensors()
            .iter()
            .map(|t| (vec![0.0; t.data.len()], vec![0.0; t.data.len()]))
            .collect();
        AdamW {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            moments,
        }
    }

    /// One update. Decay is decoupled: a parameter with zero gradient
    /// still shrinks by exactly (1 - lr * weight_decay).
    pub fn step(&mut self, params: &mut Model, grads: &Model, lr: f64, weight_decay: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let grad_tensors = grads.tensors();
        for (slot, (param, grad)) in params.tensors_mut().into_iter().zip(grad_tensors).enumerate() {
            let (m, v) = &mut self.moments[slot];
            for i in 0..param.data.len() {
                let g = grad.data[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                param.data[i] -=
                    lr * (m_hat / (v_hat.sqrt() + self.eps) + weight_decay * param.data[i]);
            }
        }
    }
}

/// Scale gradients so their global L2 norm is at most `max_norm`.
/// Returns the pre-clip norm.
pub fn clip_global_norm(grads: &mut Model, max_norm: f64) -> f64 {
    let norm: f64 = grads
        .tensors()
        .iter()
        .map(|t| t.data.iter().map(|x| x * x).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for tensor in grads.tensors_mut() {
            for x in tensor.data.iter_mut() {
                *x *= scale;
            }
        }
    }
    norm
}

fn add_scaled(dst: &mut Model, src: &Model, scale: f64) {
    for (d, s) in dst.tensors_mut().into_iter().zip(src.tensors()) {
        for (a, b) in d.data.iter_mut().zip(s.data) {
            *a += scale * b;
        }
    }
}

fn scale_in_place(model: &mut Model, scale: f64) {
    for tensor in model.tensors_mut() {
        for x in tensor.data.iter_mut() {
            *x *= scale;
        }
    }
}

/// Loss of one example under the current parameters.
pub fn example_loss(model: &Model, example: &Example, aux_weight: f64) -> Result<f64> {
    let fwd = model.forward_example(example)?;
    let (loss, _, _) = compute_loss(
        fwd.step_logits(),
        fwd.final_logits(),
        &example.step_labels,
        example.final_label,
        aux_weight,
    )?;
    Ok(loss)
}

/// Loss and parameter gradients of one example, accumulated into `grads`.
pub fn example_loss_grads(
    model: &Model,
    example: &Example,
    aux_weight: f64,
    grads: &mut Model,
) -> Result<f64> {
    let fwd = model.forward_example(example)?;
    let (loss, d_steps, d_final) = compute_loss(
        fwd.step_logits(),
        fwd.final_logits(),
        &example.step_labels,
        example.final_label,
        aux_weight,
    )?;
    model.backward_example(&fwd, &d_steps, &d_final, grads);
    Ok(loss)
}

/// Mean loss and mean gradients over a batch. Work fans out over fixed-size
/// chunks; partials combine in chunk order, so the result is identical with
/// and without the `parallel` feature.
fn batch_loss_grads(
    model: &Model,
    examples: &[Example],
    batch: &[usize],
    aux_weight: f64,
) -> Result<(f64, Model)> {
    let partials: Vec<Result<(f64, Model)>> = par::map_chunks(batch.len(), GRAD_CHUNK, |range| {
        let mut grads = model.zeros_like();
        let mut loss_sum = 0.0;
        for &index in &batch[range] {
            loss_sum += example_loss_grads(model, &examples[index], aux_weight, &mut grads)?;
        }
        Ok((loss_sum, grads))
    });

    let mut total_grads = model.zeros_like();
    let mut total_loss = 0.0;
    for partial in partials {
        let (loss_sum, grads) = partial?;
        total_loss += loss_sum;
        add_scaled(&mut total_grads, &grads, 1.0);
    }
    let n = batch.len() as f64;
    scale_in_place(&mut total_grads, 1.0 / n);
    Ok((total_loss / n, total_grads))
}

/// Step-level trainer shared by the epoch loop and the overfit harness.
pub struct Trainer {
    adam: AdamW,
    pub step: usize,
    pub total_steps: usize,
    cfg: TrainConfig,
}

impl Trainer {
    pub fn new(model: &Model, cfg: &TrainConfig, total_steps: usize) -> Self {
        Trainer {
            adam: AdamW::new(model),
            step: 0,
            total_steps,
            cfg: cfg.clone(),
        }
    }

    /// One optimizer step over the given batch. Returns the mean loss.
    pub fn step_batch(
        &mut self,
        model: &mut Model,
        examples: &[Example],
        batch: &[usize],
    ) -> Result<f64> {
        let lr = lr_schedule(
            self.step,
            self.total_steps,
            self.cfg.warmup_fraction,
            self.cfg.restart_cycles,
            self.cfg.base_lr,
        );
        let (loss, mut grads) = batch_loss_grads(model, examples, batch, self.cfg.aux_weight)?;
        clip_global_norm(&mut grads, self.cfg.grad_clip_norm);
        self.adam.step(model, &grads, lr, self.cfg.weight_decay);
        self.step += 1;
        Ok(loss)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Validation micro-F1 per labeler.
    pub val_f1: BTreeMap<String, f64>,
    /// Not part of any persisted artifact; runs are wall-clock independent.
    pub wall_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
}

impl TrainHistory {
    pub fn criterion_value(record: &EpochRecord, criterion: SelectionCriterion, labeler: &str) -> f64 {
        match criterion {
            SelectionCriterion::PerLabeler => record.val_f1.get(labeler).copied().unwrap_or(0.0),
            SelectionCriterion::MeanOverLabelers => {
                if record.val_f1.is_empty() {
                    0.0
                } else {
                    record.val_f1.values().sum::<f64>() / record.val_f1.len() as f64
                }
            }
        }
    }
}

/// Argmax of the selection criterion over epochs; ties go to the earliest
/// epoch.
pub fn select_best_checkpoint(
    history: &TrainHistory,
    criterion: SelectionCriterion,
    labeler: &str,
) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, record) in history.epochs.iter().enumerate() {
        let value = TrainHistory::criterion_value(record, criterion, labeler);
        if value > best_value {
            best_value = value;
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPart {
    Train,
    Validation,
    Test,
}

/// Build model-ready examples for one split part. The window sees the
/// user's entire past, which always precedes the target in timeline order.
pub fn build_examples(
    corpus: &Corpus,
    splits: &SplitIndex,
    part: SplitPart,
    model_kind: ModelKind,
    history_cfg: &HistoryConfig,
    encoder: &CachedEncoder,
    labeler: &str,
    thresholds: ClassThresholds,
) -> Result<Vec<Example>> {
    use crate::encoding::Encoder as _;

    // Warm the cache: every title (similarity + reading + target), every
    // (title, body) pair (writing track).
    let titles: Vec<&str> = corpus.articles.values().map(|a| a.title.as_str()).collect();
    encoder.warm_singles(&titles)?;
    let mut writing_pairs = Vec::new();
    for timeline in corpus.timelines.values() {
        for comment in &timeline.interactions {
            writing_pairs.push((
                corpus.title(&comment.article_id).to_string(),
                comment.body.clone(),
            ));
        }
    }
    encoder.warm_pairs(&writing_pairs)?;

    let mut targets: Vec<(&crate::corpus::UserId, usize)> = Vec::new();
    for (user_id, ranges) in &splits.by_user {
        let range = match part {
            SplitPart::Train => ranges.train.clone(),
            SplitPart::Validation => ranges.validation.clone(),
            SplitPart::Test => ranges.test.clone(),
        };
        for position in range {
            if position == 0 {
                continue; // no prior history, no example
            }
            targets.push((user_id, position));
        }
    }

    let built: Vec<Result<Example>> = par::map_collect(&targets, |&(user_id, position)| {
        let timeline = &corpus.timelines[user_id];
        let target = &timeline.interactions[position];
        let window = select_history(corpus, timeline, position, history_cfg, encoder)?;

        let mut golds = BTreeMap::new();
        for (name, value) in &target.scores {
            golds.insert(name.clone(), discretize(*value, thresholds).code());
        }
        let final_label = *golds.get(labeler).ok_or_else(|| Error::MissingScore {
            comment_id: target.id.0.clone(),
            labeler: labeler.to_string(),
        })?;

        let data = match model_kind {
            ModelKind::Baseline => {
                let items = window
                    .items
                    .iter()
                    .map(|item| {
                        let comment = &timeline.interactions[item.index];
                        (
                            corpus.title(&comment.article_id).to_string(),
                            comment.body.clone(),
                        )
                    })
                    .collect();
                ExampleData::Texts {
                    items,
                    target_title: corpus.title(&target.article_id).to_string(),
                }
            }
            ModelKind::StaticFpe | ModelKind::DynamicFpe => {
                let reading = build_reading_track(
                    corpus, timeline, &window, model_kind, encoder, labeler, thresholds,
                )?;
                let writing =
                    build_writing_track(corpus, timeline, &window, encoder, labeler, thresholds)?;
                let target_cls = encoder.encode_single(corpus.title(&target.article_id))?;
                ExampleData::Tracks {
                    reading: reading
                        .vectors
                        .iter()
                        .map(|v| Array1::from_vec(v.values.clone()))
                        .collect(),
                    writing: writing
                        .vectors
                        .iter()
                        .map(|v| Array1::from_vec(v.values.clone()))
                        .collect(),
                    target_cls: Array1::from_vec(target_cls.values),
                }
            }
        };

        let step_labels = window
            .items
            .iter()
            .map(|item| {
                let comment = &timeline.interactions[item.index];
                comment
                    .scores
                    .get(labeler)
                    .map(|v| discretize(*v, thresholds).code())
                    .ok_or_else(|| Error::MissingScore {
                        comment_id: comment.id.0.clone(),
                        labeler: labeler.to_string(),
                    })
            })
            .collect::<Result<Vec<usize>>>()?;

        Ok(Example {
            user_id: user_id.clone(),
            target_article: target.article_id.clone(),
            data,
            step_labels,
            final_label,
            golds,
        })
    });
    built.into_iter().collect()
}

fn init_model(
    model_kind: ModelKind,
    embed_dim: usize,
    hyper: &ModelHyper,
    corpus: &Corpus,
    splits: &SplitIndex,
    seed: u64,
) -> Model {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    match model_kind {
        ModelKind::StaticFpe => Model::Static(StaticFpe::init(
            StaticFpeConfig {
                embed_dim,
                hidden_dim: hyper.hidden_dim,
                classes: hyper.classes,
            },
            &mut rng,
        )),
        ModelKind::DynamicFpe => Model::Dynamic(DynamicFpe::init(
            DynamicFpeConfig {
                embed_dim,
                hidden_dim: hyper.hidden_dim,
                classes: hyper.classes,
            },
            &mut rng,
        )),
        ModelKind::Baseline => {
            // Subword merges come from the training portion only.
            let mut texts: Vec<&str> = Vec::new();
            for (user_id, ranges) in &splits.by_user {
                let timeline = &corpus.timelines[user_id];
                for comment in &timeline.interactions[ranges.train.clone()] {
                    texts.push(corpus.title(&comment.article_id));
                    texts.push(&comment.body);
                }
            }
            let vocab = train_bpe(texts, hyper.bpe_vocab_size);
            Model::Baseline(BaselineFpe::init(
                BaselineConfig {
                    token_embed_dim: hyper.token_embed_dim,
                    text_hidden_dim: hyper.text_hidden_dim,
                    hidden_dim: hyper.hidden_dim,
                    classes: hyper.classes,
                    max_tokens: hyper.max_tokens,
                },
                vocab,
                &mut rng,
            ))
        }
    }
}

/// Validation micro-F1 per labeler for the current parameters.
fn validation_f1(model: &Model, examples: &[Example]) -> BTreeMap<String, f64> {
    use crate::models::math::argmax;
    if examples.is_empty() {
        return BTreeMap::new();
    }
    let preds: Vec<usize> = par::map_collect(examples, |ex| {
        model
            .forward_example(ex)
            .map(|fwd| argmax(fwd.final_logits()))
            .unwrap_or(0)
    });
    let mut out = BTreeMap::new();
    for labeler in examples[0].golds.keys() {
        let mut correct = 0usize;
        let mut total = 0usize;
        for (ex, &pred) in examples.iter().zip(&preds) {
            if let Some(&gold) = ex.golds.get(labeler) {
                total += 1;
                if gold == pred {
                    correct += 1;
                }
            }
        }
        if total > 0 {
            // Micro-F1 equals accuracy for single-label prediction.
            out.insert(labeler.clone(), correct as f64 / total as f64);
        }
    }
    out
}

/// Full training run: epoch loop over shuffled examples, per-epoch
/// validation, and best-epoch parameter selection.
pub fn train(
    corpus: &Corpus,
    splits: &SplitIndex,
    model_kind: ModelKind,
    history_cfg: &HistoryConfig,
    encoder: &CachedEncoder,
    hyper: &ModelHyper,
    cfg: &TrainConfig,
) -> Result<(Model, TrainHistory)> {
    use crate::encoding::Encoder as _;

    let train_examples = build_examples(
        corpus,
        splits,
        SplitPart::Train,
        model_kind,
        history_cfg,
        encoder,
        &cfg.labeler,
        hyper.thresholds,
    )?;
    if train_examples.is_empty() {
        return Err(Error::NoExamples);
    }
    let val_examples = build_examples(
        corpus,
        splits,
        SplitPart::Validation,
        model_kind,
        history_cfg,
        encoder,
        &cfg.labeler,
        hyper.thresholds,
    )?;

    let mut model = init_model(model_kind, encoder.dimension(), hyper, corpus, splits, cfg.seed);
    let steps_per_epoch = train_examples.len().div_ceil(cfg.batch_size);
    let total_steps = cfg.epochs * steps_per_epoch;
    let mut trainer = Trainer::new(&model, cfg, total_steps);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed.wrapping_add(1));

    let mut history = TrainHistory {
        epochs: Vec::with_capacity(cfg.epochs),
        best_epoch: 0,
    };
    let mut best_value = f64::NEG_INFINITY;
    let mut best_model = model.clone();

    for epoch in 0..cfg.epochs {
        let started = std::time::Instant::now();
        let mut order: Vec<usize> = (0..train_examples.len()).collect();
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let loss = trainer.step_batch(&mut model, &train_examples, batch)?;
            loss_sum += loss * batch.len() as f64;
            seen += batch.len();
        }

        let record = EpochRecord {
            epoch,
            mean_loss: loss_sum / seen as f64,
            val_f1: validation_f1(&model, &val_examples),
            wall_secs: started.elapsed().as_secs_f64(),
        };
        let value = TrainHistory::criterion_value(&record, cfg.selection, &cfg.labeler);
        if value > best_value {
            best_value = value;
            history.best_epoch = epoch;
            best_model = model.clone();
        }
        history.epochs.push(record);
    }

    Ok((best_model, history))
}

/// TrainHistory CSV: epoch, loss, one F1 column per labeler, selected flag.
/// Wall-clock never appears, so identical runs emit identical bytes.
pub fn write_history_csv<W: Write>(history: &TrainHistory, writer: &mut W) -> Result<()> {
    let labelers: Vec<&String> = history
        .epochs
        .first()
        .map(|r| r.val_f1.keys().collect())
        .unwrap_or_default();
    write!(writer, "epoch,loss")?;
    for labeler in &labelers {
        write!(writer, ",f1_{labeler}")?;
    }
    writeln!(writer, ",selected")?;
    for record in &history.epochs {
        write!(writer, "{},{:.6}", record.epoch, record.mean_loss)?;
        for labeler in &labelers {
            write!(writer, ",{:.6}", record.val_f1.get(*labeler).copied().unwrap_or(0.0))?;
        }
        writeln!(
            writer,
            ",{}",
            if record.epoch == history.best_epoch { 1 } else { 0 }
        )?;
    }
    Ok(())
}
