//! Metrics and analyses: micro-F1 reports with confusion matrices,
//! history-length sweeps, article polarity buckets, and the
//! fingerprint-neighborhood study.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::corpus::{ArticleId, Corpus, SplitIndex, UserId};
use crate::encoding::CachedEncoder;
use crate::error::{Error, Result};
use crate::history::HistoryConfig;
use crate::labeling::{discretize, ClassThresholds, SentimentClass};
use crate::models::math::argmax;
use crate::models::{Fingerprint, Model, ModelKind};
use crate::par;
use crate::training::{build_examples, train, ModelHyper, SplitPart, TrainConfig};

/// Micro-averaged F1 over pooled per-class true/false positives. For
/// single-label multi-class prediction this equals accuracy; both routes
/// are computed and must agree.
pub fn micro_f1(predictions: &[SentimentClass], golds: &[SentimentClass]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::EmptyMetricInput);
    }
    if predictions.len() != golds.len() {
        return Err(Error::MetricLengthMismatch {
            preds: predictions.len(),
            golds: golds.len(),
        });
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for class in 0..SentimentClass::COUNT {
        for (p, g) in predictions.iter().zip(golds) {
            let predicted = p.code() == class;
            let gold = g.code() == class;
            match (predicted, gold) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    let accuracy = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| p == g)
        .count() as f64
        / predictions.len() as f64;
    debug_assert!(
        (f1 - accuracy).abs() < 1e-12,
        "pooled micro-F1 {f1} diverged from accuracy {accuracy}"
    );
    Ok(f1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelerMetrics {
    pub micro_f1: f64,
    pub per_class: BTreeMap<String, ClassMetrics>,
    /// confusion[gold][pred].
    pub confusion: Vec<Vec<usize>>,
    pub examples: usize,
}

/// Per-labeler metrics for one model on one test slice.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct MetricsReport {
    pub by_labeler: BTreeMap<String, LabelerMetrics>,
}

fn labeler_metrics(preds: &[usize], golds: &[usize]) -> LabelerMetrics {
    let k = SentimentClass::COUNT;
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &g) in preds.iter().zip(golds) {
        confusion[g][p] += 1;
    }
    let mut per_class = BTreeMap::new();
    for class in 0..k {
        let tp = confusion[class][class];
        let fp: usize = (0..k).filter(|&g| g != class).map(|g| confusion[g][class]).sum();
        let fn_: usize = (0..k).filter(|&p| p != class).map(|p| confusion[class][p]).sum();
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.insert(
            SentimentClass::from_code(class).expect("class code").name().to_string(),
            ClassMetrics { precision, recall, f1 },
        );
    }
    let pred_classes: Vec<SentimentClass> = preds
        .iter()
        .map(|&p| SentimentClass::from_code(p).expect("class code"))
        .collect();
    let gold_classes: Vec<SentimentClass> = golds
        .iter()
        .map(|&g| SentimentClass::from_code(g).expect("class code"))
        .collect();
    LabelerMetrics {
        micro_f1: micro_f1(&pred_classes, &gold_classes).expect("non-empty"),
        per_class,
        confusion,
        examples: preds.len(),
    }
}

/// One prediction on a test example, with everything the analyses need.
#[derive(Debug, Clone)]
pub struct TestPrediction {
    pub user_id: UserId,
    pub target_article: ArticleId,
    pub predicted: usize,
    pub golds: BTreeMap<String, usize>,
    pub fingerprint: Fingerprint,
}

/// Run the model over a split part and keep per-example predictions.
pub fn predict_split(
    model: &Model,
    corpus: &Corpus,
    splits: &SplitIndex,
    part: SplitPart,
    history_cfg: &HistoryConfig,
    encoder: &CachedEncoder,
    labeler: &str,
    thresholds: ClassThresholds,
) -> Result<Vec<TestPrediction>> {
    let examples = build_examples(
        corpus, splits, part, model.kind(), history_cfg, encoder, labeler, thresholds,
    )?;
    if examples.is_empty() {
        return Err(Error::EmptyMetricInput);
    }
    let outputs: Vec<Result<(usize, Fingerprint)>> = par::map_collect(&examples, |ex| {
        let fwd = model.forward_example(ex)?;
        Ok((argmax(fwd.final_logits()), fwd.fingerprint()))
    });
    let mut predictions = Vec::with_capacity(examples.len());
    for (ex, out) in examples.iter().zip(outputs) {
        let (predicted, fingerprint) = out?;
        predictions.push(TestPrediction {
            user_id: ex.user_id.clone(),
            target_article: ex.target_article.clone(),
            predicted,
            golds: ex.golds.clone(),
            fingerprint,
        });
    }
    Ok(predictions)
}

/// Metrics per labeler from raw predictions.
pub fn metrics_from_predictions(predictions: &[TestPrediction]) -> Result<MetricsReport> {
    if predictions.is_empty() {
        return Err(Error::EmptyMetricInput);
    }
    let mut report = MetricsReport::default();
    let labelers: Vec<String> = predictions[0].golds.keys().cloned().collect();
    for labeler in labelers {
        let mut preds = Vec::new();
        let mut golds = Vec::new();
        for p in predictions {
            if let Some(&g) = p.golds.get(&labeler) {
                preds.push(p.predicted);
                golds.push(g);
            }
        }
        if !preds.is_empty() {
            report.by_labeler.insert(labeler, labeler_metrics(&preds, &golds));
        }
    }
    Ok(report)
}

/// Evaluate a trained model on the test slice.
pub fn evaluate(
    model: &Model,
    corpus: &Corpus,
    splits: &SplitIndex,
    history_cfg: &HistoryConfig,
    encoder: &CachedEncoder,
    labeler: &str,
    thresholds: ClassThresholds,
) -> Result<MetricsReport> {
    use crate::encoding::Encoder as _;
    if !matches!(model.kind(), ModelKind::Baseline) {
        let expected = match model {
            Model::Static(m) => m.cfg.embed_dim,
            Model::Dynamic(m) => m.cfg.embed_dim,
            Model::Baseline(_) => unreachable!(),
        };
        if encoder.dimension() != expected {
            return Err(Error::Config(format!(
                "encoder dimension {} does not match model embedding dimension {expected}",
                encoder.dimension()
            )));
        }
    }
    let predictions = predict_split(
        model, corpus, splits, SplitPart::Test, history_cfg, encoder, labeler, thresholds,
    )?;
    metrics_from_predictions(&predictions)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    /// (history length, mean-over-labelers test micro-F1), in length order.
    pub entries: Vec<(usize, f64)>,
}

/// Train and evaluate one model per history length with a shared seed.
#[allow(clippy::too_many_arguments)]
pub fn history_length_sweep(
    lengths: &[usize],
    corpus: &Corpus,
    splits: &SplitIndex,
    model_kind: ModelKind,
    base_history: &HistoryConfig,
    encoder: &CachedEncoder,
    hyper: &ModelHyper,
    cfg: &TrainConfig,
) -> Result<SweepReport> {
    assert!(!lengths.is_empty(), "empty sweep");
    let mut entries = Vec::with_capacity(lengths.len());
    for &length in lengths {
        let history_cfg = HistoryConfig {
            length,
            ..*base_history
        };
        let (model, _history) = train(
            corpus, splits, model_kind, &history_cfg, encoder, hyper, cfg,
        )?;
        let report = evaluate(
            &model, corpus, splits, &history_cfg, encoder, &cfg.labeler, hyper.thresholds,
        )?;
        let mean = if report.by_labeler.is_empty() {
            0.0
        } else {
            report.by_labeler.values().map(|m| m.micro_f1).sum::<f64>()
                / report.by_labeler.len() as f64
        };
        entries.push((length, mean));
    }
    Ok(SweepReport { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarityBucket {
    Negative,
    Controversial,
    Positive,
}

impl PolarityBucket {
    pub fn name(&self) -> &'static str {
        match self {
            PolarityBucket::Negative => "negative",
            PolarityBucket::Controversial => "controversial",
            PolarityBucket::Positive => "positive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PolarityBuckets {
    pub by_article: BTreeMap<ArticleId, PolarityBucket>,
}

/// Bucket articles by the class distribution of their comments under one
/// labeler. Articles with fewer than `min_comments` comments are excluded.
pub fn bucket_articles_by_polarity(
    corpus: &Corpus,
    labeler: &str,
    neg_frac: f64,
    pos_frac: f64,
    min_comments: usize,
    thresholds: ClassThresholds,
) -> PolarityBuckets {
    let mut counts: BTreeMap<&ArticleId, (usize, usize, usize)> = BTreeMap::new();
    for timeline in corpus.timelines.values() {
        for comment in &timeline.interactions {
            let Some(&value) = comment.scores.get(labeler) else {
                continue;
            };
            let entry = counts.entry(&comment.article_id).or_default();
            match discretize(value, thresholds) {
                SentimentClass::Negative => entry.0 += 1,
                SentimentClass::Neutral => entry.1 += 1,
                SentimentClass::Positive => entry.2 += 1,
            }
        }
    }
    let mut by_article = BTreeMap::new();
    for (article_id, (neg, neu, pos)) in counts {
        let total = neg + neu + pos;
        if total < min_comments {
            continue;
        }
        let bucket = if neg as f64 / total as f64 >= neg_frac {
            PolarityBucket::Negative
        } else if pos as f64 / total as f64 >= pos_frac {
            PolarityBucket::Positive
        } else {
            PolarityBucket::Controversial
        };
        by_article.insert(article_id.clone(), bucket);
    }
    PolarityBuckets { by_article }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodEntry {
    pub user_id: UserId,
    pub mean_knn_distance: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborhoodReport {
    pub entries: Vec<NeighborhoodEntry>,
    /// Spearman rank correlation between negated mean neighbor distance
    /// and accuracy; `None` when distances are degenerate.
    pub spearman: Option<f64>,
    /// Mean accuracy of the closest decile minus the farthest decile.
    pub decile_gap: Option<f64>,
    pub degenerate: bool,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Average ranks with ties sharing the mean rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite"));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = mean_rank;
        }
        i = j + 1;
    }
    out
}

fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    let ra = ranks(a);
    let rb = ranks(b);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        var_a += (x - mean) * (x - mean);
        var_b += (y - mean) * (y - mean);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return None;
    }
    Some(cov / (var_a.sqrt() * var_b.sqrt()))
}

/// Relate fingerprint-space density to prediction quality: users whose
/// mean fingerprints sit close to their nearest neighbors are reported
/// against their per-user accuracy.
pub fn fingerprint_neighborhood_analysis(
    users: &[(UserId, Vec<f64>, f64)],
    k: usize,
) -> Result<NeighborhoodReport> {
    if users.len() < k + 1 {
        return Err(Error::NotEnoughUsers {
            needed: k + 1,
            got: users.len(),
        });
    }
    let mut entries = Vec::with_capacity(users.len());
    for (i, (user_id, fingerprint, accuracy)) in users.iter().enumerate() {
        let mut distances: Vec<f64> = users
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (_, other, _))| euclidean(fingerprint, other))
            .collect();
        distances.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let mean_knn = distances[..k].iter().sum::<f64>() / k as f64;
        entries.push(NeighborhoodEntry {
            user_id: user_id.clone(),
            mean_knn_distance: mean_knn,
            accuracy: *accuracy,
        });
    }

    let distances: Vec<f64> = entries.iter().map(|e| e.mean_knn_distance).collect();
    let accuracies: Vec<f64> = entries.iter().map(|e| e.accuracy).collect();
    let degenerate = distances.iter().all(|&d| d == distances[0]);
    let negated: Vec<f64> = distances.iter().map(|d| -d).collect();
    let spearman = if degenerate {
        None
    } else {
        spearman(&negated, &accuracies)
    };

    let decile_gap = if degenerate {
        None
    } else {
        let mut by_distance: Vec<&NeighborhoodEntry> = entries.iter().collect();
        by_distance.sort_by(|a, b| {
            a.mean_knn_distance
                .partial_cmp(&b.mean_knn_distance)
                .expect("finite")
        });
        let decile = (entries.len() / 10).max(1);
        let top: f64 =
            by_distance[..decile].iter().map(|e| e.accuracy).sum::<f64>() / decile as f64;
        let bottom: f64 = by_distance[by_distance.len() - decile..]
            .iter()
            .map(|e| e.accuracy)
            .sum::<f64>()
            / decile as f64;
        Some(top - bottom)
    };

    Ok(NeighborhoodReport {
        entries,
        spearman,
        decile_gap,
        degenerate,
    })
}

pub fn write_metrics_csv<W: Write>(
    report: &MetricsReport,
    model: &str,
    outlet: &str,
    writer: &mut W,
) -> Result<()> {
    writeln!(writer, "model,outlet,labeler,micro_f1,n")?;
    for (labeler, metrics) in &report.by_labeler {
        writeln!(
            writer,
            "{model},{outlet},{labeler},{:.6},{}",
            metrics.micro_f1, metrics.examples
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(report: &SweepReport, writer: &mut W) -> Result<()> {
    writeln!(writer, "length,mean_f1")?;
    for (length, f1) in &report.entries {
        writeln!(writer, "{length},{f1:.6}")?;
    }
    Ok(())
}

pub fn write_buckets_csv<W: Write>(
    buckets: &PolarityBuckets,
    f1_by_article: &BTreeMap<ArticleId, f64>,
    writer: &mut W,
) -> Result<()> {
    writeln!(writer, "article_id,bucket,f1")?;
    for (article_id, bucket) in &buckets.by_article {
        match f1_by_article.get(article_id) {
            Some(f1) => writeln!(writer, "{article_id},{},{f1:.6}", bucket.name())?,
            None => writeln!(writer, "{article_id},{},", bucket.name())?,
        }
    }
    Ok(())
}

pub fn write_neighborhood_csv<W: Write>(report: &NeighborhoodReport, writer: &mut W) -> Result<()> {
    writeln!(writer, "user_id,mean_knn_distance,accuracy")?;
    for entry in &report.entries {
        writeln!(
            writer,
            "{},{:.6},{:.6}",
            entry.user_id, entry.mean_knn_distance, entry.accuracy
        )?;
    }
    Ok(())
}
