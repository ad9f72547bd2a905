//! Subcommand implementations. Every command reads and writes the
//! documented file formats under the output directory.

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fpe_core::corpus::{
    corpus_stats, filter_users, ingest_corpus, split_corpus, write_corpus, ArticleId, Corpus,
    SplitIndex,
};
use fpe_core::encoding::{CachedEncoder, EmbeddingCache, EncoderSpec};
use fpe_core::error::{Error, Result};
use fpe_core::evaluation::{
    bucket_articles_by_polarity, evaluate, fingerprint_neighborhood_analysis,
    history_length_sweep, predict_split, write_buckets_csv, write_metrics_csv,
    write_neighborhood_csv, write_sweep_csv,
};
use fpe_core::labeling::{label_corpus, LabelerSpec};
use fpe_core::models::checkpoint::{
    file_digest, load_checkpoint, save_checkpoint, BaselineMeta, CheckpointMeta,
};
use fpe_core::models::Model;
use fpe_core::synthgen::{
    default_topics, generate_corpus, oracle_best_accuracy, write_truth, CommentsPerUser,
    GeneratorConfig,
};
use fpe_core::training::{train, write_history_csv, SplitPart};

use crate::args::CommonArgs;
use crate::config::{build_manifest, write_manifest, RunConfig};

pub fn load_corpus(path: &Path, strict: bool) -> Result<Corpus> {
    let file = std::fs::File::open(path)?;
    ingest_corpus(BufReader::new(file), strict)
}

fn corpus_path(common: &CommonArgs) -> Result<PathBuf> {
    common
        .corpus
        .clone()
        .ok_or_else(|| Error::Config("--corpus is required for this command".into()))
}

fn ensure_out(common: &CommonArgs) -> Result<PathBuf> {
    std::fs::create_dir_all(&common.out)?;
    Ok(common.out.clone())
}

/// Encoder wired to the optional persistent cache (`FPL_CACHE_DIR`).
/// Trainable plugin encoders are never cached.
pub fn make_encoder(spec: &EncoderSpec) -> Result<(CachedEncoder, Option<Arc<EmbeddingCache>>)> {
    let inner = spec.build()?;
    if spec.trainable {
        return Ok((CachedEncoder::uncached(inner), None));
    }
    match std::env::var_os("FPL_CACHE_DIR") {
        Some(dir) => {
            let sanitized: String = inner
                .name()
                .chars()
                .map(|c| if c.is_alphanumeric() { c } else { '_' })
                .collect();
            let path = PathBuf::from(dir).join(format!(
                "cache_{sanitized}_{}.json",
                inner.dimension()
            ));
            let cache = Arc::new(EmbeddingCache::open(&path)?);
            Ok((CachedEncoder::new(inner, cache.clone()), Some(cache)))
        }
        None => Ok((CachedEncoder::uncached(inner), None)),
    }
}

fn prepare(corpus: Corpus, config: &RunConfig) -> Result<(Corpus, SplitIndex)> {
    let filtered = filter_users(&corpus, config.split.min_comments);
    if filtered.timelines.is_empty() {
        return Err(Error::NoExamples);
    }
    let splits = split_corpus(&filtered, config.split.test_frac, config.split.val_frac)?;
    Ok((filtered, splits))
}

fn dominant_outlet(corpus: &Corpus) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for article in corpus.articles.values() {
        *counts.entry(article.outlet.as_str()).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .max_by_key(|(_, n)| *n)
        .map(|(outlet, _)| outlet.to_string())
        .unwrap_or_else(|| "unknown".into())
}

pub fn cmd_ingest(common: &CommonArgs, strict: bool, write: bool) -> Result<()> {
    let path = corpus_path(common)?;
    let corpus = load_corpus(&path, strict)?;
    let stats = corpus_stats(&corpus);
    println!(
        "users {}  articles {}  comments {}  mean/user {:.2}  median/user {}",
        stats.user_count,
        stats.article_count,
        stats.comment_count,
        stats.mean_comments_per_user,
        stats.median_comments_per_user
    );
    if write {
        let out = ensure_out(common)?;
        let mut file = std::fs::File::create(out.join("corpus.jsonl"))?;
        write_corpus(&corpus, &mut file)?;
        println!("wrote {}", out.join("corpus.jsonl").display());
    }
    Ok(())
}

pub fn cmd_label(common: &CommonArgs, config: &RunConfig, also: &[String]) -> Result<()> {
    let path = corpus_path(common)?;
    let corpus = load_corpus(&path, false)?;
    let mut specs = config.labelers.clone();
    for name in also {
        let spec = LabelerSpec::parse(name)?;
        if !specs.contains(&spec) {
            specs.push(spec);
        }
    }
    let labeled = label_corpus(&corpus, &specs)?;
    let out = ensure_out(common)?;
    let target = out.join("labeled.jsonl");
    let mut file = std::fs::File::create(&target)?;
    write_corpus(&labeled, &mut file)?;
    println!(
        "labeled {} comments with {} labeler(s) -> {}",
        labeled.comment_count(),
        specs.len(),
        target.display()
    );
    Ok(())
}

pub fn cmd_split(
    common: &CommonArgs,
    test_frac: f64,
    val_frac: f64,
    min_comments: usize,
) -> Result<()> {
    let path = corpus_path(common)?;
    let corpus = load_corpus(&path, false)?;
    let filtered = filter_users(&corpus, min_comments);
    let splits = split_corpus(&filtered, test_frac, val_frac)?;
    let out = ensure_out(common)?;
    let target = out.join("splits.json");
    std::fs::write(&target, serde_json::to_string_pretty(&splits)?)?;
    println!("split {} users -> {}", splits.by_user.len(), target.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_synth(
    common: &CommonArgs,
    config: &RunConfig,
    users: usize,
    articles: usize,
    topics: usize,
    q: f64,
    min_comments_per_user: usize,
    max_comments_per_user: usize,
) -> Result<()> {
    let all_topics = default_topics();
    if topics < 2 || topics > all_topics.len() {
        return Err(Error::Config(format!(
            "topics must be between 2 and {}",
            all_topics.len()
        )));
    }
    let generator = GeneratorConfig {
        num_users: users,
        num_articles: articles,
        topics: all_topics.into_iter().take(topics).collect(),
        consistency: q,
        comments_per_user: CommentsPerUser {
            min: min_comments_per_user,
            max: max_comments_per_user,
        },
        seed: config.train.seed,
        ..GeneratorConfig::default()
    };
    let (corpus, truth) = generate_corpus(&generator)?;
    let out = ensure_out(common)?;

    let corpus_file = out.join("corpus.jsonl");
    let mut file = std::fs::File::create(&corpus_file)?;
    write_corpus(&corpus, &mut file)?;
    let truth_file = out.join("truth.jsonl");
    let mut file = std::fs::File::create(&truth_file)?;
    write_truth(&truth, &mut file)?;

    let stats = corpus_stats(&corpus);
    println!(
        "generated users {} articles {} comments {} -> {}",
        stats.user_count,
        stats.article_count,
        stats.comment_count,
        corpus_file.display()
    );
    println!("corpus digest sha256:{}", file_digest(&corpus_file)?);

    // Oracle bounds on the default split of the labeled corpus.
    let labeled = label_corpus(&corpus, &[LabelerSpec::Lexicon])?;
    let splits = split_corpus(&labeled, config.split.test_frac, config.split.val_frac)?;
    let bounds = oracle_best_accuracy(&truth, &labeled, &splits)?;
    println!(
        "oracle bounds: topic-aware {:.4} (ceiling), topic-blind {:.4} (floor)",
        bounds.topic_aware, bounds.topic_blind
    );
    Ok(())
}

fn checkpoint_meta(config: &RunConfig, model: &Model) -> CheckpointMeta {
    let baseline = match model {
        Model::Baseline(m) => Some(BaselineMeta {
            vocab: m.vocab.clone(),
            token_embed_dim: m.cfg.token_embed_dim,
            text_hidden_dim: m.cfg.text_hidden_dim,
            max_tokens: m.cfg.max_tokens,
        }),
        _ => None,
    };
    CheckpointMeta {
        model: config.model,
        classes: config.hyper.classes,
        embed_dim: config.encoder.dimension,
        hidden_dim: config.hyper.hidden_dim,
        encoder: config.encoder.clone(),
        labeler: config.train.labeler.clone(),
        history: config.history,
        thresholds: config.hyper.thresholds,
        baseline,
    }
}

pub fn cmd_train(common: &CommonArgs, config: &RunConfig) -> Result<()> {
    let path = corpus_path(common)?;
    let corpus = load_corpus(&path, false)?;
    let (corpus, splits) = prepare(corpus, config)?;
    let out = ensure_out(common)?;

    // Manifest goes first: a crashed run still documents what it was.
    let manifest = build_manifest(config, &path, &out)?;
    write_manifest(&out.join("manifest.json"), &manifest)?;

    let (encoder, cache) = make_encoder(&config.encoder)?;
    let (model, history) = train(
        &corpus,
        &splits,
        config.model,
        &config.history,
        &encoder,
        &config.hyper,
        &config.train,
    )?;

    let history_path = out.join("history.csv");
    let mut file = std::fs::File::create(&history_path)?;
    write_history_csv(&history, &mut file)?;

    let checkpoint_path = out.join("checkpoint.fpe");
    save_checkpoint(&checkpoint_path, &model, &checkpoint_meta(config, &model))?;
    if let Some(cache) = cache {
        cache.save()?;
    }

    let best = &history.epochs[history.best_epoch];
    println!(
        "trained {} for {} epochs; best epoch {} (val f1 {:.4})",
        config.model.name(),
        history.epochs.len(),
        history.best_epoch,
        fpe_core::training::TrainHistory::criterion_value(
            best,
            config.train.selection,
            &config.train.labeler
        )
    );
    println!("checkpoint digest sha256:{}", file_digest(&checkpoint_path)?);
    println!("history -> {}", history_path.display());
    Ok(())
}

fn resolve_checkpoint(common: &CommonArgs, flag: &Option<PathBuf>) -> PathBuf {
    flag.clone().unwrap_or_else(|| common.out.join("checkpoint.fpe"))
}

fn load_model(path: &Path) -> Result<(Model, CheckpointMeta)> {
    if !path.exists() {
        return Err(Error::Config(format!(
            "no checkpoint at {}; train first or pass --checkpoint",
            path.display()
        )));
    }
    load_checkpoint(path)
}

pub fn cmd_evaluate(
    common: &CommonArgs,
    config: &RunConfig,
    checkpoint: &Option<PathBuf>,
) -> Result<()> {
    let path = corpus_path(common)?;
    let (model, meta) = load_model(&resolve_checkpoint(common, checkpoint))?;
    let corpus = load_corpus(&path, false)?;
    let (corpus, splits) = prepare(corpus, config)?;
    let (encoder, cache) = make_encoder(&meta.encoder)?;
    let report = evaluate(
        &model,
        &corpus,
        &splits,
        &meta.history,
        &encoder,
        &meta.labeler,
        meta.thresholds,
    )?;
    if let Some(cache) = cache {
        cache.save()?;
    }

    let out = ensure_out(common)?;
    let target = out.join("metrics.csv");
    let mut file = std::fs::File::create(&target)?;
    write_metrics_csv(&report, meta.model.name(), &dominant_outlet(&corpus), &mut file)?;
    for (labeler, metrics) in &report.by_labeler {
        println!(
            "{labeler}: micro-F1 {:.4} over {} examples",
            metrics.micro_f1, metrics.examples
        );
    }
    println!("metrics -> {}", target.display());
    Ok(())
}

pub fn cmd_sweep(common: &CommonArgs, config: &RunConfig, lengths: &str) -> Result<()> {
    let lengths: Vec<usize> = lengths
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad length `{s}`")))
        })
        .collect::<Result<_>>()?;
    if lengths.is_empty() {
        return Err(Error::Config("no sweep lengths given".into()));
    }
    let path = corpus_path(common)?;
    let corpus = load_corpus(&path, false)?;
    let (corpus, splits) = prepare(corpus, config)?;
    let out = ensure_out(common)?;
    // Sweeps train models, so they document themselves like `train` does.
    let manifest = build_manifest(config, &path, &out)?;
    write_manifest(&out.join("manifest.json"), &manifest)?;
    let (encoder, cache) = make_encoder(&config.encoder)?;
    let report = history_length_sweep(
        &lengths,
        &corpus,
        &splits,
        config.model,
        &config.history,
        &encoder,
        &config.hyper,
        &config.train,
    )?;
    if let Some(cache) = cache {
        cache.save()?;
    }
    let target = out.join("sweep.csv");
    let mut file = std::fs::File::create(&target)?;
    write_sweep_csv(&report, &mut file)?;
    for (length, f1) in &report.entries {
        println!("length {length}: mean micro-F1 {f1:.4}");
    }
    println!("sweep -> {}", target.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_buckets(
    common: &CommonArgs,
    config: &RunConfig,
    neg_frac: f64,
    pos_frac: f64,
    min_comments: usize,
    checkpoint: &Option<PathBuf>,
) -> Result<()> {
    let path = corpus_path(common)?;
    let corpus = load_corpus(&path, false)?;
    let labeler = config.train.labeler.clone();
    let buckets = bucket_articles_by_polarity(
        &corpus,
        &labeler,
        neg_frac,
        pos_frac,
        min_comments,
        config.hyper.thresholds,
    );

    // With a checkpoint, attach pooled per-article accuracy on the test
    // slice.
    let mut f1_by_article: BTreeMap<ArticleId, f64> = BTreeMap::new();
    let checkpoint_path = resolve_checkpoint(common, checkpoint);
    if checkpoint_path.exists() {
        let (model, meta) = load_checkpoint(&checkpoint_path)?;
        let (prepared_corpus, splits) = prepare(corpus.clone(), config)?;
        let (encoder, _) = make_encoder(&meta.encoder)?;
        let predictions = predict_split(
            &model,
            &prepared_corpus,
            &splits,
            SplitPart::Test,
            &meta.history,
            &encoder,
            &meta.labeler,
            meta.thresholds,
        )?;
        let mut per_article: BTreeMap<ArticleId, (usize, usize)> = BTreeMap::new();
        for p in &predictions {
            if let Some(&gold) = p.golds.get(&meta.labeler) {
                let entry = per_article.entry(p.target_article.clone()).or_default();
                entry.1 += 1;
                if gold == p.predicted {
                    entry.0 += 1;
                }
            }
        }
        for (article, (hits, total)) in per_article {
            f1_by_article.insert(article, hits as f64 / total as f64);
        }
    }

    let out = ensure_out(common)?;
    let target = out.join("buckets.csv");
    let mut file = std::fs::File::create(&target)?;
    write_buckets_csv(&buckets, &f1_by_article, &mut file)?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for bucket in buckets.by_article.values() {
        *counts.entry(bucket.name()).or_insert(0) += 1;
    }
    println!("buckets: {counts:?}");
    println!("buckets -> {}", target.display());
    Ok(())
}

pub fn cmd_neighborhood(
    common: &CommonArgs,
    config: &RunConfig,
    checkpoint: &Option<PathBuf>,
    k: usize,
) -> Result<()> {
    let path = corpus_path(common)?;
    let (model, meta) = load_model(&resolve_checkpoint(common, checkpoint))?;
    let corpus = load_corpus(&path, false)?;
    let (corpus, splits) = prepare(corpus, config)?;
    let (encoder, cache) = make_encoder(&meta.encoder)?;
    let predictions = predict_split(
        &model,
        &corpus,
        &splits,
        SplitPart::Test,
        &meta.history,
        &encoder,
        &meta.labeler,
        meta.thresholds,
    )?;
    if let Some(cache) = cache {
        cache.save()?;
    }

    // Mean fingerprint and accuracy per user.
    let mut by_user: BTreeMap<fpe_core::corpus::UserId, (Vec<f64>, usize, usize)> = BTreeMap::new();
    for p in &predictions {
        let flat = p.fingerprint.flat();
        let entry = by_user
            .entry(p.user_id.clone())
            .or_insert_with(|| (vec![0.0; flat.len()], 0, 0));
        for (acc, x) in entry.0.iter_mut().zip(&flat) {
            *acc += x;
        }
        entry.2 += 1;
        if p.golds.get(&meta.labeler) == Some(&p.predicted) {
            entry.1 += 1;
        }
    }
    let users: Vec<(fpe_core::corpus::UserId, Vec<f64>, f64)> = by_user
        .into_iter()
        .map(|(user, (sum, hits, total))| {
            let mean: Vec<f64> = sum.iter().map(|x| x / total as f64).collect();
            (user, mean, hits as f64 / total as f64)
        })
        .collect();

    let report = fingerprint_neighborhood_analysis(&users, k)?;
    let out = ensure_out(common)?;
    let target = out.join("neighborhood.csv");
    let mut file = std::fs::File::create(&target)?;
    write_neighborhood_csv(&report, &mut file)?;
    match (report.degenerate, report.spearman, report.decile_gap) {
        (true, _, _) => println!("degenerate fingerprints: all pairwise distances equal"),
        (false, Some(rho), Some(gap)) => {
            println!("spearman(closeness, accuracy) {rho:.4}; decile accuracy gap {gap:.4}")
        }
        _ => println!("neighborhood statistics unavailable"),
    }
    println!("neighborhood -> {}", target.display());
    Ok(())
}

pub fn cmd_report(common: &CommonArgs) -> Result<()> {
    let out = &common.out;
    let mut found = false;
    for name in [
        "manifest.json",
        "history.csv",
        "metrics.csv",
        "sweep.csv",
        "buckets.csv",
        "neighborhood.csv",
    ] {
        let path = out.join(name);
        if !path.exists() {
            continue;
        }
        found = true;
        println!("== {name}");
        let text = std::fs::read_to_string(&path)?;
        for line in text.lines().take(12) {
            println!("   {line}");
        }
        let total = text.lines().count();
        if total > 12 {
            println!("   ... ({} more lines)", total - 12);
        }
    }
    if !found {
        return Err(Error::Config(format!(
            "no artifacts found under {}",
            out.display()
        )));
    }
    Ok(())
}

