//! Command-line surface. Config-file-first: `--config` loads a JSON run
//! configuration and individual flags override single fields.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "fpe",
    version,
    about = "Fingerprint-embedding pipeline: predict user sentiment on unseen articles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// JSON run configuration (or a manifest from an earlier run).
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Corpus JSONL file.
    #[arg(long)]
    pub corpus: Option<PathBuf>,

    /// Model architecture: static_fpe, dynamic_fpe, or baseline.
    #[arg(long)]
    pub model: Option<String>,

    /// History selection: static or dynamic.
    #[arg(long)]
    pub history: Option<String>,

    /// History window length (s for static, r for dynamic).
    #[arg(long)]
    pub length: Option<usize>,

    /// Encoder: `reference` or `plugin:CMD`.
    #[arg(long)]
    pub encoder: Option<String>,

    /// Embedding dimension for the reference encoder.
    #[arg(long)]
    pub dimension: Option<usize>,

    /// Active labeler: lexicon, subjectivity, or plugin:CMD.
    #[arg(long)]
    pub labeler: Option<String>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory for artifacts.
    #[arg(long, default_value = "fpe-out")]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a corpus file and print its statistics.
    Ingest {
        #[command(flatten)]
        common: CommonArgs,
        /// Require every article to be defined before first use.
        #[arg(long)]
        strict: bool,
        /// Write the normalized corpus back out to OUT/corpus.jsonl.
        #[arg(long)]
        write: bool,
    },
    /// Score every comment with the configured labelers.
    Label {
        #[command(flatten)]
        common: CommonArgs,
        /// Additional labelers (repeatable). The active labeler is always
        /// included.
        #[arg(long = "also-labeler")]
        also: Vec<String>,
    },
    /// Compute chronological per-user splits and write them as JSON.
    Split {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0.1)]
        test_frac: f64,
        #[arg(long, default_value_t = 0.1)]
        val_frac: f64,
        #[arg(long, default_value_t = 10)]
        min_comments: usize,
    },
    /// Generate a synthetic corpus with persona ground truth.
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 50)]
        users: usize,
        #[arg(long, default_value_t = 200)]
        articles: usize,
        #[arg(long, default_value_t = 4)]
        topics: usize,
        /// Persona consistency probability.
        #[arg(long, default_value_t = 0.9)]
        q: f64,
        #[arg(long, default_value_t = 45)]
        min_comments_per_user: usize,
        #[arg(long, default_value_t = 70)]
        max_comments_per_user: usize,
    },
    /// Train a model; writes manifest.json, history.csv, checkpoint.fpe.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Reproduce a previous run from its manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on the test split; writes metrics.csv.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Checkpoint path; defaults to OUT/checkpoint.fpe.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Train and evaluate one model per history length; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated history lengths.
        #[arg(long, default_value = "5,10,15,20")]
        lengths: String,
    },
    /// Bucket articles by comment polarity; writes buckets.csv.
    Buckets {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0.6)]
        neg_frac: f64,
        #[arg(long, default_value_t = 0.6)]
        pos_frac: f64,
        #[arg(long, default_value_t = 20)]
        min_comments: usize,
        /// Optional checkpoint for per-article test F1.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Fingerprint-neighborhood analysis; writes neighborhood.csv.
    Neighborhood {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Neighbor count.
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Summarize the artifacts in an output directory.
    Report {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Serve the built-in encoder and labeler over the plugin protocol on
    /// stdin/stdout (reference implementation for plugin authors).
    PluginServe {
        #[arg(long, default_value_t = 768)]
        dimension: usize,
        #[arg(long, default_value = "reference-plugin")]
        name: String,
    },
}
