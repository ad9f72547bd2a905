//! Predict a user's sentiment on an unseen news article from their
//! article-reading and comment-writing history.
//!
//! The pipeline ingests article–comment corpora, scores comments with
//! pluggable sentiment labelers, selects each target's history window
//! (recent or relevant), embeds reading and writing tracks, and trains
//! recurrent fingerprint models whose final hidden states summarize the
//! user. Three architectures are provided: a static fingerprint model, a
//! dynamic (target-conditioned) fingerprint model, and a subword baseline.
//!
//! Heavy inner loops (labeling, encoding, example building, evaluation)
//! run data-parallel under the `parallel` feature (on by default) and fall
//! back to sequential execution without it; both modes produce identical
//! results.

pub mod corpus;
pub mod encoding;
pub mod error;
pub mod evaluation;
pub mod history;
pub mod labeling;
pub mod models;
pub mod par;
pub mod synthgen;
pub mod training;

pub use error::{Error, ErrorCategory, Result};
