//! History selection and track assembly. For a target interaction we pick
//! either the most recent `s` prior interactions (static) or the `r` prior
//! interactions whose article titles are most similar to the target title
//! (dynamic), then embed them as reading and writing tracks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, UserTimeline};
use crate::encoding::{cosine_raw, Encoder};
use crate::error::{Error, Result};
use crate::labeling::{discretize, ClassThresholds, SentimentClass};
use crate::models::ModelKind;

pub const DEFAULT_STATIC_LENGTH: usize = 12;
pub const DEFAULT_DYNAMIC_LENGTH: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryKind {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryConfig {
    pub kind: HistoryKind,
    /// `s` for static windows, `r` for dynamic windows.
    pub length: usize,
    /// When set, dynamic selection skips prior interactions on the target's
    /// own article. Off by default: re-reads are real history.
    #[serde(default)]
    pub exclude_target_article: bool,
}

impl HistoryConfig {
    pub fn static_window(length: usize) -> Self {
        HistoryConfig {
            kind: HistoryKind::Static,
            length,
            exclude_target_article: false,
        }
    }

    pub fn dynamic_window(length: usize) -> Self {
        HistoryConfig {
            kind: HistoryKind::Dynamic,
            length,
            exclude_target_article: false,
        }
    }
}

impl Default for HistoryConfig {
    fn default() -> Self {
        HistoryConfig::dynamic_window(DEFAULT_DYNAMIC_LENGTH)
    }
}

/// One selected history item: an index into the timeline plus, for dynamic
/// windows, its similarity to the target title.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowItem {
    pub index: usize,
    pub similarity: Option<f64>,
}

/// The chosen history for one target, in chronological (timeline) order.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryWindow {
    pub target_index: usize,
    pub kind: HistoryKind,
    pub items: Vec<WindowItem>,
}

impl HistoryWindow {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// The `min(s, t)` interactions immediately preceding `target_index`.
/// A target at the very start of the timeline has no history to select.
pub fn select_static_history(
    timeline: &UserTimeline,
    target_index: usize,
    s: usize,
) -> Result<HistoryWindow> {
    assert!(target_index < timeline.len(), "target out of range");
    assert!(s >= 1, "window length must be positive");
    if target_index == 0 {
        return Err(Error::EmptyHistory(target_index));
    }
    let start = target_index.saturating_sub(s);
    Ok(HistoryWindow {
        target_index,
        kind: HistoryKind::Static,
        items: (start..target_index)
            .map(|index| WindowItem {
                index,
                similarity: None,
            })
            .collect(),
    })
}

/// Candidate ranking key: higher similarity wins, ties go to the more
/// recent interaction. Timeline order already breaks timestamp ties by
/// comment id, so the index is a total tiebreaker.
#[derive(PartialEq)]
struct Ranked {
    similarity: f64,
    index: usize,
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.similarity
            .partial_cmp(&other.similarity)
            .expect("finite similarity")
            .then(self.index.cmp(&other.index))
    }
}

/// Top-`r` prior interactions by title similarity to the target, re-sorted
/// chronologically. Selection keeps a bounded min-heap rather than sorting
/// every candidate.
pub fn select_dynamic_history(
    corpus: &Corpus,
    timeline: &UserTimeline,
    target_index: usize,
    r: usize,
    encoder: &dyn Encoder,
    exclude_target_article: bool,
) -> Result<HistoryWindow> {
    assert!(target_index < timeline.len(), "target out of range");
    assert!(r >= 1, "window length must be positive");
    if target_index == 0 {
        return Err(Error::EmptyHistory(target_index));
    }
    let target = &timeline.interactions[target_index];
    let target_vec = encoder.encode_single(corpus.title(&target.article_id))?;

    let mut heap: BinaryHeap<std::cmp::Reverse<Ranked>> = BinaryHeap::with_capacity(r + 1);
    for index in 0..target_index {
        let prior = &timeline.interactions[index];
        if exclude_target_article && prior.article_id == target.article_id {
            continue;
        }
        let prior_vec = encoder.encode_single(corpus.title(&prior.article_id))?;
        let similarity = cosine_raw(&target_vec.values, &prior_vec.values)?;
        heap.push(std::cmp::Reverse(Ranked { similarity, index }));
        if heap.len() > r {
            heap.pop();
        }
    }

    let mut items: Vec<WindowItem> = heap
        .into_iter()
        .map(|std::cmp::Reverse(ranked)| WindowItem {
            index: ranked.index,
            similarity: Some(ranked.similarity),
        })
        .collect();
    items.sort_by_key(|item| item.index);
    if items.is_empty() {
        return Err(Error::EmptyHistory(target_index));
    }
    Ok(HistoryWindow {
        target_index,
        kind: HistoryKind::Dynamic,
        items,
    })
}

pub fn select_history(
    corpus: &Corpus,
    timeline: &UserTimeline,
    target_index: usize,
    config: &HistoryConfig,
    encoder: &dyn Encoder,
) -> Result<HistoryWindow> {
    match config.kind {
        HistoryKind::Static => select_static_history(timeline, target_index, config.length),
        HistoryKind::Dynamic => select_dynamic_history(
            corpus,
            timeline,
            target_index,
            config.length,
            encoder,
            config.exclude_target_article,
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackKind {
    Reading,
    Writing,
}

/// Time-ordered sequence of embeddings plus the per-step sentiment class of
/// each item's comment under the active labeler.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSequence {
    pub vectors: Vec<crate::encoding::EmbeddingVector>,
    pub step_labels: Vec<SentimentClass>,
    pub track: TrackKind,
}

impl TrackSequence {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn step_label(
    comment: &crate::corpus::Comment,
    labeler: &str,
    thresholds: ClassThresholds,
) -> Result<SentimentClass> {
    let value = comment
        .scores
        .get(labeler)
        .ok_or_else(|| Error::MissingScore {
            comment_id: comment.id.0.clone(),
            labeler: labeler.to_string(),
        })?;
    Ok(discretize(*value, thresholds))
}

/// Reading track: one vector per history item. Static models embed the
/// history title alone; dynamic models embed it conditioned on the target
/// title in pair mode.
pub fn build_reading_track(
    corpus: &Corpus,
    timeline: &UserTimeline,
    window: &HistoryWindow,
    model_kind: ModelKind,
    encoder: &dyn Encoder,
    labeler: &str,
    thresholds: ClassThresholds,
) -> Result<TrackSequence> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let target_title = corpus.title(&timeline.interactions[window.target_index].article_id);
    let mut vectors = Vec::with_capacity(window.len());
    let mut step_labels = Vec::with_capacity(window.len());
    for item in &window.items {
        let comment = &timeline.interactions[item.index];
        let title = corpus.title(&comment.article_id);
        let vector = match model_kind {
            ModelKind::StaticFpe | ModelKind::Baseline => encoder.encode_single(title)?,
            ModelKind::DynamicFpe => encoder.encode_pair(title, target_title)?,
        };
        vectors.push(vector);
        step_labels.push(step_label(comment, labeler, thresholds)?);
    }
    Ok(TrackSequence {
        vectors,
        step_labels,
        track: TrackKind::Reading,
    })
}

/// Writing track: each history title conditioned on its own comment, pair
/// mode. Identical construction for every model kind.
pub fn build_writing_track(
    corpus: &Corpus,
    timeline: &UserTimeline,
    window: &HistoryWindow,
    encoder: &dyn Encoder,
    labeler: &str,
    thresholds: ClassThresholds,
) -> Result<TrackSequence> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut vectors = Vec::with_capacity(window.len());
    let mut step_labels = Vec::with_capacity(window.len());
    for item in &window.items {
        let comment = &timeline.interactions[item.index];
        let title = corpus.title(&comment.article_id);
        vectors.push(encoder.encode_pair(title, &comment.body)?);
        step_labels.push(step_label(comment, labeler, thresholds)?);
    }
    Ok(TrackSequence {
        vectors,
        step_labels,
        track: TrackKind::Writing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest_corpus, UserId};
    use crate::encoding::ReferenceEncoder;

    /// Build a corpus where user u1 comments once per given title.
    fn corpus_from_titles(titles: &[&str]) -> Corpus {
        let mut lines = Vec::new();
        for (i, title) in titles.iter().enumerate() {
            lines.push(format!(
                r#"{{"kind":"article","article_id":"a{i:03}","title":"{title}","published_at":"2020-01-01T00:00:00Z","outlet":"o"}}"#
            ));
        }
        for (i, _) in titles.iter().enumerate() {
            lines.push(format!(
                r#"{{"kind":"comment","comment_id":"c{i:03}","user_id":"u1","article_id":"a{i:03}","body":"great words here","created_at":"2020-01-02T{:02}:00:00Z"}}"#,
                i % 24
            ));
        }
        let mut corpus = ingest_corpus(lines.join("\n").as_bytes(), false).unwrap();
        corpus = crate::labeling::label_corpus(&corpus, &[crate::labeling::LabelerSpec::Lexicon])
            .unwrap();
        corpus
    }

    fn timeline(corpus: &Corpus) -> &UserTimeline {
        &corpus.timelines[&UserId("u1".into())]
    }

    #[test]
    fn configured_defaults() {
        // Window lengths ship with the documented defaults: 12 recent
        // items for static selection, top 15 by relevance for dynamic.
        assert_eq!(DEFAULT_STATIC_LENGTH, 12);
        assert_eq!(DEFAULT_DYNAMIC_LENGTH, 15);
        let config = HistoryConfig::default();
        assert_eq!(config.kind, HistoryKind::Dynamic);
        assert_eq!(config.length, 15);
        assert_eq!(HistoryConfig::static_window(DEFAULT_STATIC_LENGTH).length, 12);
    }

    #[test]
    fn static_window_takes_most_recent() {
        let corpus = corpus_from_titles(&["t0", "t1", "t2", "t3", "t4", "t5"]);
        let window = select_static_history(timeline(&corpus), 5, 3).unwrap();
        let indices: Vec<usize> = window.items.iter().map(|i| i.index).collect();
        assert_eq!(indices, [2, 3, 4]);
    }

    #[test]
    fn static_window_shorter_than_s() {
        let corpus = corpus_from_titles(&["t0", "t1", "t2"]);
        let window = select_static_history(timeline(&corpus), 1, 12).unwrap();
        let indices: Vec<usize> = window.items.iter().map(|i| i.index).collect();
        assert_eq!(indices, [0]);
    }

    #[test]
    fn static_window_at_start_errors() {
        let corpus = corpus_from_titles(&["t0", "t1"]);
        assert!(matches!(
            select_static_history(timeline(&corpus), 0, 12),
            Err(Error::EmptyHistory(0))
        ));
    }

    #[test]
    fn dynamic_selects_top_r_then_reorders_chronologically() {
        // Priors: very similar, unrelated, somewhat similar. Target shares
        // words with priors 0 and 2.
        let corpus = corpus_from_titles(&[
            "congress votes on the budget tonight",
            "zebra migration patterns in spring",
            "congress budget talks continue",
            "congress votes on the budget again",
        ]);
        let encoder = ReferenceEncoder::new(256).unwrap();
        let window =
            select_dynamic_history(&corpus, timeline(&corpus), 3, 2, &encoder, false).unwrap();
        let indices: Vec<usize> = window.items.iter().map(|i| i.index).collect();
        assert_eq!(indices, [0, 2]);
        // Chronological order, not similarity order.
        assert!(window.items[0].similarity.unwrap() > window.items[1].similarity.unwrap());
    }

    #[test]
    fn dynamic_r_larger_than_priors_takes_all() {
        let corpus = corpus_from_titles(&["alpha beta", "gamma delta", "epsilon zeta"]);
        let encoder = ReferenceEncoder::new(64).unwrap();
        let window =
            select_dynamic_history(&corpus, timeline(&corpus), 2, 15, &encoder, false).unwrap();
        assert_eq!(window.len(), 2);
    }

    #[test]
    fn dynamic_tie_prefers_more_recent() {
        // Identical titles produce exactly equal similarities.
        let corpus = corpus_from_titles(&["same headline", "same headline", "same headline"]);
        let encoder = ReferenceEncoder::new(64).unwrap();
        let window =
            select_dynamic_history(&corpus, timeline(&corpus), 2, 1, &encoder, false).unwrap();
        assert_eq!(window.items[0].index, 1);
    }

    #[test]
    fn exclusion_flag_skips_target_article_reruns() {
        let mut lines = vec![
            r#"{"kind":"article","article_id":"a0","title":"the one story","published_at":"2020-01-01T00:00:00Z","outlet":"o"}"#.to_string(),
            r#"{"kind":"article","article_id":"a1","title":"another story entirely","published_at":"2020-01-01T00:00:00Z","outlet":"o"}"#.to_string(),
        ];
        for (i, article) in ["a0", "a1", "a0"].iter().enumerate() {
            lines.push(format!(
                r#"{{"kind":"comment","comment_id":"c{i}","user_id":"u1","article_id":"{article}","body":"fine words","created_at":"2020-01-02T0{i}:00:00Z"}}"#
            ));
        }
        let corpus = ingest_corpus(lines.join("\n").as_bytes(), false).unwrap();
        let encoder = ReferenceEncoder::new(64).unwrap();
        let t = &corpus.timelines[&UserId("u1".into())];
        let with = select_dynamic_history(&corpus, t, 2, 2, &encoder, false).unwrap();
        assert_eq!(with.len(), 2);
        let without = select_dynamic_history(&corpus, t, 2, 2, &encoder, true).unwrap();
        let indices: Vec<usize> = without.items.iter().map(|i| i.index).collect();
        assert_eq!(indices, [1]);
    }

    #[test]
    fn reading_track_static_vs_dynamic_construction() {
        let corpus = corpus_from_titles(&["first story", "second story", "third story"]);
        let encoder = ReferenceEncoder::new(64).unwrap();
        let t = timeline(&corpus);
        let window = select_static_history(t, 2, 1).unwrap();
        let thresholds = ClassThresholds::default();

        let static_track = build_reading_track(
            &corpus, t, &window, ModelKind::StaticFpe, &encoder, "lexicon", thresholds,
        )
        .unwrap();
        assert_eq!(static_track.len(), 1);
        let direct = encoder.encode_single("second story").unwrap();
        assert_eq!(static_track.vectors[0].values, direct.values);

        let dynamic_track = build_reading_track(
            &corpus, t, &window, ModelKind::DynamicFpe, &encoder, "lexicon", thresholds,
        )
        .unwrap();
        let paired = encoder.encode_pair("second story", "third story").unwrap();
        assert_eq!(dynamic_track.vectors[0].values, paired.values);
    }

    #[test]
    fn writing_track_pairs_title_with_comment() {
        let corpus = corpus_from_titles(&["first story", "second story"]);
        let encoder = ReferenceEncoder::new(64).unwrap();
        let t = timeline(&corpus);
        let window = select_static_history(t, 1, 5).unwrap();
        let track = build_writing_track(
            &corpus, t, &window, &encoder, "lexicon", ClassThresholds::default(),
        )
        .unwrap();
        assert_eq!(track.len(), 1);
        let expected = encoder
            .encode_pair("first story", "great words here")
            .unwrap();
        assert_eq!(track.vectors[0].values, expected.values);
        // "great" carries positive valence, so the step label is positive.
        assert_eq!(track.step_labels[0], SentimentClass::Positive);
    }

    #[test]
    fn track_lengths_and_labels_align() {
        let titles: Vec<String> = (0..20).map(|i| format!("story number {i}")).collect();
        let title_refs: Vec<&str> = titles.iter().map(|s| s.as_str()).collect();
        let corpus = corpus_from_titles(&title_refs);
        let encoder = ReferenceEncoder::new(64).unwrap();
        let t = timeline(&corpus);
        let window =
            select_dynamic_history(&corpus, t, 19, 15, &encoder, false).unwrap();
        assert_eq!(window.len(), 15);
        let track = build_reading_track(
            &corpus, t, &window, ModelKind::DynamicFpe, &encoder, "lexicon",
            ClassThresholds::default(),
        )
        .unwrap();
        assert_eq!(track.vectors.len(), 15);
        assert_eq!(track.step_labels.len(), 15);
    }

    #[test]
    fn empty_window_rejected_by_track_builders() {
        let corpus = corpus_from_titles(&["a story", "b story"]);
        let encoder = ReferenceEncoder::new(64).unwrap();
        let t = timeline(&corpus);
        let window = HistoryWindow {
            target_index: 1,
            kind: HistoryKind::Static,
            items: vec![],
        };
        assert!(matches!(
            build_reading_track(
                &corpus, t, &window, ModelKind::StaticFpe, &encoder, "lexicon",
                ClassThresholds::default()
            ),
            Err(Error::EmptyWindow)
        ));
    }
}
