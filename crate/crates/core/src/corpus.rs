//! Article–comment corpus: data model, JSONL ingestion, user filtering, and
//! chronological train/validation/test splitting.
//!
//! A [`Corpus`] is immutable once built and cheap to share across readers.
//! Only article titles are stored; article bodies are deliberately absent
//! from the data model.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::ops::Range;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArticleId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommentId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub String);

impl std::fmt::Display for ArticleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}
impl std::fmt::Display for CommentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}
impl std::fmt::Display for UserId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// A news article. Only the title is modeled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: ArticleId,
    pub title: String,
    /// Epoch seconds, UTC.
    pub published_at: i64,
    pub outlet: String,
}

/// One user comment on an article. `scores` maps labeler name to a
/// sentiment value in [-1, 1]; it is empty until the labeling pass runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub id: CommentId,
    pub user_id: UserId,
    pub article_id: ArticleId,
    pub body: String,
    /// Epoch seconds, UTC.
    pub created_at: i64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scores: BTreeMap<String, f64>,
}

/// A user's interactions in chronological order. Each comment is one
/// interaction; a user may comment several times on the same article.
/// Ordering is by `(created_at, comment_id)`, which is a total order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTimeline {
    pub user_id: UserId,
    pub interactions: Vec<Comment>,
}

impl UserTimeline {
    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub articles: BTreeMap<ArticleId, Article>,
    pub timelines: BTreeMap<UserId, UserTimeline>,
}

impl Corpus {
    pub fn article(&self, id: &ArticleId) -> Option<&Article> {
        self.articles.get(id)
    }

    pub fn title(&self, id: &ArticleId) -> &str {
        &self.articles[id].title
    }

    pub fn comment_count(&self) -> usize {
        self.timelines.values().map(|t| t.len()).sum()
    }
}

/// Per-user index ranges over the interaction sequence. Contiguous,
/// time-ordered train < validation < test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRanges {
    pub train: Range<usize>,
    pub validation: Range<usize>,
    pub test: Range<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndex {
    pub by_user: BTreeMap<UserId, SplitRanges>,
}

/// One line of the JSONL corpus format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusRecord {
    Article {
        article_id: String,
        title: String,
        /// ISO-8601 UTC timestamp.
        published_at: String,
        outlet: String,
    },
    Comment {
        comment_id: String,
        user_id: String,
        article_id: String,
        body: String,
        /// ISO-8601 UTC timestamp.
        created_at: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        scores: BTreeMap<String, f64>,
    },
}

/// Whitespace trim plus Unicode NFC.
pub fn normalize_text(s: &str) -> String {
    s.trim().nfc().collect()
}

fn parse_timestamp(raw: &str, line: usize) -> Result<i64> {
    DateTime::parse_from_rfc3339(raw)
        .map(|dt| dt.timestamp())
        .map_err(|e| Error::Parse {
            line,
            message: format!("bad timestamp `{raw}`: {e}"),
        })
}

pub fn format_timestamp(secs: i64) -> String {
    DateTime::<Utc>::from_timestamp(secs, 0)
        .expect("timestamp in range")
        .format("%Y-%m-%dT%H:%M:%SZ")
        .to_string()
}

/// Ingest a JSONL corpus from a reader.
///
/// Articles may appear anywhere before or after the comments referencing
/// them unless `strict` is set, in which case every comment line must
/// follow its article's definition.
pub fn ingest_corpus<R: BufRead>(reader: R, strict: bool) -> Result<Corpus> {
    let mut articles: BTreeMap<ArticleId, Article> = BTreeMap::new();
    let mut comments: Vec<Comment> = Vec::new();
    let mut comment_ids: std::collections::BTreeSet<CommentId> = Default::default();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        match record {
            CorpusRecord::Article {
                article_id,
                title,
                published_at,
                outlet,
            } => {
                let id = ArticleId(article_id);
                let title = normalize_text(&title);
                if title.is_empty() {
                    return Err(Error::EmptyTitle(id.0));
                }
                let article = Article {
                    id: id.clone(),
                    title,
                    published_at: parse_timestamp(&published_at, line_no)?,
                    outlet: normalize_text(&outlet),
                };
                if articles.insert(id.clone(), article).is_some() {
                    return Err(Error::DuplicateArticle(id.0));
                }
            }
            CorpusRecord::Comment {
                comment_id,
                user_id,
                article_id,
                body,
                created_at,
                scores,
            } => {
                let id = CommentId(comment_id);
                let article_id = ArticleId(article_id);
                if strict && !articles.contains_key(&article_id) {
                    return Err(Error::UseBeforeDefinition {
                        line: line_no,
                        comment_id: id.0,
                        article_id: article_id.0,
                    });
                }
                let body = normalize_text(&body);
                if body.is_empty() {
                    return Err(Error::EmptyBody(id.0));
                }
                if !comment_ids.insert(id.clone()) {
                    return Err(Error::DuplicateComment(id.0));
                }
                comments.push(Comment {
                    id,
                    user_id: UserId(normalize_text(&user_id)),
                    article_id,
                    body,
                    created_at: parse_timestamp(&created_at, line_no)?,
                    scores,
                });
            }
        }
    }

    for comment in &comments {
        if !articles.contains_key(&comment.article_id) {
            return Err(Error::DanglingReference {
                comment_id: comment.id.0.clone(),
                article_id: comment.article_id.0.clone(),
            });
        }
    }

    let mut timelines: BTreeMap<UserId, UserTimeline> = BTreeMap::new();
    for comment in comments {
        timelines
            .entry(comment.user_id.clone())
            .or_insert_with(|| UserTimeline {
                user_id: comment.user_id.clone(),
                interactions: Vec::new(),
            })
            .interactions
            .push(comment);
    }
    for timeline in timelines.values_mut() {
        timeline
            .interactions
            .sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
    }

    Ok(Corpus {
        articles,
        timelines,
    })
}

/// Write a corpus back out in the JSONL format. Articles first (sorted by
/// id), then comments per user in timeline order, so that re-ingesting
/// yields an identical corpus.
pub fn write_corpus<W: Write>(corpus: &Corpus, writer: &mut W) -> Result<()> {
    for article in corpus.articles.values() {
        let record = CorpusRecord::Article {
            article_id: article.id.0.clone(),
            title: article.title.clone(),
            published_at: format_timestamp(article.published_at),
            outlet: article.outlet.clone(),
        };
        writeln!(writer, "{}", serde_json::to_string(&record)?)?;
    }
    for timeline in corpus.timelines.values() {
        for comment in &timeline.interactions {
            let record = CorpusRecord::Comment {
                comment_id: comment.id.0.clone(),
                user_id: comment.user_id.0.clone(),
                article_id: comment.article_id.0.clone(),
                body: comment.body.clone(),
                created_at: format_timestamp(comment.created_at),
                scores: comment.scores.clone(),
            };
            writeln!(writer, "{}", serde_json::to_string(&record)?)?;
        }
    }
    Ok(())
}

/// Drop users with fewer than `min_comments` interactions, then drop
/// articles that no surviving user commented on. User filtering runs first,
/// so article removal can never push a surviving user back under the
/// threshold.
pub fn filter_users(corpus: &Corpus, min_comments: usize) -> Corpus {
    let timelines: BTreeMap<UserId, UserTimeline> = corpus
        .timelines
        .iter()
        .filter(|(_, t)| t.len() >= min_comments)
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();

    let mut referenced: std::collections::BTreeSet<&ArticleId> = Default::default();
    for timeline in timelines.values() {
        for comment in &timeline.interactions {
            referenced.insert(&comment.article_id);
        }
    }
    let articles: BTreeMap<ArticleId, Article> = corpus
        .articles
        .iter()
        .filter(|(id, _)| referenced.contains(id))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();

    Corpus {
        articles,
        timelines,
    }
}

/// Chronological split of one timeline: the last `ceil(test_frac * N)`
/// interactions become the test part, the last `ceil(val_frac * remainder)`
/// of what precedes them become validation, the rest is train.
pub fn chronological_split(
    timeline: &UserTimeline,
    test_frac: f64,
    val_frac: f64,
) -> Result<SplitRanges> {
    let n = timeline.len();
    if n < 3 {
        return Err(Error::TimelineTooShort { len: n });
    }
    let test_len = (test_frac * n as f64).ceil() as usize;
    let rest = n - test_len;
    let val_len = (val_frac * rest as f64).ceil() as usize;
    let train_len = rest - val_len;
    Ok(SplitRanges {
        train: 0..train_len,
        validation: train_len..rest,
        test: rest..n,
    })
}

/// Split every timeline in the corpus. Timelines shorter than 3 are an
/// error; filter first if the corpus may contain them.
pub fn split_corpus(corpus: &Corpus, test_frac: f64, val_frac: f64) -> Result<SplitIndex> {
    let mut by_user = BTreeMap::new();
    for (user_id, timeline) in &corpus.timelines {
        by_user.insert(
            user_id.clone(),
            chronological_split(timeline, test_frac, val_frac)?,
        );
    }
    Ok(SplitIndex { by_user })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub user_count: usize,
    pub article_count: usize,
    pub comment_count: usize,
    pub mean_comments_per_user: f64,
    /// Lower median for even user counts.
    pub median_comments_per_user: usize,
}

pub fn corpus_stats(corpus: &Corpus) -> StatsReport {
    let mut counts: Vec<usize> = corpus.timelines.values().map(|t| t.len()).collect();
    counts.sort_unstable();
    let comment_count: usize = counts.iter().sum();
    let user_count = counts.len();
    let mean = if user_count == 0 {
        0.0
    } else {
        comment_count as f64 / user_count as f64
    };
    let median = if user_count == 0 {
        0
    } else if user_count % 2 == 1 {
        counts[user_count / 2]
    } else {
        counts[user_count / 2 - 1]
    };
    StatsReport {
        user_count,
        article_count: corpus.articles.len(),
        comment_count,
        mean_comments_per_user: mean,
        median_comments_per_user: median,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn article_line(id: &str, title: &str) -> String {
        format!(
            r#"{{"kind":"article","article_id":"{id}","title":"{title}","published_at":"2020-01-01T00:00:00Z","outlet":"desk"}}"#
        )
    }

    pub(crate) fn comment_line(id: &str, user: &str, article: &str, body: &str, at: &str) -> String {
        format!(
            r#"{{"kind":"comment","comment_id":"{id}","user_id":"{user}","article_id":"{article}","body":"{body}","created_at":"{at}"}}"#
        )
    }

    fn small_corpus_jsonl() -> String {
        [
            article_line("a1", "tax bill moves forward"),
            comment_line("c1", "u1", "a1", "strong words", "2020-01-02T00:00:00Z"),
            comment_line("c2", "u1", "a1", "more words", "2020-01-03T00:00:00Z"),
        ]
        .join("\n")
    }

    #[test]
    fn ingest_minimal() {
        let corpus = ingest_corpus(small_corpus_jsonl().as_bytes(), false).unwrap();
        assert_eq!(corpus.articles.len(), 1);
        assert_eq!(corpus.timelines.len(), 1);
        assert_eq!(corpus.timelines[&UserId("u1".into())].len(), 2);
    }

    #[test]
    fn ingest_dangling_reference() {
        let text = comment_line("c1", "u1", "missing", "hello there", "2020-01-02T00:00:00Z");
        let err = ingest_corpus(text.as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::DanglingReference { .. }));
    }

    #[test]
    fn ingest_duplicate_comment_id() {
        let text = [
            article_line("a1", "t"),
            comment_line("c1", "u1", "a1", "x y", "2020-01-02T00:00:00Z"),
            comment_line("c1", "u1", "a1", "x z", "2020-01-03T00:00:00Z"),
        ]
        .join("\n");
        let err = ingest_corpus(text.as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::DuplicateComment(_)));
    }

    #[test]
    fn ingest_parse_error_carries_line_number() {
        let text = format!("{}\nnot json", article_line("a1", "t"));
        let err = ingest_corpus(text.as_bytes(), false).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn strict_mode_requires_definition_before_use() {
        let text = [
            comment_line("c1", "u1", "a1", "x y", "2020-01-02T00:00:00Z"),
            article_line("a1", "t"),
        ]
        .join("\n");
        assert!(ingest_corpus(text.as_bytes(), false).is_ok());
        let err = ingest_corpus(text.as_bytes(), true).unwrap_err();
        assert!(matches!(err, Error::UseBeforeDefinition { .. }));
    }

    #[test]
    fn timeline_orders_by_time_then_comment_id() {
        let text = [
            article_line("a1", "t"),
            comment_line("c_z", "u1", "a1", "late id same time", "2020-01-02T00:00:00Z"),
            comment_line("c_a", "u1", "a1", "early id same time", "2020-01-02T00:00:00Z"),
            comment_line("c_0", "u1", "a1", "earlier time", "2020-01-01T00:00:00Z"),
        ]
        .join("\n");
        let corpus = ingest_corpus(text.as_bytes(), false).unwrap();
        let ids: Vec<&str> = corpus.timelines[&UserId("u1".into())]
            .interactions
            .iter()
            .map(|c| c.id.0.as_str())
            .collect();
        assert_eq!(ids, ["c_0", "c_a", "c_z"]);
    }

    #[test]
    fn round_trip_identity() {
        let corpus = ingest_corpus(small_corpus_jsonl().as_bytes(), false).unwrap();
        let mut buf = Vec::new();
        write_corpus(&corpus, &mut buf).unwrap();
        let again = ingest_corpus(buf.as_slice(), true).unwrap();
        assert_eq!(corpus, again);
    }

    fn corpus_with_users(specs: &[(&str, usize)]) -> Corpus {
        // Every user comments on a shared article plus their own article.
        let mut lines = vec![article_line("shared", "shared title")];
        for (user, _) in specs {
            lines.push(article_line(&format!("own_{user}"), &format!("{user} title")));
        }
        for (user, count) in specs {
            for i in 0..*count {
                let article = if i == 0 { "shared".to_string() } else { format!("own_{user}") };
                lines.push(comment_line(
                    &format!("{user}_{i:03}"),
                    user,
                    &article,
                    "some words",
                    &format!("2020-01-01T00:00:{:02}Z", i % 60),
                ));
            }
        }
        ingest_corpus(lines.join("\n").as_bytes(), false).unwrap()
    }

    #[test]
    fn filter_removes_small_users_and_orphan_articles() {
        let corpus = corpus_with_users(&[("u_big", 12), ("u_small", 5)]);
        let filtered = filter_users(&corpus, 10);
        assert_eq!(filtered.timelines.len(), 1);
        assert!(filtered.timelines.contains_key(&UserId("u_big".into())));
        // Shared article survives through u_big; u_small's own article is gone.
        assert!(filtered.articles.contains_key(&ArticleId("shared".into())));
        assert!(filtered.articles.contains_key(&ArticleId("own_u_big".into())));
        assert!(!filtered.articles.contains_key(&ArticleId("own_u_small".into())));
    }

    #[test]
    fn filter_user_with_nine_comments_removed_at_ten() {
        let corpus = corpus_with_users(&[("u_nine", 9)]);
        let filtered = filter_users(&corpus, 10);
        assert!(filtered.timelines.is_empty());
        assert!(filtered.articles.is_empty());
    }

    #[test]
    fn filter_min_one_only_drops_commentless_articles() {
        let mut corpus = corpus_with_users(&[("u1", 3)]);
        corpus.articles.insert(
            ArticleId("orphan".into()),
            Article {
                id: ArticleId("orphan".into()),
                title: "nobody commented".into(),
                published_at: 0,
                outlet: "desk".into(),
            },
        );
        let filtered = filter_users(&corpus, 1);
        assert_eq!(filtered.timelines, corpus.timelines);
        assert!(!filtered.articles.contains_key(&ArticleId("orphan".into())));
    }

    #[test]
    fn filter_idempotent() {
        let corpus = corpus_with_users(&[("a", 12), ("b", 5), ("c", 10)]);
        let once = filter_users(&corpus, 10);
        let twice = filter_users(&once, 10);
        assert_eq!(once, twice);
    }

    fn timeline_of(n: usize) -> UserTimeline {
        UserTimeline {
            user_id: UserId("u".into()),
            interactions: (0..n)
                .map(|i| Comment {
                    id: CommentId(format!("c{i:04}")),
                    user_id: UserId("u".into()),
                    article_id: ArticleId("a".into()),
                    body: "b".into(),
                    created_at: i as i64,
                    scores: BTreeMap::new(),
                })
                .collect(),
        }
    }

    #[test]
    fn split_sizes_n20() {
        let ranges = chronological_split(&timeline_of(20), 0.1, 0.1).unwrap();
        assert_eq!(ranges.train, 0..16);
        assert_eq!(ranges.validation, 16..18);
        assert_eq!(ranges.test, 18..20);
    }

    #[test]
    fn split_sizes_n10() {
        let ranges = chronological_split(&timeline_of(10), 0.1, 0.1).unwrap();
        assert_eq!(ranges.train, 0..8);
        assert_eq!(ranges.validation, 8..9);
        assert_eq!(ranges.test, 9..10);
    }

    #[test]
    fn split_too_short() {
        let err = chronological_split(&timeline_of(2), 0.1, 0.1).unwrap_err();
        assert!(matches!(err, Error::TimelineTooShort { len: 2 }));
    }

    #[test]
    fn stats_empty() {
        let stats = corpus_stats(&Corpus::default());
        assert_eq!(stats.user_count, 0);
        assert_eq!(stats.comment_count, 0);
        assert_eq!(stats.mean_comments_per_user, 0.0);
        assert_eq!(stats.median_comments_per_user, 0);
    }

    #[test]
    fn stats_mean_and_lower_median() {
        let corpus = corpus_with_users(&[("u1", 3), ("u2", 5)]);
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.mean_comments_per_user, 4.0);
        assert_eq!(stats.median_comments_per_user, 3);
    }

    #[test]
    fn normalization_trims_and_recomposes() {
        // e + combining acute accent recomposes to a single code point.
        let normalized = normalize_text("  cafe\u{0301}  ");
        assert_eq!(normalized, "caf\u{e9}");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        prop_compose! {
            fn arb_corpus()(
                titles in prop::collection::vec("[a-z]{1,12}( [a-z]{1,12}){0,4}", 1..6),
                users in prop::collection::vec(
                    (0usize..6, prop::collection::vec(("[a-z ]{1,20}", 0i64..100_000), 1..8)),
                    1..4,
                ),
            ) -> Corpus {
                let mut lines = Vec::new();
                for (i, title) in titles.iter().enumerate() {
                    lines.push(article_line(&format!("a{i}"), title));
                }
                let mut counter = 0;
                for (u, (article_pick, comments)) in users.iter().enumerate() {
                    for (body, at) in comments {
                        let body = if body.trim().is_empty() { "x" } else { body.as_str() };
                        let article = article_pick % titles.len();
                        lines.push(format!(
                            r#"{{"kind":"comment","comment_id":"c{counter:04}","user_id":"u{u}","article_id":"a{article}","body":"{body}","created_at":"{}"}}"#,
                            format_timestamp(*at),
                        ));
                        counter += 1;
                    }
                }
                ingest_corpus(lines.join("\n").as_bytes(), false).unwrap()
            }
        }

        proptest! {
            #[test]
            fn round_trip_is_identity(corpus in arb_corpus()) {
                let mut buf = Vec::new();
                write_corpus(&corpus, &mut buf).unwrap();
                let again = ingest_corpus(buf.as_slice(), true).unwrap();
                prop_assert_eq!(corpus, again);
            }

            #[test]
            fn filtering_is_idempotent(corpus in arb_corpus(), min in 1usize..6) {
                let once = filter_users(&corpus, min);
                let twice = filter_users(&once, min);
                prop_assert_eq!(once, twice);
            }
        }
    }
}
