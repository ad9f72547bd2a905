//! Sentiment labeling: pluggable labelers that score comments in [-1, 1]
//! and discretization into {negative, neutral, positive} classes.
//!
//! The built-in `lexicon` labeler is a rule-based scorer over a shipped
//! word-valence table with single-token negation flipping. The built-in
//! `subjectivity` labeler maps the fraction of valenced tokens in [0, 1]
//! to [-1, 1] via `2v - 1`. External tools attach through the plugin
//! protocol shared with encoders.

use std::collections::BTreeMap;
use std::sync::Arc;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::encoding::plugin::PluginClient;
use crate::error::{Error, Result};
use crate::par;

/// Normalization constant of the lexicon score; keeps values in (-1, 1).
pub const LEXICON_ALPHA: f64 = 15.0;

pub static VALENCE_LEXICON: Lazy<BTreeMap<&'static str, f64>> = Lazy::new(|| {
    include_str!("data/valence.tsv")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (word, valence) = l.split_once('\t').expect("token<TAB>valence");
            (word, valence.parse::<f64>().expect("numeric valence"))
        })
        .collect()
});

const NEGATORS: &[&str] = &[
    "not", "no", "never", "none", "neither", "nor", "cannot", "can't", "won't", "don't",
    "doesn't", "didn't", "isn't", "wasn't", "aren't", "weren't", "couldn't", "shouldn't",
    "wouldn't", "without",
];

/// A sentiment value in [-1, 1] attributed to a labeler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub value: f64,
    pub labeler: String,
}

/// Ternary sentiment class with fixed integer codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentClass {
    Negative = 0,
    Neutral = 1,
    Positive = 2,
}

impl SentimentClass {
    pub const COUNT: usize = 3;

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Result<Self> {
        match code {
            0 => Ok(SentimentClass::Negative),
            1 => Ok(SentimentClass::Neutral),
            2 => Ok(SentimentClass::Positive),
            _ => Err(Error::LabelOutOfRange {
                label: code,
                classes: Self::COUNT,
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SentimentClass::Negative => "negative",
            SentimentClass::Neutral => "neutral",
            SentimentClass::Positive => "positive",
        }
    }
}

/// Which labeler to run and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LabelerSpec {
    Lexicon,
    Subjectivity,
    /// External plugin; `command` is the child process to spawn.
    External { id: String, command: String },
}

impl LabelerSpec {
    pub fn label_name(&self) -> String {
        match self {
            LabelerSpec::Lexicon => "lexicon".into(),
            LabelerSpec::Subjectivity => "subjectivity".into(),
            LabelerSpec::External { id, .. } => format!("external:{id}"),
        }
    }

    /// Parse a CLI-style name: `lexicon`, `subjectivity`, or `plugin:CMD`.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "lexicon" => Ok(LabelerSpec::Lexicon),
            "subjectivity" => Ok(LabelerSpec::Subjectivity),
            other => {
                if let Some(command) = other.strip_prefix("plugin:") {
                    Ok(LabelerSpec::External {
                        id: command.split_whitespace().next().unwrap_or("plugin").into(),
                        command: command.into(),
                    })
                } else {
                    Err(Error::UnknownLabeler(other.into()))
                }
            }
        }
    }
}

/// Lowercased word tokens; leading/trailing punctuation stripped, internal
/// apostrophes kept so contractions stay whole.
fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| {
            raw.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                .trim_matches('\'')
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

fn is_negator(token: &str) -> bool {
    NEGATORS.contains(&token)
}

/// Sum of token valences with negation flipping the next scored token,
/// squashed by `s / sqrt(s^2 + alpha)`.
pub fn lexicon_score(body: &str) -> f64 {
    let mut sum = 0.0;
    let mut pending_negation = false;
    for token in tokenize(body) {
        if is_negator(&token) {
            pending_negation = true;
            continue;
        }
        if let Some(&valence) = VALENCE_LEXICON.get(token.as_str()) {
            sum += if pending_negation { -valence } else { valence };
            pending_negation = false;
        }
    }
    if sum == 0.0 {
        return 0.0;
    }
    (sum / (sum * sum + LEXICON_ALPHA).sqrt()).clamp(-1.0, 1.0)
}

/// Fraction of tokens that carry any valence, mapped from [0,1] to [-1,1].
pub fn subjectivity_score(body: &str) -> f64 {
    let tokens = tokenize(body);
    if tokens.is_empty() {
        return -1.0;
    }
    let scored = tokens
        .iter()
        .filter(|t| VALENCE_LEXICON.contains_key(t.as_str()))
        .count();
    (2.0 * scored as f64 / tokens.len() as f64 - 1.0).clamp(-1.0, 1.0)
}

/// A runnable labeler. Built-ins are pure; external labelers go through
/// the plugin transport.
pub enum Labeler {
    Lexicon,
    Subjectivity,
    External { id: String, client: Arc<PluginClient> },
}

impl Labeler {
    pub fn from_spec(spec: &LabelerSpec) -> Result<Self> {
        match spec {
            LabelerSpec::Lexicon => Ok(Labeler::Lexicon),
            LabelerSpec::Subjectivity => Ok(Labeler::Subjectivity),
            LabelerSpec::External { id, command } => Ok(Labeler::External {
                id: id.clone(),
                client: Arc::new(PluginClient::spawn(command, None)?),
            }),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Labeler::Lexicon => "lexicon".into(),
            Labeler::Subjectivity => "subjectivity".into(),
            Labeler::External { id, .. } => format!("external:{id}"),
        }
    }

    pub fn score(&self, body: &str) -> Result<f64> {
        if body.trim().is_empty() {
            return Err(Error::EmptyBody("<inline>".into()));
        }
        match self {
            Labeler::Lexicon => Ok(lexicon_score(body)),
            Labeler::Subjectivity => Ok(subjectivity_score(body)),
            Labeler::External { .. } => self.score_external(body),
        }
    }

    fn score_external(&self, body: &str) -> Result<f64> {
        match self {
            Labeler::External { client, .. } => {
                let value = client.label(body)?;
                Ok(value.clamp(-1.0, 1.0))
            }
            _ => unreachable!(),
        }
    }
}

/// Score one comment body under one labeler spec.
pub fn label_comment(spec: &LabelerSpec, body: &str) -> Result<SentimentScore> {
    let labeler = Labeler::from_spec(spec)?;
    Ok(SentimentScore {
        value: labeler.score(body)?,
        labeler: labeler.name(),
    })
}

/// Class thresholds. `value >= pos` is positive, `value <= neg` is negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassThresholds {
    pub pos: f64,
    pub neg: f64,
}

impl Default for ClassThresholds {
    fn default() -> Self {
        ClassThresholds {
            pos: 0.05,
            neg: -0.05,
        }
    }
}

pub fn discretize(value: f64, thresholds: ClassThresholds) -> SentimentClass {
    debug_assert!(thresholds.neg < thresholds.pos);
    if value >= thresholds.pos {
        SentimentClass::Positive
    } else if value <= thresholds.neg {
        SentimentClass::Negative
    } else {
        SentimentClass::Neutral
    }
}

/// Fill `scores` on every comment, one entry per labeler. Scoring fans out
/// across comments; placement back into the corpus is deterministic.
pub fn label_corpus(corpus: &Corpus, specs: &[LabelerSpec]) -> Result<Corpus> {
    let mut labeled = corpus.clone();
    for spec in specs {
        let labeler = Labeler::from_spec(spec)?;
        let name = labeler.name();
        for timeline in labeled.timelines.values_mut() {
            let scores: Vec<Result<f64>> = par::map_collect(&timeline.interactions, |comment| {
                labeler.score(&comment.body).map_err(|e| match e {
                    Error::EmptyBody(_) => Error::EmptyBody(comment.id.0.clone()),
                    other => other,
                })
            });
            for (comment, score) in timeline.interactions.iter_mut().zip(scores) {
                comment.scores.insert(name.clone(), score?);
            }
        }
    }
    Ok(labeled)
}
