//! Deterministic synthetic corpus generator. Users get per-topic stances;
//! article titles are bags of topic-vocabulary words so lexical similarity
//! recovers topics; comment bodies carry stance-bearing lexicon words so
//! the built-in labeler agrees with the generated classes. Timelines
//! round-robin through topics, which keeps recent history topically mixed
//! and makes relevance retrieval genuinely informative.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    Article, ArticleId, Comment, CommentId, Corpus, SplitIndex, UserId, UserTimeline,
};
use crate::encoding::{cosine_raw, reference::reference_encode};
use crate::error::{Error, Result};
use crate::labeling::{discretize, lexicon_score, ClassThresholds, SentimentClass, VALENCE_LEXICON};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSpec {
    pub label: String,
    pub vocabulary: Vec<String>,
}

/// Comments per user, drawn uniformly from [min, max].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentsPerUser {
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub num_users: usize,
    pub num_articles: usize,
    pub topics: Vec<TopicSpec>,
    /// Probability that a comment's class equals the persona stance.
    pub consistency: f64,
    pub comments_per_user: CommentsPerUser,
    /// Probability that the round-robin topic choice is replaced by a
    /// uniformly random topic.
    pub topic_jitter: f64,
    pub seed: u64,
    /// Reference-encoder dimension used by the separability self-check.
    pub check_dimension: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            num_users: 50,
            num_articles: 200,
            topics: default_topics(),
            consistency: 0.9,
            comments_per_user: CommentsPerUser { min: 45, max: 70 },
            topic_jitter: 0.2,
            seed: 7,
            check_dimension: 256,
        }
    }
}

pub fn default_topics() -> Vec<TopicSpec> {
    let raw: [(&str, &[&str]); 4] = [
        (
            "politics",
            &[
                "senate", "congress", "election", "ballot", "governor", "legislation",
                "committee", "veto", "filibuster", "caucus", "lobbyist", "statute",
                "amendment", "judiciary", "mayor", "parliament",
            ],
        ),
        (
            "markets",
            &[
                "tariff", "inflation", "stocks", "earnings", "dividend", "futures", "bond",
                "currency", "deficit", "merger", "quarterly", "exports", "commodity",
                "shares", "banking", "investor",
            ],
        ),
        (
            "technology",
            &[
                "software", "startup", "silicon", "algorithm", "browser", "chipmaker",
                "encryption", "network", "robotics", "satellite", "server", "gadget",
                "platform", "quantum", "database", "wireless",
            ],
        ),
        (
            "climate",
            &[
                "emissions", "glacier", "drought", "wildfire", "rainfall", "carbon", "solar",
                "turbine", "ecosystem", "wetland", "monsoon", "permafrost", "biodiversity",
                "reef", "deforestation", "ozone",
            ],
        ),
    ];
    raw.iter()
        .map(|(label, words)| TopicSpec {
            label: label.to_string(),
            vocabulary: words.iter().map(|w| w.to_string()).collect(),
        })
        .collect()
}

/// Words that never hit the valence lexicon; neutral comment filler. The
/// pool is deliberately large so filler n-grams decorrelate across
/// comments while the stance words stay coherent.
const NEUTRAL_FILLER: &[&str] = &[
    "about", "report", "today", "tomorrow", "says", "state", "plan", "group", "week",
    "month", "meeting", "detail", "number", "page", "story", "item", "note", "list",
    "question", "answer", "section", "update", "reader", "source", "record", "point",
    "table", "window", "street", "office", "paper", "letter", "phone", "device",
    "account", "figure", "corner", "bridge", "garden", "market", "signal", "branch",
    "result", "moment", "period", "version", "series", "member", "editor", "column",
];

/// The exact persona tables used during generation. Never an input to any
/// model; the oracle uses it to bound attainable accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaTruth {
    /// user -> topic label -> stance.
    pub stances: BTreeMap<UserId, BTreeMap<String, SentimentClass>>,
    pub topics: Vec<TopicSpec>,
}

/// Classify a title by topic-vocabulary overlap; ties go to the first
/// topic in config order.
pub fn classify_title_topic<'a>(title: &str, topics: &'a [TopicSpec]) -> &'a str {
    let words: std::collections::BTreeSet<&str> = title.split_whitespace().collect();
    let mut best = 0;
    let mut best_overlap = 0usize;
    for (i, topic) in topics.iter().enumerate() {
        let overlap = topic
            .vocabulary
            .iter()
            .filter(|w| words.contains(w.as_str()))
            .count();
        if overlap > best_overlap {
            best_overlap = overlap;
            best = i;
        }
    }
    &topics[best].label
}

fn stance_word_pools() -> (Vec<&'static str>, Vec<&'static str>) {
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (&word, &valence) in VALENCE_LEXICON.iter() {
        if valence >= 2.0 {
            positive.push(word);
        } else if valence <= -2.0 {
            negative.push(word);
        }
    }
    (positive, negative)
}

/// Stance-bearing words per comment. A few valence words in a dozen
/// filler words make one comment an unambiguous label for the labeler but
/// only partial evidence for an n-gram encoder, so recovering a user's
/// stance reliably takes aggregation over a longer relevant history.
const STANCE_WORDS: usize = 3;

fn comment_body<R: Rng>(
    class: SentimentClass,
    stance_words: usize,
    topic: &TopicSpec,
    pools: &(Vec<&'static str>, Vec<&'static str>),
    rng: &mut R,
) -> String {
    let mut words: Vec<&str> = Vec::new();
    let filler_count = rng.gen_range(8..=10);
    for _ in 0..filler_count {
        words.push(NEUTRAL_FILLER[rng.gen_range(0..NEUTRAL_FILLER.len())]);
    }
    match class {
        SentimentClass::Positive => {
            for _ in 0..stance_words {
                words.push(pools.0[rng.gen_range(0..pools.0.len())]);
            }
        }
        SentimentClass::Negative => {
            for _ in 0..stance_words {
                words.push(pools.1[rng.gen_range(0..pools.1.len())]);
            }
        }
        SentimentClass::Neutral => {}
    }
    for _ in 0..2 {
        words.push(&topic.vocabulary[rng.gen_range(0..topic.vocabulary.len())]);
    }
    // Stance words sit at random positions, not a fixed suffix.
    let len = words.len();
    for i in (1..len).rev() {
        words.swap(i, rng.gen_range(0..=i));
    }
    words.join(" ")
}

fn validate(config: &GeneratorConfig) -> Result<()> {
    if config.topics.len() < 2 {
        return Err(Error::Generation("need at least 2 topics".into()));
    }
    if !(config.consistency > 0.5 && config.consistency <= 1.0) {
        return Err(Error::Generation(format!(
            "consistency must be in (0.5, 1], got {}",
            config.consistency
        )));
    }
    if config.num_users == 0 || config.num_articles < config.topics.len() {
        return Err(Error::Generation("too few users or articles".into()));
    }
    if config.comments_per_user.min < 3 || config.comments_per_user.min > config.comments_per_user.max {
        return Err(Error::Generation("bad comments_per_user range".into()));
    }
    Ok(())
}

/// Mean within-topic and cross-topic title cosine under the reference
/// encoder.
fn title_separation(
    articles: &[(usize, String)],
    dimension: usize,
) -> Result<(f64, f64)> {
    let encoded: Vec<(usize, Vec<f64>)> = articles
        .iter()
        .map(|(topic, title)| Ok((*topic, reference_encode(title, dimension)?)))
        .collect::<Result<_>>()?;
    let mut within = (0.0, 0usize);
    let mut cross = (0.0, 0usize);
    for i in 0..encoded.len() {
        for j in (i + 1)..encoded.len() {
            let sim = cosine_raw(&encoded[i].1, &encoded[j].1)?;
            if encoded[i].0 == encoded[j].0 {
                within.0 += sim;
                within.1 += 1;
            } else {
                cross.0 += sim;
                cross.1 += 1;
            }
        }
    }
    Ok((
        within.0 / within.1.max(1) as f64,
        cross.0 / cross.1.max(1) as f64,
    ))
}

/// Generate a corpus and its ground truth. Fails if the topic vocabularies
/// cannot be separated by the reference encoder or if the built-in labeler
/// would disagree with the generated classes on more than 5% of comments.
pub fn generate_corpus(config: &GeneratorConfig) -> Result<(Corpus, PersonaTruth)> {
    validate(config)?;
    let pools = stance_word_pools();
    let topic_count = config.topics.len();
    let base_time: i64 = 1_577_836_800; // 2020-01-01T00:00:00Z

    // Articles: topics round-robin, titles sampled from the topic
    // vocabulary without replacement.
    let mut article_rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut articles = BTreeMap::new();
    let mut articles_by_topic: Vec<Vec<ArticleId>> = vec![Vec::new(); topic_count];
    let mut tagged_titles = Vec::with_capacity(config.num_articles);
    for i in 0..config.num_articles {
        let topic_index = i % topic_count;
        let topic = &config.topics[topic_index];
        let word_count = article_rng.gen_range(5..=7).min(topic.vocabulary.len());
        let mut vocab: Vec<&String> = topic.vocabulary.iter().collect();
        vocab.shuffle(&mut article_rng);
        let title = vocab[..word_count]
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        let id = ArticleId(format!("a{i:04}"));
        articles.insert(
            id.clone(),
            Article {
                id: id.clone(),
                title: title.clone(),
                published_at: base_time - 86_400 + i as i64 * 60,
                outlet: "synthetic".into(),
            },
        );
        articles_by_topic[topic_index].push(id);
        tagged_titles.push((topic_index, title));
    }

    let (within, cross) = title_separation(&tagged_titles, config.check_dimension)?;
    if cross >= 0.5 {
        return Err(Error::Generation(format!(
            "topic vocabularies too small to separate topics: cross-topic cosine {cross:.3}"
        )));
    }
    if within - cross < 0.2 {
        return Err(Error::Generation(format!(
            "insufficient title separability: within {within:.3} vs cross {cross:.3}"
        )));
    }

    let mut stances = BTreeMap::new();
    let mut timelines = BTreeMap::new();
    let mut agreements = 0usize;
    let mut total = 0usize;

    for u in 0..config.num_users {
        // Independent derived stream per user.
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed.wrapping_add(1_000_003 * (u as u64 + 1)));
        let user_id = UserId(format!("u{u:04}"));

        let mut persona = BTreeMap::new();
        for topic in &config.topics {
            let stance = if rng.gen_bool(0.5) {
                SentimentClass::Positive
            } else {
                SentimentClass::Negative
            };
            persona.insert(topic.label.clone(), stance);
        }

        let n_comments =
            rng.gen_range(config.comments_per_user.min..=config.comments_per_user.max);
        let offset = rng.gen_range(0..topic_count);
        let mut interactions = Vec::with_capacity(n_comments);
        for j in 0..n_comments {
            let topic_index = if rng.gen_bool(config.topic_jitter) {
                rng.gen_range(0..topic_count)
            } else {
                (j + offset) % topic_count
            };
            let topic = &config.topics[topic_index];
            let article_id = articles_by_topic[topic_index]
                [rng.gen_range(0..articles_by_topic[topic_index].len())]
            .clone();

            let stance = persona[&topic.label];
            let class = if rng.gen_bool(config.consistency) {
                stance
            } else {
                // Uniformly one of the two other classes.
                let others: Vec<SentimentClass> = [
                    SentimentClass::Negative,
                    SentimentClass::Neutral,
                    SentimentClass::Positive,
                ]
                .into_iter()
                .filter(|c| *c != stance)
                .collect();
                others[rng.gen_range(0..others.len())]
            };
            let body = comment_body(class, STANCE_WORDS, topic, &pools, &mut rng);

            total += 1;
            if discretize(lexicon_score(&body), ClassThresholds::default()) == class {
                agreements += 1;
            }

            interactions.push(Comment {
                id: CommentId(format!("c{u:04}_{j:04}")),
                user_id: user_id.clone(),
                article_id,
                body,
                // Global interleave: strictly increasing per user.
                created_at: base_time + (j as i64 * config.num_users as i64 + u as i64) * 60,
                scores: BTreeMap::new(),
            });
        }
        timelines.insert(
            user_id.clone(),
            UserTimeline {
                user_id: user_id.clone(),
                interactions,
            },
        );
        stances.insert(user_id, persona);
    }

    let agreement = agreements as f64 / total.max(1) as f64;
    if agreement < 0.95 {
        return Err(Error::Generation(format!(
            "labeler agreement {agreement:.3} below 0.95"
        )));
    }

    Ok((
        Corpus {
            articles,
            timelines,
        },
        PersonaTruth {
            stances,
            topics: config.topics.clone(),
        },
    ))
}

/// Accuracy bounds on the test slice. `topic_aware` predicts the persona
/// stance of the target's topic (the attainable ceiling, = consistency by
/// construction). `topic_blind` predicts the user's volume-weighted
/// majority stance over the training portion, ties broken toward positive
/// (the floor a target-agnostic model converges to).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleBounds {
    pub topic_aware: f64,
    pub topic_blind: f64,
}

pub fn oracle_best_accuracy(
    truth: &PersonaTruth,
    corpus: &Corpus,
    splits: &SplitIndex,
) -> Result<OracleBounds> {
    let thresholds = ClassThresholds::default();
    let gold_of = |comment: &Comment| -> SentimentClass {
        let value = comment
            .scores
            .get("lexicon")
            .copied()
            .unwrap_or_else(|| lexicon_score(&comment.body));
        discretize(value, thresholds)
    };

    let mut aware_hits = 0usize;
    let mut blind_hits = 0usize;
    let mut total = 0usize;
    for (user_id, ranges) in &splits.by_user {
        let timeline = &corpus.timelines[user_id];
        let persona = truth
            .stances
            .get(user_id)
            .ok_or_else(|| Error::Generation(format!("no persona for {user_id}")))?;

        // Volume-weighted majority stance over the train portion.
        let mut votes: BTreeMap<SentimentClass, usize> = BTreeMap::new();
        for comment in &timeline.interactions[ranges.train.clone()] {
            let topic = classify_title_topic(corpus.title(&comment.article_id), &truth.topics);
            if let Some(&stance) = persona.get(topic) {
                *votes.entry(stance).or_insert(0) += 1;
            }
        }
        let majority = votes
            .iter()
            .max_by_key(|(class, count)| (**count, class.code()))
            .map(|(class, _)| *class)
            .unwrap_or(SentimentClass::Positive);

        for comment in &timeline.interactions[ranges.test.clone()] {
            let gold = gold_of(comment);
            let topic = classify_title_topic(corpus.title(&comment.article_id), &truth.topics);
            let aware = persona.get(topic).copied().unwrap_or(majority);
            total += 1;
            if aware == gold {
                aware_hits += 1;
            }
            if majority == gold {
                blind_hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::EmptyMetricInput);
    }
    Ok(OracleBounds {
        topic_aware: aware_hits as f64 / total as f64,
        topic_blind: blind_hits as f64 / total as f64,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthRecord {
    user_id: String,
    topic: String,
    stance: SentimentClass,
}

/// truth.jsonl: one (user_id, topic, stance) record per persona entry.
pub fn write_truth<W: Write>(truth: &PersonaTruth, writer: &mut W) -> Result<()> {
    for (user_id, persona) in &truth.stances {
        for (topic, stance) in persona {
            let record = TruthRecord {
                user_id: user_id.0.clone(),
                topic: topic.clone(),
                stance: *stance,
            };
            writeln!(writer, "{}", serde_json::to_string(&record)?)?;
        }
    }
    Ok(())
}

/// Read truth.jsonl back; topic vocabularies must be supplied by the
/// caller (they are generation configuration, not part of the file).
pub fn read_truth<R: BufRead>(reader: R, topics: Vec<TopicSpec>) -> Result<PersonaTruth> {
    let mut stances: BTreeMap<UserId, BTreeMap<String, SentimentClass>> = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TruthRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        stances
            .entry(UserId(record.user_id))
            .or_default()
            .insert(record.topic, record.stance);
    }
    Ok(PersonaTruth { stances, topics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::split_corpus;

    fn small_config() -> GeneratorConfig {
        GeneratorConfig {
            num_users: 8,
            num_articles: 40,
            comments_per_user: CommentsPerUser { min: 12, max: 20 },
            seed: 7,
            check_dimension: 128,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let (a, ta) = generate_corpus(&small_config()).unwrap();
        let (b, tb) = generate_corpus(&small_config()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
    }

    #[test]
    fn q_one_makes_topic_comments_unanimous() {
        let config = GeneratorConfig {
            consistency: 1.0,
            ..small_config()
        };
        let (corpus, truth) = generate_corpus(&config).unwrap();
        for (user_id, timeline) in &corpus.timelines {
            for comment in &timeline.interactions {
                let topic = classify_title_topic(corpus.title(&comment.article_id), &truth.topics);
                let stance = truth.stances[user_id][topic];
                let class =
                    discretize(lexicon_score(&comment.body), ClassThresholds::default());
                assert_eq!(class, stance);
            }
        }
    }

    #[test]
    fn within_topic_titles_more_similar_than_cross() {
        let (corpus, truth) = generate_corpus(&small_config()).unwrap();
        let tagged: Vec<(usize, String)> = corpus
            .articles
            .values()
            .map(|a| {
                let topic = classify_title_topic(&a.title, &truth.topics);
                let idx = truth.topics.iter().position(|t| t.label == topic).unwrap();
                (idx, a.title.clone())
            })
            .collect();
        let (within, cross) = title_separation(&tagged, 128).unwrap();
        assert!(
            within - cross >= 0.2,
            "within {within:.3} cross {cross:.3}"
        );
    }

    #[test]
    fn labeler_agreement_holds_by_construction() {
        // generate_corpus already asserts >= 0.95 internally; a failure
        // would surface as a Generation error here.
        assert!(generate_corpus(&small_config()).is_ok());
    }

    #[test]
    fn bad_configs_rejected() {
        let mut config = small_config();
        config.consistency = 0.4;
        assert!(matches!(
            generate_corpus(&config),
            Err(Error::Generation(_))
        ));

        let mut config = small_config();
        config.topics.truncate(1);
        assert!(matches!(
            generate_corpus(&config),
            Err(Error::Generation(_))
        ));
    }

    #[test]
    fn inseparable_vocabularies_rejected() {
        let shared: Vec<String> = ["alpha", "beta", "gamma", "delta", "epsilon"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let config = GeneratorConfig {
            topics: vec![
                TopicSpec {
                    label: "one".into(),
                    vocabulary: shared.clone(),
                },
                TopicSpec {
                    label: "two".into(),
                    vocabulary: shared,
                },
            ],
            ..small_config()
        };
        let err = generate_corpus(&config).unwrap_err();
        assert!(matches!(err, Error::Generation(_)));
    }

    #[test]
    fn truth_round_trip() {
        let (_, truth) = generate_corpus(&small_config()).unwrap();
        let mut buf = Vec::new();
        write_truth(&truth, &mut buf).unwrap();
        let back = read_truth(buf.as_slice(), truth.topics.clone()).unwrap();
        assert_eq!(truth, back);
    }

    #[test]
    fn oracle_two_topic_closed_form() {
        // Two topics with stances {pos, neg} at equal volume: the
        // topic-blind oracle hits 0.5*q + 0.5*(1-q)/2 in expectation.
        let q = 0.9;
        let config = GeneratorConfig {
            num_users: 40,
            num_articles: 40,
            topics: default_topics().into_iter().take(2).collect(),
            consistency: q,
            comments_per_user: CommentsPerUser { min: 40, max: 40 },
            topic_jitter: 0.0,
            seed: 11,
            check_dimension: 128,
        };
        let (corpus, mut truth) = generate_corpus(&config).unwrap();
        // Force the {pos, neg} persona shape the closed form assumes.
        for persona in truth.stances.values_mut() {
            persona.insert(config.topics[0].label.clone(), SentimentClass::Positive);
            persona.insert(config.topics[1].label.clone(), SentimentClass::Negative);
        }
        // Rebuild comments to match the forced personas.
        let (corpus, truth) = {
            let pools = stance_word_pools();
            let mut corpus = corpus;
            let mut rng = ChaCha20Rng::seed_from_u64(13);
            for (user_id, timeline) in corpus.timelines.iter_mut() {
                for comment in timeline.interactions.iter_mut() {
                    let topic_label = {
                        let title = &corpus.articles[&comment.article_id].title;
                        classify_title_topic(title, &truth.topics).to_string()
                    };
                    let stance = truth.stances[user_id][&topic_label];
                    let class = if rng.gen_bool(q) {
                        stance
                    } else {
                        let others: Vec<SentimentClass> = [
                            SentimentClass::Negative,
                            SentimentClass::Neutral,
                            SentimentClass::Positive,
                        ]
                        .into_iter()
                        .filter(|c| *c != stance)
                        .collect();
                        others[rng.gen_range(0..others.len())]
                    };
                    let topic = truth
                        .topics
                        .iter()
                        .find(|t| t.label == topic_label)
                        .unwrap();
                    comment.body = comment_body(class, 3, topic, &pools, &mut rng);
                }
            }
            (corpus, truth)
        };

        let splits = split_corpus(&corpus, 0.5, 0.1).unwrap();
        let bounds = oracle_best_accuracy(&truth, &corpus, &splits).unwrap();
        let expected_blind = 0.5 * q + 0.5 * (1.0 - q) / 2.0;
        // Monte Carlo over ~800 test targets: allow a few points of noise.
        assert!(
            (bounds.topic_blind - expected_blind).abs() < 0.06,
            "blind {} vs closed form {expected_blind}",
            bounds.topic_blind
        );
        assert!(
            (bounds.topic_aware - q).abs() < 0.06,
            "aware {} vs q {q}",
            bounds.topic_aware
        );
    }

    #[test]
    fn oracle_uniform_persona_degenerates() {
        let config = small_config();
        let (corpus, mut truth) = generate_corpus(&config).unwrap();
        // Give one user a uniform stance; for that user both oracles agree.
        let user = truth.stances.keys().next().unwrap().clone();
        for stance in truth.stances.get_mut(&user).unwrap().values_mut() {
            *stance = SentimentClass::Positive;
        }
        // Restrict the corpus to that user so the bounds compare cleanly.
        let mut corpus = corpus;
        corpus.timelines.retain(|k, _| *k == user);
        // Rebuild bodies so comments match the uniform persona.
        let pools = stance_word_pools();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let titles: BTreeMap<ArticleId, String> = corpus
            .articles
            .iter()
            .map(|(k, v)| (k.clone(), v.title.clone()))
            .collect();
        for timeline in corpus.timelines.values_mut() {
            for comment in timeline.interactions.iter_mut() {
                let topic_label = classify_title_topic(&titles[&comment.article_id], &truth.topics);
                let topic = truth.topics.iter().find(|t| t.label == topic_label).unwrap();
                let class = if rng.gen_bool(config.consistency) {
                    SentimentClass::Positive
                } else {
                    SentimentClass::Neutral
                };
                comment.body = comment_body(class, 3, topic, &pools, &mut rng);
            }
        }
        let splits = split_corpus(&corpus, 0.2, 0.1).unwrap();
        let bounds = oracle_best_accuracy(&truth, &corpus, &splits).unwrap();
        assert_eq!(bounds.topic_aware, bounds.topic_blind);
    }
}
