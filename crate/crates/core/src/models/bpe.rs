//! Byte-pair subword vocabulary learned from the training corpus.
//!
//! Words are lowercased whitespace tokens with an end-of-word marker
//! symbol. Training repeatedly merges the most frequent adjacent symbol
//! pair (ties broken lexicographically for determinism) until the
//! vocabulary reaches the requested size. Unknown symbols at encode time
//! fall back to a reserved OOV id.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const END_OF_WORD: &str = "</w>";
pub const OOV_TOKEN: &str = "<oov>";
pub const OOV_ID: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpeVocab {
    /// Token string per id; index 0 is the OOV token.
    pub tokens: Vec<String>,
    /// Learned merges in order.
    pub merges: Vec<(String, String)>,
    #[serde(skip)]
    ids: BTreeMap<String, usize>,
}

impl BpeVocab {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn rebuild_index(&mut self) {
        self.ids = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    /// Restore the id index after deserialization.
    pub fn reindex(mut self) -> Self {
        self.rebuild_index();
        self
    }

    pub fn id_of(&self, token: &str) -> usize {
        self.ids.get(token).copied().unwrap_or(OOV_ID)
    }
}

fn split_words(text: &str) -> Vec<Vec<String>> {
    text.split_whitespace()
        .map(|w| {
            let mut symbols: Vec<String> = w.to_lowercase().chars().map(String::from).collect();
            symbols.push(END_OF_WORD.to_string());
            symbols
        })
        .collect()
}

/// Learn merges from an iterator of texts. `vocab_size` bounds the total
/// token count (OOV + characters + merged symbols).
pub fn train_bpe<'a, I: IntoIterator<Item = &'a str>>(texts: I, vocab_size: usize) -> BpeVocab {
    // Word frequency table keeps training linear in distinct words.
    let mut word_freq: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    for text in texts {
        for word in split_words(text) {
            *word_freq.entry(word).or_insert(0) += 1;
        }
    }

    let mut token_set: std::collections::BTreeSet<String> = Default::default();
    for word in word_freq.keys() {
        for symbol in word {
            token_set.insert(symbol.clone());
        }
    }

    let mut merges: Vec<(String, String)> = Vec::new();
    while token_set.len() + 1 < vocab_size {
        let mut pair_freq: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (word, freq) in &word_freq {
            for pair in word.windows(2) {
                *pair_freq
                    .entry((pair[0].clone(), pair[1].clone()))
                    .or_insert(0) += freq;
            }
        }
        // Most frequent pair; BTreeMap iteration makes the tie lexicographic.
        let Some((best_pair, best_freq)) = pair_freq
            .into_iter()
            .fold(None::<((String, String), u64)>, |acc, (pair, freq)| match acc {
                Some((_, best)) if best >= freq => acc,
                _ => Some((pair, freq)),
            })
        else {
            break;
        };
        if best_freq < 2 {
            break;
        }

        let merged = format!("{}{}", best_pair.0, best_pair.1);
        token_set.insert(merged.clone());
        merges.push(best_pair.clone());

        let mut next: BTreeMap<Vec<String>, u64> = BTreeMap::new();
        for (word, freq) in word_freq {
            let rewritten = apply_merge(&word, &best_pair, &merged);
            *next.entry(rewritten).or_insert(0) += freq;
        }
        word_freq = next;
    }

    let mut tokens = vec![OOV_TOKEN.to_string()];
    tokens.extend(token_set);
    let mut vocab = BpeVocab {
        tokens,
        merges,
        ids: BTreeMap::new(),
    };
    vocab.rebuild_index();
    vocab
}

fn apply_merge(word: &[String], pair: &(String, String), merged: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(word.len());
    let mut i = 0;
    while i < word.len() {
        if i + 1 < word.len() && word[i] == pair.0 && word[i + 1] == pair.1 {
            out.push(merged.to_string());
            i += 2;
        } else {
            out.push(word[i].clone());
            i += 1;
        }
    }
    out
}

impl BpeVocab {
    /// Tokenize a text into ids, applying the learned merges in order.
    pub fn tokenize(&self, text: &str) -> Vec<usize> {
        let mut out = Vec::new();
        for word in split_words(text) {
            let mut symbols = word;
            for pair in &self.merges {
                let merged = format!("{}{}", pair.0, pair.1);
                if symbols.len() < 2 {
                    break;
                }
                symbols = apply_merge(&symbols, pair, &merged);
            }
            out.extend(symbols.iter().map(|s| self.id_of(s)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_learns_frequent_pairs() {
        let texts = ["low lower lowest", "low low lower", "slow slower"];
        let vocab = train_bpe(texts.iter().copied(), 40);
        assert!(!vocab.merges.is_empty());
        // "lo" or "ow" should have merged early; the tokenizer compresses "low".
        let ids = vocab.tokenize("low");
        assert!(ids.len() < 4, "expected merged symbols, got {ids:?}");
        assert!(ids.iter().all(|&id| id != OOV_ID));
    }

    #[test]
    fn oov_symbols_fall_back() {
        let vocab = train_bpe(["abc abc"].iter().copied(), 20);
        let ids = vocab.tokenize("xyz");
        assert!(ids.contains(&OOV_ID));
    }

    #[test]
    fn deterministic_training() {
        let texts = ["the quick brown fox", "the slow brown dog", "quick quick"];
        let a = train_bpe(texts.iter().copied(), 50);
        let b = train_bpe(texts.iter().copied(), 50);
        assert_eq!(a, b);
    }

    #[test]
    fn serde_round_trip_preserves_ids() {
        let vocab = train_bpe(["some words to merge merge merge"].iter().copied(), 30);
        let json = serde_json::to_string(&vocab).unwrap();
        let back: BpeVocab = serde_json::from_str(&json).unwrap();
        let back = back.reindex();
        assert_eq!(vocab.tokenize("merge words"), back.tokenize("merge words"));
    }
}
