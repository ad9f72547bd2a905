//! Deterministic reference encoder: signed hashed character 3–5-gram term
//! frequencies, L2-normalized. Language-agnostic and cheap, it gives a
//! meaningful lexical-overlap similarity so retrieval and the models
//! behave sensibly without any pretrained weights.

use super::{EncodeMode, EmbeddingVector, Encoder};
use crate::error::{Error, Result};

/// Separator joining the two spans in pair mode.
pub const PAIR_SEPARATOR: char = '\u{1f}';

// Sentinels wrapping the text so even one-character inputs yield a 3-gram.
const TEXT_START: char = '\u{2}';
const TEXT_END: char = '\u{3}';

const MIN_GRAM: usize = 3;
const MAX_GRAM: usize = 5;

#[derive(Debug, Clone)]
pub struct ReferenceEncoder {
    dimension: usize,
}

impl ReferenceEncoder {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension < 8 {
            return Err(Error::Config(format!(
                "reference encoder dimension must be at least 8, got {dimension}"
            )));
        }
        Ok(ReferenceEncoder { dimension })
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Hashed n-gram term-frequency vector over the wrapped, lowercased text.
/// Bucket comes from the low hash bits, the sign from bit 63.
pub fn reference_encode(text: &str, dimension: usize) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(Error::EmptyText);
    }
    let chars: Vec<char> = std::iter::once(TEXT_START)
        .chain(text.to_lowercase().chars())
        .chain(std::iter::once(TEXT_END))
        .collect();

    let mut values = vec![0.0f64; dimension];
    let mut gram = String::with_capacity(MAX_GRAM * 4);
    for n in MIN_GRAM..=MAX_GRAM {
        if chars.len() < n {
            continue;
        }
        for window in chars.windows(n) {
            gram.clear();
            gram.extend(window.iter());
            let hash = fnv1a(gram.as_bytes());
            let bucket = (hash % dimension as u64) as usize;
            let sign = if hash >> 63 == 0 { 1.0 } else { -1.0 };
            values[bucket] += sign;
        }
    }

    let norm: f64 = values.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in &mut values {
            *v /= norm;
        }
    }
    Ok(values)
}

impl Encoder for ReferenceEncoder {
    fn name(&self) -> &str {
        "reference"
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn encode_single(&self, text: &str) -> Result<EmbeddingVector> {
        Ok(EmbeddingVector {
            values: reference_encode(text, self.dimension)?,
            source: "reference".into(),
            mode: EncodeMode::Single,
        })
    }

    /// Pair mode is single mode over `a ⊕ SEP ⊕ b`; n-grams crossing the
    /// separator make the result asymmetric in (a, b).
    fn encode_pair(&self, text_a: &str, text_b: &str) -> Result<EmbeddingVector> {
        if text_a.trim().is_empty() || text_b.trim().is_empty() {
            return Err(Error::EmptyText);
        }
        let joined = format!("{text_a}{PAIR_SEPARATOR}{text_b}");
        Ok(EmbeddingVector {
            values: reference_encode(&joined, self.dimension)?,
            source: "reference".into(),
            mode: EncodeMode::Pair,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::cosine_raw;
    use rand::{Rng, SeedableRng};

    #[test]
    fn deterministic() {
        let enc = ReferenceEncoder::new(64).unwrap();
        let a = enc.encode_single("congress debates the tax bill").unwrap();
        let b = enc.encode_single("congress debates the tax bill").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unit_norm() {
        let enc = ReferenceEncoder::new(768).unwrap();
        for text in ["a", "hi", "a longer headline about trade policy"] {
            let v = enc.encode_single(text).unwrap();
            let norm: f64 = v.values.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9, "norm {norm} for {text:?}");
        }
    }

    #[test]
    fn pair_equals_single_over_joined_text() {
        let enc = ReferenceEncoder::new(128).unwrap();
        let pair = enc.encode_pair("first span", "second span").unwrap();
        let joined = format!("first span{PAIR_SEPARATOR}second span");
        let single = enc.encode_single(&joined).unwrap();
        assert_eq!(pair.values, single.values);
    }

    #[test]
    fn empty_inputs_rejected() {
        let enc = ReferenceEncoder::new(64).unwrap();
        assert!(matches!(enc.encode_single("  "), Err(Error::EmptyText)));
        assert!(matches!(enc.encode_pair("a", ""), Err(Error::EmptyText)));
    }

    #[test]
    fn small_dimension_rejected() {
        assert!(ReferenceEncoder::new(4).is_err());
    }

    #[test]
    fn no_collisions_on_a_thousand_distinct_titles() {
        let enc = ReferenceEncoder::new(768).unwrap();
        let mut seen: std::collections::HashSet<Vec<u64>> = Default::default();
        for i in 0..1000 {
            let text = format!("headline number {i} about topic {}", i % 37);
            let v = enc.encode_single(&text).unwrap();
            let bits: Vec<u64> = v.values.iter().map(|x| x.to_bits()).collect();
            assert!(seen.insert(bits), "collision at {i}");
        }
    }

    #[test]
    fn pair_order_matters() {
        let enc = ReferenceEncoder::new(256).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        let mut differing = 0;
        for _ in 0..100 {
            let a = format!("alpha {} beta", rng.gen_range(0..1000));
            let b = format!("gamma {} delta", rng.gen_range(0..1000));
            let ab = enc.encode_pair(&a, &b).unwrap();
            let ba = enc.encode_pair(&b, &a).unwrap();
            if ab.values != ba.values {
                differing += 1;
            }
        }
        assert_eq!(differing, 100);
    }

    #[test]
    fn lexical_overlap_orders_similarity() {
        let enc = ReferenceEncoder::new(768).unwrap();
        let target = enc.encode_single("congress hate debate").unwrap();
        let related = enc.encode_single("congress condemns hate").unwrap();
        let unrelated = enc.encode_single("tariff deficit trade").unwrap();
        let close = cosine_raw(&target.values, &related.values).unwrap();
        let far = cosine_raw(&target.values, &unrelated.values).unwrap();
        assert!(
            close > far,
            "expected shared n-grams to dominate: {close} vs {far}"
        );
    }
}
