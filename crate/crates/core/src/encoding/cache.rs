//! Content-addressed embedding cache with optional file persistence.
//! Keys digest the encode mode and input texts; hits are bit-identical to
//! fresh encodes for frozen encoders because stored vectors round-trip
//! exactly.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use sha2::{Digest, Sha256};

use super::{EncodeMode, EmbeddingVector, Encoder};
use crate::error::Result;
use crate::par;

type Key = [u8; 32];

fn digest(mode: EncodeMode, text_a: &str, text_b: Option<&str>) -> Key {
    let mut hasher = Sha256::new();
    hasher.update([match mode {
        EncodeMode::Single => 1u8,
        EncodeMode::Pair => 2u8,
    }]);
    hasher.update((text_a.len() as u64).to_le_bytes());
    hasher.update(text_a.as_bytes());
    if let Some(b) = text_b {
        hasher.update(b.as_bytes());
    }
    hasher.finalize().into()
}

fn hex_key(key: &Key) -> String {
    let mut s = String::with_capacity(64);
    for b in key {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

fn parse_hex_key(s: &str) -> Option<Key> {
    if s.len() != 64 {
        return None;
    }
    let mut key = [0u8; 32];
    for (i, chunk) in s.as_bytes().chunks(2).enumerate() {
        let hi = (chunk[0] as char).to_digit(16)?;
        let lo = (chunk[1] as char).to_digit(16)?;
        key[i] = (hi * 16 + lo) as u8;
    }
    Some(key)
}

#[derive(Default)]
pub struct EmbeddingCache {
    entries: RwLock<HashMap<Key, Arc<Vec<f64>>>>,
    path: Option<PathBuf>,
}

impl EmbeddingCache {
    pub fn in_memory() -> Self {
        EmbeddingCache::default()
    }

    /// Open a cache backed by `path`, loading existing entries if the file
    /// is present. The file holds one JSON object: hex digest → vector.
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let raw = std::fs::read_to_string(path)?;
            if !raw.trim().is_empty() {
                let parsed: HashMap<String, Vec<f64>> = serde_json::from_str(&raw)?;
                for (k, v) in parsed {
                    if let Some(key) = parse_hex_key(&k) {
                        entries.insert(key, Arc::new(v));
                    }
                }
            }
        }
        Ok(EmbeddingCache {
            entries: RwLock::new(entries),
            path: Some(path.to_path_buf()),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &Key) -> Option<Arc<Vec<f64>>> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    fn insert(&self, key: Key, values: Vec<f64>) -> Arc<Vec<f64>> {
        let mut guard = self.entries.write().expect("cache lock");
        guard.entry(key).or_insert_with(|| Arc::new(values)).clone()
    }

    /// Persist all entries to the backing file, if one was configured.
    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let guard = self.entries.read().expect("cache lock");
        let mut as_map: std::collections::BTreeMap<String, &Vec<f64>> = Default::default();
        for (k, v) in guard.iter() {
            as_map.insert(hex_key(k), v.as_ref());
        }
        std::fs::write(path, serde_json::to_string(&as_map)?)?;
        Ok(())
    }
}

/// An encoder wrapped with a shared cache. Only frozen encoders should be
/// cached; trainable plugin encoders are re-queried every epoch instead.
#[derive(Clone)]
pub struct CachedEncoder {
    inner: Arc<dyn Encoder>,
    cache: Arc<EmbeddingCache>,
    trainable: bool,
}

impl CachedEncoder {
    pub fn new(inner: Arc<dyn Encoder>, cache: Arc<EmbeddingCache>) -> Self {
        CachedEncoder {
            inner,
            cache,
            trainable: false,
        }
    }

    pub fn uncached(inner: Arc<dyn Encoder>) -> Self {
        CachedEncoder {
            inner,
            cache: Arc::new(EmbeddingCache::in_memory()),
            trainable: false,
        }
    }

    /// A trainable encoder: nothing is ever cached and training rebuilds
    /// its examples every epoch.
    pub fn trainable(inner: Arc<dyn Encoder>) -> Self {
        CachedEncoder {
            inner,
            cache: Arc::new(EmbeddingCache::in_memory()),
            trainable: true,
        }
    }

    pub fn is_trainable(&self) -> bool {
        self.trainable
    }

    pub fn cache(&self) -> &Arc<EmbeddingCache> {
        &self.cache
    }

    /// Encode many single texts, computing misses in parallel and inserting
    /// them before returning. Useful ahead of retrieval-heavy loops.
    pub fn warm_singles<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Result<()> {
        if self.trainable {
            return Ok(());
        }
        let misses: Vec<&S> = texts
            .iter()
            .filter(|t| self.cache.get(&digest(EncodeMode::Single, t.as_ref(), None)).is_none())
            .collect();
        let encoded: Vec<Result<EmbeddingVector>> =
            par::map_collect(&misses, |t| self.inner.encode_single(t.as_ref()));
        for (text, result) in misses.iter().zip(encoded) {
            let v = result?;
            self.cache
                .insert(digest(EncodeMode::Single, text.as_ref(), None), v.values);
        }
        Ok(())
    }

    pub fn warm_pairs(&self, pairs: &[(String, String)]) -> Result<()> {
        let misses: Vec<&(String, String)> = pairs
            .iter()
            .filter(|(a, b)| self.cache.get(&digest(EncodeMode::Pair, a, Some(b))).is_none())
            .collect();
        let encoded: Vec<Result<EmbeddingVector>> =
            par::map_collect(&misses, |(a, b)| self.inner.encode_pair(a, b));
        for ((a, b), result) in misses.iter().zip(encoded) {
            let v = result?;
            self.cache.insert(digest(EncodeMode::Pair, a, Some(b)), v.values);
        }
        Ok(())
    }
}

impl Encoder for CachedEncoder {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn encode_single(&self, text: &str) -> Result<EmbeddingVector> {
        let key = digest(EncodeMode::Single, text, None);
        if let Some(hit) = self.cache.get(&key) {
            return Ok(EmbeddingVector {
                values: hit.as_ref().clone(),
                source: self.inner.name().into(),
                mode: EncodeMode::Single,
            });
        }
        let fresh = self.inner.encode_single(text)?;
        let stored = self.cache.insert(key, fresh.values);
        Ok(EmbeddingVector {
            values: stored.as_ref().clone(),
            source: fresh.source,
            mode: EncodeMode::Single,
        })
    }

    fn encode_pair(&self, text_a: &str, text_b: &str) -> Result<EmbeddingVector> {
        let key = digest(EncodeMode::Pair, text_a, Some(text_b));
        if let Some(hit) = self.cache.get(&key) {
            return Ok(EmbeddingVector {
                values: hit.as_ref().clone(),
                source: self.inner.name().into(),
                mode: EncodeMode::Pair,
            });
        }
        let fresh = self.inner.encode_pair(text_a, text_b)?;
        let stored = self.cache.insert(key, fresh.values);
        Ok(EmbeddingVector {
            values: stored.as_ref().clone(),
            source: fresh.source,
            mode: EncodeMode::Pair,
        })
    }
}
