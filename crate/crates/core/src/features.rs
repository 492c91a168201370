//! Sentence encoders.
//!
//! Three sources of [`FeatureVector`]s are provided:
//!
//! - [`HashingEncoder`]: token n-grams hashed with 64-bit FNV-1a into a
//!   power-of-two number of buckets, L2-normalized;
//! - [`EmbeddingEncoder`]: vectors produced elsewhere and imported from a TSV
//!   file keyed by `(article_id, sentence_index)`;
//! - [`ConcatEncoder`]: the concatenation of any encoders, e.g. embeddings
//!   followed by one-hot POS/NER vectors in the same TSV layout.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::corpus_io::{tokenize, LabeledDataset, Sentence, StopwordSet};
use crate::error::{Error, Result};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Incremental 64-bit FNV-1a.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a64(u64);

impl Fnv1a64 {
    pub fn new() -> Self {
        Fnv1a64(FNV_OFFSET)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a64 {
    fn default() -> Self {
        Self::new()
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a64::new();
    h.write(bytes);
    h.finish()
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<f64>),
    /// Sorted by index, no duplicates, no explicit zeros.
    Sparse(Vec<(usize, f64)>),
}

/// A fixed-dimension sentence representation. Stored sparse unless at least
/// half of the coordinates are nonzero.
#[derive(Debug, Clone)]
pub struct FeatureVector {
    dim: usize,
    storage: Storage,
}

impl FeatureVector {
    pub fn zeros(dim: usize) -> Self {
        FeatureVector {
            dim,
            storage: Storage::Sparse(Vec::new()),
        }
    }

    pub fn dense(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite feature value {v}")));
        }
        let dim = values.len();
        let nnz = values.iter().filter(|v| **v != 0.0).count();
        if nnz * 2 >= dim && dim > 0 {
            Ok(FeatureVector {
                dim,
                storage: Storage::Dense(values),
            })
        } else {
            let entries = values.into_iter().enumerate().filter(|(_, v)| *v != 0.0).collect();
            Ok(FeatureVector {
                dim,
                storage: Storage::Sparse(entries),
            })
        }
    }

    /// Builds a vector from `(index, value)` entries; duplicate indices are summed.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, v) in entries {
            if i >= dim {
                return Err(Error::invalid(format!(
                    "feature index {i} out of range for dimension {dim}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::invalid(format!("non-finite feature value {v}")));
            }
            *acc.entry(i).or_insert(0.0) += v;
        }
        let entries: Vec<(usize, f64)> = acc.into_iter().filter(|(_, v)| *v != 0.0).collect();
        Ok(Self::from_sorted(dim, entries))
    }

    fn from_sorted(dim: usize, entries: Vec<(usize, f64)>) -> Self {
        if dim > 0 && entries.len() * 2 >= dim {
            let mut values = vec![0.0; dim];
            for (i, v) in entries {
                values[i] = v;
            }
            FeatureVector {
                dim,
                storage: Storage::Dense(values),
            }
        } else {
            FeatureVector {
                dim,
                storage: Storage::Sparse(entries),
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn get(&self, index: usize) -> f64 {
        match &self.storage {
            Storage::Dense(v) => v.get(index).copied().unwrap_or(0.0),
            Storage::Sparse(e) => e
                .binary_search_by_key(&index, |(i, _)| *i)
                .map(|k| e[k].1)
                .unwrap_or(0.0),
        }
    }

    /// Calls `f(index, value)` for every nonzero coordinate in index order.
    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        match &self.storage {
            Storage::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .for_each(|(i, &x)| f(i, x)),
            Storage::Sparse(e) => e.iter().for_each(|&(i, x)| f(i, x)),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.for_each_nonzero(|i, v| out[i] = v);
        out
    }

    pub fn dot(&self, row: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.for_each_nonzero(|i, v| acc += v * row[i]);
        acc
    }

    /// `out += scale * self`.
    pub fn add_scaled_to(&self, scale: f64, out: &mut [f64]) {
        self.for_each_nonzero(|i, v| out[i] += scale * v);
    }

    pub fn l2_norm(&self) -> f64 {
        let mut sum = 0.0;
        self.for_each_nonzero(|_, v| sum += v * v);
        sum.sqrt()
    }

    /// Unit-length copy; the zero vector stays zero.
    pub fn normalized(&self) -> Self {
        let norm = self.l2_norm();
        if norm == 0.0 {
            return self.clone();
        }
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Dense(v) => v.iter_mut().for_each(|x| *x /= norm),
            Storage::Sparse(e) => e.iter_mut().for_each(|(_, x)| *x /= norm),
        }
        out
    }
}

impl PartialEq for FeatureVector {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.to_dense() == other.to_dense()
    }
}

/// Bucket index of every n-gram occurrence (`1 <= n <= n_max`, tokens joined
/// by one space), unigrams first. Each entry is one accumulation event.
pub fn hashed_ngram_indices(tokens: &[String], dim: usize, n_max: usize) -> Result<Vec<usize>> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::invalid(format!(
            "hash dimension {dim} must be a power of two >= 2"
        )));
    }
    if !(1..=3).contains(&n_max) {
        return Err(Error::invalid(format!("n-gram order {n_max} must be 1, 2 or 3")));
    }
    let mask = (dim - 1) as u64;
    let mut out = Vec::new();
    for n in 1..=n_max {
        for gram in tokens.windows(n) {
            out.push((fnv1a64(gram.join(" ").as_bytes()) & mask) as usize);
        }
    }
    Ok(out)
}

/// L2-normalized hashed n-gram counts.
pub fn hash_ngrams(tokens: &[String], dim: usize, n_max: usize) -> Result<FeatureVector> {
    let indices = hashed_ngram_indices(tokens, dim, n_max)?;
    Ok(FeatureVector::from_entries(dim, indices.into_iter().map(|i| (i, 1.0)))?.normalized())
}

/// `a` followed by `b`, with `b`'s indices shifted by `a.dim()`. Values are
/// copied unchanged.
pub fn concat(a: &FeatureVector, b: &FeatureVector) -> FeatureVector {
    let mut entries = Vec::new();
    a.for_each_nonzero(|i, v| entries.push((i, v)));
    b.for_each_nonzero(|i, v| entries.push((i + a.dim, v)));
    FeatureVector::from_sorted(a.dim + b.dim, entries)
}

/// Dense vectors keyed by `(article_id, sentence_index)`, all of one dimension.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingStore {
    dim: Option<usize>,
    vectors: HashMap<(String, usize), Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// `None` until the first vector is inserted.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, article_id: impl Into<String>, index: usize, vector: Vec<f64>) -> Result<()> {
        let article_id = article_id.into();
        if let Some(dim) = self.dim {
            if vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: vector.len(),
                });
            }
        }
        if vector.is_empty() {
            return Err(Error::invalid("embedding vectors must not be empty"));
        }
        if let Some(v) = vector.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite embedding value {v}")));
        }
        let key = (article_id, index);
        if self.vectors.contains_key(&key) {
            return Err(Error::invalid(format!("duplicate embedding for {}:{}", key.0, key.1)));
        }
        self.dim = Some(vector.len());
        self.vectors.insert(key, vector);
        Ok(())
    }

    pub fn get(&self, article_id: &str, index: usize) -> Option<&[f64]> {
        self.vectors.get(&(article_id.to_string(), index)).map(Vec::as_slice)
    }
}

/// Reads `article_id TAB sentence_index TAB v1,v2,...,vD` rows.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut store = EmbeddingStore::new();
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let index: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad sentence index {:?}", fields[1])))?;
        let values = fields[2]
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(path, lineno, format!("bad value {v:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        store.insert(fields[0].trim(), index, values).map_err(|e| match e {
            Error::DimensionMismatch { expected, actual } => Error::parse(
                path,
                lineno,
                format!("row has {actual} values but earlier rows have {expected}"),
            ),
            other => Error::parse(path, lineno, other.to_string()),
        })?;
    }
    Ok(store)
}

/// Maps a sentence to a feature vector of fixed dimension.
pub trait Encoder: Send + Sync {
    fn dim(&self) -> usize;

    fn encode(&self, sentence: &Sentence) -> Result<FeatureVector>;

    fn encode_dataset(&self, ds: &LabeledDataset) -> Result<Vec<FeatureVector>> {
        ds.sentences.iter().map(|s| self.encode(s)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct HashingEncoder {
    pub dim: usize,
    pub n_max: usize,
    pub stopwords: StopwordSet,
}

impl HashingEncoder {
    pub fn new(dim: usize, n_max: usize, stopwords: StopwordSet) -> Result<Self> {
        // validate once up front
        hashed_ngram_indices(&[], dim, n_max)?;
        Ok(HashingEncoder { dim, n_max, stopwords })
    }
}

impl Encoder for HashingEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, sentence: &Sentence) -> Result<FeatureVector> {
        hash_ngrams(&tokenize(&sentence.text, &self.stopwords), self.dim, self.n_max)
    }
}

/// Looks sentences up in an [`EmbeddingStore`]. Copies made by augmentation
/// share the key, and therefore the vector, of their source sentence.
#[derive(Debug, Clone)]
pub struct EmbeddingEncoder {
    store: EmbeddingStore,
    dim: usize,
}

impl EmbeddingEncoder {
    pub fn new(store: EmbeddingStore) -> Result<Self> {
        let dim = store.dim().ok_or_else(|| Error::invalid("embedding store is empty"))?;
        Ok(EmbeddingEncoder { store, dim })
    }
}

impl Encoder for EmbeddingEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, sentence: &Sentence) -> Result<FeatureVector> {
        let v = self.store.get(&sentence.article_id, sentence.index).ok_or_else(|| {
            Error::invalid(format!(
                "no embedding for sentence {}:{}",
                sentence.article_id, sentence.index
            ))
        })?;
        FeatureVector::dense(v.to_vec())
    }
}

pub struct ConcatEncoder {
    parts: Vec<Box<dyn Encoder>>,
}

impl ConcatEncoder {
    pub fn new(parts: Vec<Box<dyn Encoder>>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("concatenation needs at least one encoder"));
        }
        Ok(ConcatEncoder { parts })
    }
}

impl Encoder for ConcatEncoder {
    fn dim(&self) -> usize {
        self.parts.iter().map(|p| p.dim()).sum()
    }

    fn encode(&self, sentence: &Sentence) -> Result<FeatureVector> {
        let mut acc = self.parts[0].encode(sentence)?;
        for p in &self.parts[1..] {
            acc = concat(&acc, &p.encode(sentence)?);
        }
        Ok(acc)
    }
}
