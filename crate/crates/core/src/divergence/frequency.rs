use std::collections::BTreeMap;

use rand::Rng as _;

use crate::corpus_io::{tokenize, LabeledDataset, StopwordSet};
use crate::error::{Error, Result};
use crate::seed;

/// Word counts of a corpus. Iteration order is lexicographic, which keeps
/// seeded sampling reproducible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: BTreeMap<String, u64>,
    total_tokens: u64,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = Self::new();
        for t in tokens {
            table.add(t.into(), 1);
        }
        table
    }

    pub fn add(&mut self, word: String, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(word).or_insert(0) += count;
        self.total_tokens += count;
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn vocabulary_size(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total_tokens == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// Occurrences of `word` per million tokens.
    pub fn per_million(&self, word: &str) -> f64 {
        if self.total_tokens == 0 {
            return 0.0;
        }
        self.count(word) as f64 / self.total_tokens as f64 * 1e6
    }
}

/// Counts over the tokens of every sentence in `ds`.
pub fn word_multiset(ds: &LabeledDataset, stopwords: &StopwordSet) -> FrequencyTable {
    FrequencyTable::from_tokens(ds.sentences.iter().flat_map(|s| tokenize(&s.text, stopwords)))
}

/// Draws `n` tokens with replacement from the pooled multiset `a ⊎ b`.
pub fn sample_pooled_words<'a>(
    a: &'a FrequencyTable,
    b: &'a FrequencyTable,
    n: usize,
    seed: u64,
) -> Result<Vec<&'a str>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("cannot sample from an empty frequency table"));
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }

    // Merge the two sorted vocabularies into one cumulative table.
    let mut words: Vec<&str> = Vec::with_capacity(a.vocabulary_size() + b.vocabulary_size());
    let mut cumulative: Vec<u64> = Vec::with_capacity(words.capacity());
    let mut running = 0u64;
    let mut ia = a.counts.iter().peekable();
    let mut ib = b.counts.iter().peekable();
    loop {
        let (word, count) = match (ia.peek(), ib.peek()) {
            (None, None) => break,
            (Some((wa, &ca)), None) => {
                let w = wa.as_str();
                ia.next();
                (w, ca)
            }
            (None, Some((wb, &cb))) => {
                let w = wb.as_str();
                ib.next();
                (w, cb)
            }
            (Some((wa, &ca)), Some((wb, &cb))) => match wa.cmp(wb) {
                std::cmp::Ordering::Less => {
                    let w = wa.as_str();
                    ia.next();
                    (w, ca)
                }
                std::cmp::Ordering::Greater => {
                    let w = wb.as_str();
                    ib.next();
                    (w, cb)
                }
                std::cmp::Ordering::Equal => {
                    let w = wa.as_str();
                    ia.next();
                    ib.next();
                    (w, ca + cb)
                }
            },
        };
        running += count;
        words.push(word);
        cumulative.push(running);
    }

    let mut rng = seed::rng(seed);
    Ok((0..n)
        .map(|_| {
            let r = rng.gen_range(0..running);
            words[cumulative.partition_point(|&c| c <= r)]
        })
        .collect())
}

/// `n` pooled token draws, each mapped to its per-million frequency in `a`
/// and in `b`.
pub fn sample_paired_frequencies(
    a: &FrequencyTable,
    b: &FrequencyTable,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    Ok(sample_pooled_words(a, b, n, seed)?
        .into_iter()
        .map(|w| (a.per_million(w), b.per_million(w)))
        .collect())
}
