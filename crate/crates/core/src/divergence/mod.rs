//! Corpus similarity.
//!
//! Two corpora are compared by drawing words from their pooled token
//! multiset, looking up each word's per-million frequency in both corpora and
//! running a Wilcoxon signed-rank test on the paired frequencies. The cycle is
//! repeated with independent seeds and summarised as a min/max p-value plus
//! the share of runs that do not reject similarity at `alpha`.
//!
//! Pairing can be per sampled token or per distinct sampled word
//! ([`PairingUnit`]). Token pairing repeats frequent words many times, and
//! the signed-rank test then treats correlated repeats as independent
//! evidence; on Zipf-distributed text this rejects two random halves of the
//! same corpus almost always. Type pairing is the default for that reason.

mod frequency;
mod wilcoxon;

use std::collections::HashSet;
use std::str::FromStr;

use crate::corpus_io::{LabeledDataset, StopwordSet};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

pub use frequency::{sample_paired_frequencies, sample_pooled_words, word_multiset, FrequencyTable};
pub use wilcoxon::{
    standard_normal_cdf, two_sided_normal_p, wilcoxon_from_differences, wilcoxon_signed_rank, PValueMethod,
    WilcoxonMode, WilcoxonResult, EXACT_AUTO_MAX_N,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairingUnit {
    /// One pair per sampled token.
    Token,
    /// One pair per distinct word among the sampled tokens.
    #[default]
    Type,
}

impl FromStr for PairingUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "token" => Ok(PairingUnit::Token),
            "type" => Ok(PairingUnit::Type),
            other => Err(format!("unknown pairing unit {other:?} (expected token|type)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityConfig {
    pub n_samples: usize,
    pub runs: usize,
    pub alpha: f64,
    pub seed: u64,
    pub unit: PairingUnit,
    pub mode: WilcoxonMode,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            n_samples: 10_000,
            runs: 10,
            alpha: 0.05,
            seed: 0,
            unit: PairingUnit::Type,
            mode: WilcoxonMode::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    pub p_min: f64,
    pub p_max: f64,
    pub runs: usize,
    /// Share of runs with `p >= alpha`.
    pub fraction_similar: f64,
    pub alpha: f64,
    pub n_samples: usize,
    /// Per-run p-values in run order.
    pub p_values: Vec<f64>,
}

/// Paired per-million frequencies for one sampling run, reduced to the
/// configured pairing unit.
pub fn sample_pairs(
    a: &FrequencyTable,
    b: &FrequencyTable,
    n: usize,
    seed: u64,
    unit: PairingUnit,
) -> Result<Vec<(f64, f64)>> {
    let words = sample_pooled_words(a, b, n, seed)?;
    let pair = |w: &str| (a.per_million(w), b.per_million(w));
    Ok(match unit {
        PairingUnit::Token => words.into_iter().map(pair).collect(),
        PairingUnit::Type => {
            let mut seen = HashSet::new();
            words.into_iter().filter(|w| seen.insert(*w)).map(pair).collect()
        }
    })
}

pub fn table_similarity(a: &FrequencyTable, b: &FrequencyTable, cfg: &SimilarityConfig) -> Result<SimilarityReport> {
    if cfg.runs == 0 {
        return Err(Error::invalid("similarity needs at least one run"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha <= 1.0) {
        return Err(Error::invalid(format!("alpha {} is not in (0, 1]", cfg.alpha)));
    }
    let mut p_values = Vec::with_capacity(cfg.runs);
    for run in 0..cfg.runs {
        let pairs = sample_pairs(a, b, cfg.n_samples, derive_seed(cfg.seed, run as u64), cfg.unit)?;
        p_values.push(wilcoxon_signed_rank(&pairs, cfg.mode)?.p_two_sided);
    }
    let similar = p_values.iter().filter(|&&p| p >= cfg.alpha).count();
    Ok(SimilarityReport {
        p_min: p_values.iter().copied().fold(f64::INFINITY, f64::min),
        p_max: p_values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        runs: cfg.runs,
        fraction_similar: similar as f64 / cfg.runs as f64,
        alpha: cfg.alpha,
        n_samples: cfg.n_samples,
        p_values,
    })
}

pub fn corpus_similarity(
    a: &LabeledDataset,
    b: &LabeledDataset,
    stopwords: &StopwordSet,
    cfg: &SimilarityConfig,
) -> Result<SimilarityReport> {
    let ta = word_multiset(a, stopwords);
    let tb = word_multiset(b, stopwords);
    table_similarity(&ta, &tb, cfg).map_err(|e| match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("{} vs {}: {m}", a.name, b.name)),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::Sentence;

    fn ds(name: &str, texts: &[&str]) -> LabeledDataset {
        LabeledDataset::new(
            name,
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Sentence::new("1", i + 1, *t, None))
                .collect(),
        )
    }

    #[test]
    fn identical_corpora_are_fully_similar() {
        let a = ds("a", &["red fox jumps", "lazy dog sleeps", "red dog"]);
        for unit in [PairingUnit::Token, PairingUnit::Type] {
            let cfg = SimilarityConfig {
                n_samples: 200,
                runs: 5,
                unit,
                ..Default::default()
            };
            let r = corpus_similarity(&a, &a.clone(), &StopwordSet::empty(), &cfg).unwrap();
            assert_eq!(r.fraction_similar, 1.0);
            assert_eq!((r.p_min, r.p_max), (1.0, 1.0));
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let a = ds("a", &["red fox jumps over", "lazy dog sleeps", "red dog barks loud"]);
        let b = ds("b", &["blue fox runs", "lazy cat sleeps", "blue cat"]);
        let cfg = SimilarityConfig {
            n_samples: 300,
            runs: 4,
            seed: 99,
            ..Default::default()
        };
        let r1 = corpus_similarity(&a, &b, &StopwordSet::empty(), &cfg).unwrap();
        let r2 = corpus_similarity(&a, &b, &StopwordSet::empty(), &cfg).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.p_min <= r1.p_max);
        assert_eq!(r1.p_values.len(), 4);
    }

    #[test]
    fn type_pairing_has_one_pair_per_word() {
        let a = FrequencyTable::from_tokens(["x", "y", "y"]);
        let b = FrequencyTable::from_tokens(["y", "z"]);
        let pairs = sample_pairs(&a, &b, 1000, 1, PairingUnit::Type).unwrap();
        assert_eq!(pairs.len(), 3);
        assert_eq!(sample_pairs(&a, &b, 1000, 1, PairingUnit::Token).unwrap().len(), 1000);
    }

    #[test]
    fn empty_corpus_error_names_the_sets() {
        let a = ds("left", &["words here"]);
        let b = ds("right", &["the"]);
        let stop = StopwordSet::new(["the"]).unwrap();
        let err = corpus_similarity(&a, &b, &stop, &SimilarityConfig::default()).unwrap_err();
        assert!(err.to_string().contains("left vs right"), "{err}");
    }

    #[test]
    fn zero_runs_rejected() {
        let t = FrequencyTable::from_tokens(["x"]);
        let cfg = SimilarityConfig {
            runs: 0,
            ..Default::default()
        };
        assert!(table_similarity(&t, &t, &cfg).is_err());
    }
}
