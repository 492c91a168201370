//! Imbalance treatments: random oversampling of the minority class, synonym
//! replacement and random word deletion.
//!
//! None of them changes a label, removes an original sentence or touches a
//! majority-class sentence. Generated sentences are appended after the
//! originals and keep the `(article_id, index)` of their source.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng as _;

use crate::corpus_io::{Label, LabeledDataset, Sentence, StopwordSet};
use crate::error::{Error, Result};
use crate::seed::{self, derive_seed};

const DEFAULT_LEXICON: &str = include_str!("../data/lexicon_en.tsv");

/// Lowercase word → ordered list of lowercase single-word synonyms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    entries: HashMap<String, Vec<String>>,
}

fn is_clean_word(w: &str) -> bool {
    !w.is_empty() && !w.chars().any(char::is_whitespace) && w.to_lowercase() == w
}

impl SynonymLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, synonyms: Vec<String>) -> Result<()> {
        let word = word.into();
        if !is_clean_word(&word) {
            return Err(Error::invalid(format!(
                "lexicon word {word:?} must be lowercase without whitespace"
            )));
        }
        if synonyms.is_empty() {
            return Err(Error::invalid(format!("lexicon word {word:?} has no synonyms")));
        }
        for s in &synonyms {
            if !is_clean_word(s) {
                return Err(Error::invalid(format!(
                    "synonym {s:?} must be lowercase without whitespace"
                )));
            }
            if *s == word {
                return Err(Error::invalid(format!(
                    "lexicon word {word:?} lists itself as a synonym"
                )));
            }
        }
        self.entries.insert(word, synonyms);
        Ok(())
    }

    /// `word TAB syn1,syn2,...` per line; blank lines and `#` comments skipped.
    pub fn parse(content: &str, source: &Path) -> Result<Self> {
        let mut lex = Self::new();
        for (i, line) in content.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, syns) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(source, i + 1, "expected `word TAB syn1,syn2,...`"))?;
            let syns = syns.split(',').map(|s| s.trim().to_string()).collect();
            lex.insert(word.trim(), syns)
                .map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content, path)
    }

    /// Small English lexicon shipped in `data/lexicon_en.tsv`.
    pub fn english_default() -> Self {
        Self::parse(DEFAULT_LEXICON, Path::new("data/lexicon_en.tsv")).expect("bundled lexicon is valid")
    }

    pub fn synonyms(&self, word: &str) -> Option<&[String]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Technique {
    #[default]
    None,
    Oversample,
    Synonym,
    Delete,
}

impl Technique {
    /// Row order of the augmentation comparison table.
    pub const COMPARISON_ORDER: [Technique; 4] = [
        Technique::None,
        Technique::Synonym,
        Technique::Delete,
        Technique::Oversample,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Technique::None => "none",
            Technique::Oversample => "oversample",
            Technique::Synonym => "synonym",
            Technique::Delete => "delete",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technique {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Technique::None),
            "oversample" => Ok(Technique::Oversample),
            "synonym" => Ok(Technique::Synonym),
            "delete" => Ok(Technique::Delete),
            other => Err(format!(
                "unknown augmentation {other:?} (expected none|oversample|synonym|delete)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationConfig {
    pub technique: Technique,
    pub deletion_prob: f64,
    pub synonyms_per_sentence: usize,
    /// Target minority:majority ratio after balancing.
    pub oversample_ratio: f64,
    pub seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        AugmentationConfig {
            technique: Technique::None,
            deletion_prob: 0.1,
            synonyms_per_sentence: 1,
            oversample_ratio: 1.0,
            seed: 0,
        }
    }
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<()> {
        let ratio_ok = self.oversample_ratio.is_finite() && self.oversample_ratio > 0.0;
        match self.technique {
            Technique::None => Ok(()),
            _ if !ratio_ok => Err(Error::invalid(format!(
                "oversample ratio {} must be positive",
                self.oversample_ratio
            ))),
            Technique::Delete if !(0.0..1.0).contains(&self.deletion_prob) => Err(Error::invalid(format!(
                "deletion probability {} is not in [0, 1)",
                self.deletion_prob
            ))),
            Technique::Synonym if self.synonyms_per_sentence == 0 => {
                Err(Error::invalid("synonyms per sentence must be at least 1"))
            }
            _ => Ok(()),
        }
    }
}

/// The less frequent labeled class; errors unless both classes occur.
pub fn minority_label(ds: &LabeledDataset) -> Result<Label> {
    let counts = ds.class_counts();
    if counts.propaganda == 0 || counts.non_propaganda == 0 {
        return Err(Error::invalid(format!(
            "dataset {:?} needs both classes (propaganda {}, non-propaganda {})",
            ds.name, counts.propaganda, counts.non_propaganda
        )));
    }
    Ok(if counts.propaganda <= counts.non_propaganda {
        Label::Propaganda
    } else {
        Label::NonPropaganda
    })
}

/// Appends minority-class copies, drawn uniformly with replacement, until the
/// minority count reaches `round(ratio * majority_count)`. Never removes
/// sentences, so a target at or below the current count leaves `ds` as is.
pub fn oversample(ds: &LabeledDataset, ratio: f64, seed: u64) -> Result<LabeledDataset> {
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::invalid(format!("oversample ratio {ratio} must be positive")));
    }
    let minority = minority_label(ds)?;
    let counts = ds.class_counts();
    let majority_count = counts.labeled() - counts.get(minority);
    let target = (ratio * majority_count as f64).round() as usize;

    let pool: Vec<&Sentence> = ds.sentences.iter().filter(|s| s.label == Some(minority)).collect();
    let mut out = ds.clone();
    if target > pool.len() {
        let mut rng = seed::rng(seed);
        out.sentences
            .extend((0..target - pool.len()).map(|_| pool[rng.gen_range(0..pool.len())].clone()));
    }
    Ok(out)
}

fn lookup_key(word: &str) -> String {
    word.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

/// Replaces up to `n` distinct whitespace-delimited words that have lexicon
/// entries (stopwords excluded) with a uniformly chosen synonym. Surrounding
/// punctuation is kept. Returns the sentence untouched when nothing matches.
pub fn synonym_replace(
    sentence: &Sentence,
    lexicon: &SynonymLexicon,
    n: usize,
    stopwords: &StopwordSet,
    seed: u64,
) -> Sentence {
    let words: Vec<&str> = sentence.text.split_whitespace().collect();
    let candidates: Vec<(usize, &[String])> = words
        .iter()
        .enumerate()
        .filter_map(|(i, w)| {
            let key = lookup_key(w);
            if key.is_empty() || stopwords.contains(&key) {
                return None;
            }
            lexicon.synonyms(&key).map(|syns| (i, syns))
        })
        .collect();
    if candidates.is_empty() || n == 0 {
        return sentence.clone();
    }

    let mut rng = seed::rng(seed);
    let k = n.min(candidates.len());
    let mut out: Vec<String> = words.iter().map(|w| w.to_string()).collect();
    for pick in index::sample(&mut rng, candidates.len(), k) {
        let (pos, syns) = candidates[pick];
        let word = words[pos];
        let core_start = word.find(|c: char| c.is_alphanumeric()).unwrap_or(0);
        let core_end = word
            .rfind(|c: char| c.is_alphanumeric())
            .map(|i| i + word[i..].chars().next().map_or(1, char::len_utf8))
            .unwrap_or(word.len());
        let synonym = &syns[rng.gen_range(0..syns.len())];
        out[pos] = format!("{}{}{}", &word[..core_start], synonym, &word[core_end..]);
    }
    Sentence {
        text: out.join(" "),
        ..sentence.clone()
    }
}

/// Drops each whitespace-delimited word independently with probability `p`.
/// If every word would go, one uniformly chosen word survives.
pub fn random_delete(sentence: &Sentence, p: f64, seed: u64) -> Result<Sentence> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::invalid(format!("deletion probability {p} is not in [0, 1)")));
    }
    let words: Vec<&str> = sentence.text.split_whitespace().collect();
    if words.is_empty() {
        return Ok(sentence.clone());
    }
    let mut rng = seed::rng(seed);
    let mut kept: Vec<&str> = words.iter().copied().filter(|_| rng.gen::<f64>() >= p).collect();
    if kept.len() == words.len() {
        return Ok(sentence.clone());
    }
    if kept.is_empty() {
        kept.push(words[rng.gen_range(0..words.len())]);
    }
    Ok(Sentence {
        text: kept.join(" "),
        ..sentence.clone()
    })
}

/// Applies one treatment to a training set.
///
/// `synonym` and `delete` append one perturbed copy of every minority-class
/// sentence and then oversample the enlarged minority class to the
/// configured ratio, so every treatment ends at a comparable size.
pub fn augment_dataset(
    ds: &LabeledDataset,
    cfg: &AugmentationConfig,
    lexicon: &SynonymLexicon,
    stopwords: &StopwordSet,
) -> Result<LabeledDataset> {
    cfg.validate()?;
    let balance_seed = derive_seed(cfg.seed, 1);
    let sentence_seeds = derive_seed(cfg.seed, 2);
    match cfg.technique {
        Technique::None => Ok(ds.clone()),
        Technique::Oversample => oversample(ds, cfg.oversample_ratio, balance_seed),
        Technique::Synonym | Technique::Delete => {
            let minority = minority_label(ds)?;
            let mut out = ds.clone();
            for (i, s) in ds.sentences.iter().enumerate() {
                if s.label != Some(minority) {
                    continue;
                }
                let seed = derive_seed(sentence_seeds, i as u64);
                let copy = match cfg.technique {
                    Technique::Synonym => synonym_replace(s, lexicon, cfg.synonyms_per_sentence, stopwords, seed),
                    _ => random_delete(s, cfg.deletion_prob, seed)?,
                };
                out.sentences.push(copy);
            }
            oversample(&out, cfg.oversample_ratio, balance_seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(minority: usize, majority: usize) -> LabeledDataset {
        let mut sentences = Vec::new();
        for i in 0..minority {
            sentences.push(Sentence::new(
                "m",
                i + 1,
                format!("bad minority text {i}"),
                Some(Label::Propaganda),
            ));
        }
        for i in 0..majority {
            sentences.push(Sentence::new(
                "j",
                i + 1,
                format!("plain majority text {i}"),
                Some(Label::NonPropaganda),
            ));
        }
        LabeledDataset::new("t", sentences)
    }

    #[test]
    fn oversample_balances_exactly() {
        let out = oversample(&ds(3, 9), 1.0, 4).unwrap();
        let c = out.class_counts();
        assert_eq!((c.propaganda, c.non_propaganda), (9, 9));
        assert_eq!(&out.sentences[..12], &ds(3, 9).sentences[..]);
    }

    #[test]
    fn oversample_balanced_input_unchanged() {
        let d = ds(5, 5);
        assert_eq!(oversample(&d, 1.0, 4).unwrap(), d);
    }

    #[test]
    fn oversample_corpus_scale() {
        let out = oversample(&ds(4720, 12245), 1.0, 1).unwrap();
        let c = out.class_counts();
        assert_eq!((c.propaganda, c.non_propaganda), (12245, 12245));
    }

    #[test]
    fn oversample_ratio_rounds() {
        // round(0.5 * 9) = round(4.5) = 5
        let c = oversample(&ds(2, 9), 0.5, 0).unwrap().class_counts();
        assert_eq!(c.propaganda, 5);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(oversample(&ds(0, 4), 1.0, 0).is_err());
        assert!(oversample(&ds(3, 4), 0.0, 0).is_err());
    }

    #[test]
    fn synonym_single_candidate() {
        let mut lex = SynonymLexicon::new();
        lex.insert("good", vec!["fine".into()]).unwrap();
        let s = Sentence::new("1", 1, "good riddance", Some(Label::Propaganda));
        let out = synonym_replace(&s, &lex, 1, &StopwordSet::empty(), 7);
        assert_eq!(out.text, "fine riddance");
        assert_eq!(out.label, s.label);
    }

    #[test]
    fn synonym_keeps_punctuation() {
        let mut lex = SynonymLexicon::new();
        lex.insert("good", vec!["fine".into()]).unwrap();
        let s = Sentence::new("1", 1, "\"Good!\" he said", None);
        assert_eq!(
            synonym_replace(&s, &lex, 3, &StopwordSet::empty(), 0).text,
            "\"fine!\" he said"
        );
    }

    #[test]
    fn synonym_no_hits_unchanged() {
        let lex = SynonymLexicon::english_default();
        let s = Sentence::new("1", 1, "zzz   qqq", None);
        assert_eq!(synonym_replace(&s, &lex, 2, &StopwordSet::empty(), 0), s);
    }

    #[test]
    fn synonym_skips_stopwords() {
        let mut lex = SynonymLexicon::new();
        lex.insert("very", vec!["really".into()]).unwrap();
        let s = Sentence::new("1", 1, "very nice", None);
        let stop = StopwordSet::new(["very"]).unwrap();
        assert_eq!(synonym_replace(&s, &lex, 1, &stop, 0), s);
    }

    #[test]
    fn synonym_position_choice_is_uniform() {
        let mut lex = SynonymLexicon::new();
        lex.insert("big", vec!["large".into()]).unwrap();
        lex.insert("fast", vec!["quick".into()]).unwrap();
        let s = Sentence::new("1", 1, "big red fast car", None);
        let first = (0..1000u64)
            .filter(|&seed| {
                synonym_replace(&s, &lex, 1, &StopwordSet::empty(), seed)
                    .text
                    .starts_with("large")
            })
            .count();
        assert!((450..=550).contains(&first), "{first}");
    }

    #[test]
    fn lexicon_validation() {
        let mut lex = SynonymLexicon::new();
        assert!(lex.insert("good", vec!["good".into()]).is_err());
        assert!(lex.insert("Good", vec!["fine".into()]).is_err());
        assert!(lex.insert("good", vec![]).is_err());
        assert!(lex.insert("good", vec!["very fine".into()]).is_err());
        assert!(SynonymLexicon::parse("good fine\n", Path::new("x")).is_err());
        let lex = SynonymLexicon::parse("# c\ngood\tfine,nice\n", Path::new("x")).unwrap();
        assert_eq!(lex.synonyms("good").unwrap(), ["fine", "nice"]);
        assert!(!SynonymLexicon::english_default().is_empty());
    }

    #[test]
    fn delete_with_zero_probability() {
        let s = Sentence::new("1", 1, "one  two three", None);
        assert_eq!(random_delete(&s, 0.0, 3).unwrap(), s);
        assert!(random_delete(&s, 1.0, 3).is_err());
    }

    #[test]
    fn delete_keeps_at_least_one_word() {
        let s = Sentence::new("1", 1, "one two", None);
        for seed in 0..200 {
            assert!(!random_delete(&s, 0.99, seed).unwrap().text.is_empty());
        }
    }

    #[test]
    fn delete_mean_length() {
        let s = Sentence::new("1", 1, "w0 w1 w2 w3 w4 w5 w6 w7 w8 w9", None);
        let total: usize = (0..10_000u64)
            .map(|seed| random_delete(&s, 0.3, seed).unwrap().text.split_whitespace().count())
            .sum();
        let mean = total as f64 / 10_000.0;
        assert!((mean - 7.0).abs() <= 0.15, "{mean}");
    }

    #[test]
    fn augment_none_is_identity() {
        let d = ds(3, 10);
        let out = augment_dataset(
            &d,
            &AugmentationConfig::default(),
            &SynonymLexicon::new(),
            &StopwordSet::empty(),
        )
        .unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn augment_delete_bookkeeping() {
        let d = ds(100, 300);
        let cfg = AugmentationConfig {
            technique: Technique::Delete,
            deletion_prob: 0.1,
            seed: 5,
            ..Default::default()
        };
        let out = augment_dataset(&d, &cfg, &SynonymLexicon::new(), &StopwordSet::empty()).unwrap();
        // originals, then exactly one perturbed copy per minority sentence, then balancing copies
        assert_eq!(&out.sentences[..400], &d.sentences[..]);
        for (orig, copy) in d.sentences[..100].iter().zip(&out.sentences[400..500]) {
            assert_eq!((copy.key(), copy.label), (orig.key(), orig.label));
        }
        let c = out.class_counts();
        assert_eq!((c.propaganda, c.non_propaganda), (300, 300));
        assert_eq!(out.len(), 600);
    }

    #[test]
    fn augment_is_seeded() {
        let d = ds(10, 40);
        for technique in [Technique::Oversample, Technique::Synonym, Technique::Delete] {
            let cfg = AugmentationConfig {
                technique,
                seed: 3,
                ..Default::default()
            };
            let lex = SynonymLexicon::english_default();
            let a = augment_dataset(&d, &cfg, &lex, &StopwordSet::empty()).unwrap();
            let b = augment_dataset(&d, &cfg, &lex, &StopwordSet::empty()).unwrap();
            assert_eq!(a, b);
            assert!(a.sentences[d.len()..]
                .iter()
                .all(|s| s.label == Some(Label::Propaganda)));
        }
    }

    #[test]
    fn config_validation() {
        let bad = AugmentationConfig {
            technique: Technique::Delete,
            deletion_prob: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AugmentationConfig {
            technique: Technique::Synonym,
            synonyms_per_sentence: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let ignored = AugmentationConfig {
            technique: Technique::Oversample,
            deletion_prob: 5.0,
            ..Default::default()
        };
        assert!(ignored.validate().is_ok());
    }
}
