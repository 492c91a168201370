use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// A set of lowercase, whitespace-free words dropped by [`tokenize`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordSet {
    words: HashSet<String>,
}

impl StopwordSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = HashSet::new();
        for w in words {
            let w = w.into();
            if w.is_empty() || w.chars().any(char::is_whitespace) || w.to_lowercase() != w {
                return Err(Error::invalid(format!(
                    "stopword {w:?} must be lowercase without whitespace"
                )));
            }
            set.insert(w);
        }
        Ok(StopwordSet { words: set })
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse(content: &str) -> Result<Self> {
        Self::new(
            content
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content).map_err(|e| Error::parse(path, 0, e.to_string()))
    }

    /// The English list shipped in `data/stopwords_en.txt`.
    pub fn english_default() -> Self {
        Self::parse(DEFAULT_STOPWORDS).expect("bundled stopword list is valid")
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lowercases `text`, splits on maximal runs of non-alphanumeric characters
/// and drops empty pieces and stopwords. Repeats are kept in order.
pub fn tokenize(text: &str, stopwords: &StopwordSet) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !stopwords.contains(t))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splits_lowercases_and_drops_stopwords() {
        let stop = StopwordSet::new(["the", "is"]).unwrap();
        assert_eq!(
            tokenize("The country is RIPPED apart!", &stop),
            ["country", "ripped", "apart"]
        );
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("", &StopwordSet::empty()).is_empty());
    }

    #[test]
    fn repeats_retained() {
        assert_eq!(tokenize("a a a", &StopwordSet::empty()), ["a", "a", "a"]);
    }

    #[test]
    fn rejects_uppercase_stopword() {
        assert!(StopwordSet::new(["The"]).is_err());
        assert!(StopwordSet::new(["a b"]).is_err());
    }

    #[test]
    fn default_list_loads() {
        let s = StopwordSet::english_default();
        assert!(s.contains("the") && s.contains("and"));
        assert!(!s.contains("propaganda"));
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,60}") {
            let stop = StopwordSet::new(["the", "of", "a"]).unwrap();
            let once = tokenize(&text, &stop);
            let twice = tokenize(&once.join(" "), &stop);
            prop_assert_eq!(once, twice);
        }
    }
}
