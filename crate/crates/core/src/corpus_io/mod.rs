//! Sentence-level corpora: article files, label and span TSVs, tokenization
//! and seeded splits.
//!
//! On-disk layout:
//!
//! - `article<ID>.txt`: UTF-8, LF line endings, one sentence per line.
//!   Line `k` (1-based) is sentence `k` of article `ID`.
//! - sentence labels: `article_id TAB sentence_index TAB label`, no header,
//!   `label` is `propaganda` or `non-propaganda`.
//! - fragment spans: `article_id TAB technique TAB start TAB end`, no header,
//!   byte offsets into the article file, half-open.

mod spans;
mod split;
mod tokenize;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

pub use spans::{
    filter_fragment_sentences, load_flc_annotations, resolve_overlapping_spans, ArticleLayout, ArticleOffsets,
    PropagandaTechnique, SpanAnnotation,
};
pub use split::{split_dataset, SplitGranularity};
pub use tokenize::{tokenize, StopwordSet};

/// Binary sentence label. The class index used by the classifier is
/// `NonPropaganda = 0`, `Propaganda = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    NonPropaganda,
    Propaganda,
}

impl Label {
    pub const CLASS_COUNT: usize = 2;
    pub const CLASS_NAMES: [&'static str; 2] = ["non-propaganda", "propaganda"];

    pub fn class_index(self) -> usize {
        match self {
            Label::NonPropaganda => 0,
            Label::Propaganda => 1,
        }
    }

    pub fn from_class_index(index: usize) -> Option<Label> {
        match index {
            0 => Some(Label::NonPropaganda),
            1 => Some(Label::Propaganda),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        Self::CLASS_NAMES[self.class_index()]
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "propaganda" => Ok(Label::Propaganda),
            "non-propaganda" => Ok(Label::NonPropaganda),
            other => Err(format!(
                "unknown label {other:?} (expected \"propaganda\" or \"non-propaganda\")"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub article_id: String,
    /// 1-based line number within the article file.
    pub index: usize,
    pub text: String,
    pub label: Option<Label>,
}

impl Sentence {
    pub fn new(article_id: impl Into<String>, index: usize, text: impl Into<String>, label: Option<Label>) -> Self {
        Sentence {
            article_id: article_id.into(),
            index,
            text: text.into(),
            label,
        }
    }

    pub fn key(&self) -> (&str, usize) {
        (&self.article_id, self.index)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub propaganda: usize,
    pub non_propaganda: usize,
}

impl ClassCounts {
    pub fn get(&self, label: Label) -> usize {
        match label {
            Label::Propaganda => self.propaganda,
            Label::NonPropaganda => self.non_propaganda,
        }
    }

    pub fn labeled(&self) -> usize {
        self.propaganda + self.non_propaganda
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledDataset {
    pub name: String,
    pub sentences: Vec<Sentence>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        LabeledDataset {
            name: name.into(),
            sentences,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn class_counts(&self) -> ClassCounts {
        let mut counts = ClassCounts::default();
        for s in &self.sentences {
            match s.label {
                Some(Label::Propaganda) => counts.propaganda += 1,
                Some(Label::NonPropaganda) => counts.non_propaganda += 1,
                None => {}
            }
        }
        counts
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.sentences.iter().all(|s| s.label.is_some())
    }

    /// Class indices of every sentence; errors if any sentence is unlabeled.
    pub fn class_indices(&self) -> Result<Vec<usize>> {
        self.sentences
            .iter()
            .map(|s| {
                s.label.map(Label::class_index).ok_or_else(|| {
                    Error::invalid(format!(
                        "dataset {:?}: sentence {}:{} has no label",
                        self.name, s.article_id, s.index
                    ))
                })
            })
            .collect()
    }

    /// Stable 64-bit FNV-1a digest of names, keys, texts and labels. Used to
    /// check that two protocols evaluated on the same data.
    pub fn content_hash(&self) -> u64 {
        let mut hasher = crate::features::Fnv1a64::new();
        for s in &self.sentences {
            hasher.write(s.article_id.as_bytes());
            hasher.write(&[0]);
            hasher.write(&(s.index as u64).to_le_bytes());
            hasher.write(s.text.as_bytes());
            hasher.write(&[0, s.label.map_or(2, |l| l.class_index() as u8)]);
        }
        hasher.finish()
    }
}

fn article_id_from_file_name(name: &str) -> Option<&str> {
    name.strip_prefix("article")?
        .strip_suffix(".txt")
        .filter(|id| !id.is_empty())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads every `article<ID>.txt` in `dir`, keyed by ID.
pub fn load_articles(dir: &Path) -> Result<BTreeMap<String, String>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut articles = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let file_name = entry.file_name();
        let Some(name) = file_name.to_str() else { continue };
        if let Some(id) = article_id_from_file_name(name) {
            let text = read_to_string(&entry.path())?;
            articles.insert(id.to_string(), text);
        }
    }
    Ok(articles)
}

/// Splits article text into lines, dropping the LF terminators.
pub(crate) fn article_lines(text: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    if text.ends_with('\n') {
        lines.pop();
    }
    lines
}

fn parse_labels(path: &Path) -> Result<Vec<(usize, String, usize, Label)>> {
    let content = read_to_string(path)?;
    let mut rows = Vec::new();
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
        if index == 0 {
            return Err(Error::parse(path, lineno, "sentence index is 1-based"));
        }
        let label = fields[2]
            .trim()
            .parse::<Label>()
            .map_err(|m| Error::parse(path, lineno, m))?;
        rows.push((lineno, fields[0].trim().to_string(), index, label));
    }
    Ok(rows)
}

/// Loads a sentence-level dataset from an article directory and a label TSV.
///
/// Every non-blank line of every article becomes a sentence; sentences
/// without a label row keep `label = None`. Blank lines are not sentences, and
/// a label row that points at a blank line is ignored.
pub fn load_slc_dataset(articles_dir: &Path, labels_path: &Path, name: &str) -> Result<LabeledDataset> {
    let articles = load_articles(articles_dir)?;
    let rows = parse_labels(labels_path)?;

    let mut labels: HashMap<(String, usize), Label> = HashMap::new();
    for (lineno, article_id, index, label) in rows {
        let Some(text) = articles.get(&article_id) else {
            let expected: PathBuf = articles_dir.join(format!("article{article_id}.txt"));
            return Err(Error::parse(
                labels_path,
                lineno,
                format!("missing article file {}", expected.display()),
            ));
        };
        let n_lines = article_lines(text).len();
        if index > n_lines {
            return Err(Error::parse(
                labels_path,
                lineno,
                format!("sentence index {index} beyond end of article {article_id} ({n_lines} lines)"),
            ));
        }
        if labels.insert((article_id.clone(), index), label).is_some() {
            return Err(Error::parse(
                labels_path,
                lineno,
                format!("duplicate label for {article_id}:{index}"),
            ));
        }
    }

    let mut sentences = Vec::new();
    for (article_id, text) in &articles {
        for (i, line) in article_lines(text).into_iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let index = i + 1;
            let label = labels.get(&(article_id.clone(), index)).copied();
            sentences.push(Sentence::new(article_id.clone(), index, line, label));
        }
    }
    Ok(LabeledDataset::new(name, sentences))
}

/// Writes `ds` in the canonical layout: one article file per article id (gaps
/// in the sentence numbering become blank lines) plus a label TSV holding
/// the labeled sentences in dataset order.
pub fn write_slc_dataset(ds: &LabeledDataset, articles_dir: &Path, labels_path: &Path) -> Result<()> {
    fs::create_dir_all(articles_dir).map_err(|e| Error::io(articles_dir, e))?;

    let mut by_article: BTreeMap<&str, BTreeMap<usize, &str>> = BTreeMap::new();
    let mut seen = HashSet::new();
    for s in &ds.sentences {
        if s.text.contains('\n') || s.text.trim().is_empty() {
            return Err(Error::invalid(format!(
                "sentence {}:{} cannot be written on a single non-blank line",
                s.article_id, s.index
            )));
        }
        if s.index == 0 {
            return Err(Error::invalid(format!("sentence {}:0 has a zero index", s.article_id)));
        }
        if !seen.insert(s.key()) {
            return Err(Error::invalid(format!(
                "duplicate sentence {}:{} cannot be written",
                s.article_id, s.index
            )));
        }
        by_article.entry(&s.article_id).or_default().insert(s.index, &s.text);
    }

    for (article_id, lines) in &by_article {
        let last = lines.keys().next_back().copied().unwrap_or(0);
        let mut out = String::new();
        for index in 1..=last {
            if let Some(text) = lines.get(&index) {
                out.push_str(text);
            }
            out.push('\n');
        }
        let path = articles_dir.join(format!("article{article_id}.txt"));
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    }

    let mut labels = String::new();
    for s in &ds.sentences {
        if let Some(label) = s.label {
            labels.push_str(&format!("{}\t{}\t{}\n", s.article_id, s.index, label));
        }
    }
    if let Some(parent) = labels_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(labels_path, labels).map_err(|e| Error::io(labels_path, e))
}

/// Byte range of each line of `text`, excluding the line terminator.
pub(crate) fn line_ranges(text: &str) -> Vec<Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for line in article_lines(text) {
        ranges.push(start..start + line.len());
        start += line.len() + 1;
    }
    ranges
}
