use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rand::Rng as _;

use super::{line_ranges, LabeledDataset};
use crate::error::{Error, Result};
use crate::seed;

macro_rules! techniques {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// The 18 fragment-level technique names, spelled as in the annotation files.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum PropagandaTechnique {
            $($variant),+
        }

        impl PropagandaTechnique {
            pub const ALL: &'static [PropagandaTechnique] = &[$(PropagandaTechnique::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(PropagandaTechnique::$variant => $name),+
                }
            }
        }

        impl FromStr for PropagandaTechnique {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(PropagandaTechnique::$variant),)+
                    other => Err(format!("unknown propaganda technique {other:?}")),
                }
            }
        }
    };
}

techniques! {
    AppealToAuthority => "Appeal_to_Authority",
    AppealToFearPrejudice => "Appeal_to_fear-prejudice",
    Bandwagon => "Bandwagon",
    BlackAndWhiteFallacy => "Black-and-White_Fallacy",
    CausalOversimplification => "Causal_Oversimplification",
    Doubt => "Doubt",
    ExaggerationMinimisation => "Exaggeration,Minimisation",
    FlagWaving => "Flag-Waving",
    LoadedLanguage => "Loaded_Language",
    NameCallingLabeling => "Name_Calling,Labeling",
    ObfuscationVaguenessConfusion => "Obfuscation,Intentional_Vagueness,Confusion",
    RedHerring => "Red_Herring",
    ReductioAdHitlerum => "Reductio_ad_hitlerum",
    Repetition => "Repetition",
    Slogans => "Slogans",
    StrawMen => "Straw_Men",
    ThoughtTerminatingCliches => "Thought-terminating_Cliches",
    Whataboutism => "Whataboutism",
}

impl fmt::Display for PropagandaTechnique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A technique-labelled byte span `[start, end)` of an article file.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpanAnnotation {
    pub article_id: String,
    pub technique: PropagandaTechnique,
    pub start: usize,
    pub end: usize,
}

impl SpanAnnotation {
    pub fn new(
        article_id: impl Into<String>,
        technique: PropagandaTechnique,
        start: usize,
        end: usize,
    ) -> Result<Self> {
        if start >= end {
            return Err(Error::invalid(format!("span start {start} is not before end {end}")));
        }
        Ok(SpanAnnotation {
            article_id: article_id.into(),
            technique,
            start,
            end,
        })
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

pub fn load_flc_annotations(path: &Path) -> Result<Vec<SpanAnnotation>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut spans = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let technique = fields[1].trim().parse().map_err(|m| Error::parse(path, lineno, m))?;
        let offset = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::parse(path, lineno, format!("bad offset {s:?}")))
        };
        let (start, end) = (offset(fields[2])?, offset(fields[3])?);
        let span = SpanAnnotation::new(fields[0].trim(), technique, start, end)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        spans.push(span);
    }
    Ok(spans)
}

/// Keeps one span per identical `(article, start, end)` group, chosen
/// uniformly with the seeded generator. Partial overlaps are left alone.
/// Survivors appear at the position of their group's first member.
pub fn resolve_overlapping_spans(spans: &[SpanAnnotation], seed: u64) -> Vec<SpanAnnotation> {
    let mut groups: Vec<Vec<&SpanAnnotation>> = Vec::new();
    let mut slot: HashMap<(&str, usize, usize), usize> = HashMap::new();
    for span in spans {
        let key = (span.article_id.as_str(), span.start, span.end);
        match slot.get(&key) {
            Some(&g) => groups[g].push(span),
            None => {
                slot.insert(key, groups.len());
                groups.push(vec![span]);
            }
        }
    }

    let mut rng = seed::rng(seed);
    groups
        .into_iter()
        .map(|group| {
            let pick = if group.len() == 1 {
                0
            } else {
                rng.gen_range(0..group.len())
            };
            group[pick].clone()
        })
        .collect()
}

/// Byte layout of one article: total length and the range of each line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleLayout {
    pub len: usize,
    /// `lines[k - 1]` is the range of sentence `k`.
    pub lines: Vec<Range<usize>>,
}

impl ArticleLayout {
    pub fn from_text(text: &str) -> Self {
        ArticleLayout {
            len: text.len(),
            lines: line_ranges(text),
        }
    }
}

/// Maps every sentence of a set of articles to its byte range.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArticleOffsets {
    pub articles: HashMap<String, ArticleLayout>,
}

impl ArticleOffsets {
    pub fn from_articles(articles: &BTreeMap<String, String>) -> Self {
        ArticleOffsets {
            articles: articles
                .iter()
                .map(|(id, text)| (id.clone(), ArticleLayout::from_text(text)))
                .collect(),
        }
    }

    pub fn load(articles_dir: &Path) -> Result<Self> {
        Ok(Self::from_articles(&super::load_articles(articles_dir)?))
    }

    fn sentence_range(&self, article_id: &str, index: usize) -> Result<Range<usize>> {
        let layout = self
            .articles
            .get(article_id)
            .ok_or_else(|| Error::invalid(format!("no offsets for article {article_id}")))?;
        let range = index
            .checked_sub(1)
            .and_then(|i| layout.lines.get(i))
            .cloned()
            .ok_or_else(|| Error::invalid(format!("no offsets for sentence {article_id}:{index}")))?;
        if range.start > range.end || range.end > layout.len {
            return Err(Error::invalid(format!(
                "sentence {article_id}:{index} range {range:?} lies outside the article ({} bytes)",
                layout.len
            )));
        }
        Ok(range)
    }
}

/// Keeps exactly the sentences whose byte range intersects at least one span.
pub fn filter_fragment_sentences(
    ds: &LabeledDataset,
    spans: &[SpanAnnotation],
    offsets: &ArticleOffsets,
) -> Result<LabeledDataset> {
    let mut by_article: HashMap<&str, Vec<Range<usize>>> = HashMap::new();
    for span in spans {
        if let Some(layout) = offsets.articles.get(&span.article_id) {
            if span.end > layout.len {
                return Err(Error::invalid(format!(
                    "span {}..{} lies outside article {} ({} bytes)",
                    span.start, span.end, span.article_id, layout.len
                )));
            }
        }
        by_article
            .entry(span.article_id.as_str())
            .or_default()
            .push(span.range());
    }

    let mut kept = Vec::new();
    for s in &ds.sentences {
        let range = offsets.sentence_range(&s.article_id, s.index)?;
        let hit = by_article
            .get(s.article_id.as_str())
            .is_some_and(|spans| spans.iter().any(|sp| sp.start < range.end && range.start < sp.end));
        if hit {
            kept.push(s.clone());
        }
    }
    Ok(LabeledDataset::new(ds.name.clone(), kept))
}
