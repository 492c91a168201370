use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::augmentation::{AugmentationConfig, Technique};
use crate::classifier::{ClassWeights, TrainConfig};
use crate::corpus_io::SplitGranularity;
use crate::divergence::{PairingUnit, SimilarityConfig, WilcoxonMode};
use crate::error::{Error, Result};

pub const DEFAULT_SWEEP_WEIGHTS: [f64; 7] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMetric {
    #[default]
    PositiveF1,
    MacroF1,
}

impl SelectionMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMetric::PositiveF1 => "positive_f1",
            SelectionMetric::MacroF1 => "macro_f1",
        }
    }
}

impl FromStr for SelectionMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive_f1" => Ok(SelectionMetric::PositiveF1),
            "macro_f1" => Ok(SelectionMetric::MacroF1),
            other => Err(format!(
                "unknown selection metric {other:?} (expected positive_f1|macro_f1)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncoderKind {
    #[default]
    Hashing,
    Embedding,
    /// Hashed n-grams followed by the imported embedding.
    Concat,
}

impl EncoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::Hashing => "hashing",
            EncoderKind::Embedding => "embedding",
            EncoderKind::Concat => "concat",
        }
    }
}

impl FromStr for EncoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hashing" => Ok(EncoderKind::Hashing),
            "embedding" => Ok(EncoderKind::Embedding),
            "concat" => Ok(EncoderKind::Concat),
            other => Err(format!("unknown encoder {other:?} (expected hashing|embedding|concat)")),
        }
    }
}

/// Articles directory plus SLC label file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub articles: PathBuf,
    pub labels: PathBuf,
}

/// Everything an experiment needs, read from a flat `key = value` file.
///
/// Relative paths are resolved against the directory holding the file, and
/// [`ExperimentConfig::snapshot`] writes them back out absolute so a run
/// directory can be re-executed from anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Master seed: splits, augmentation and similarity sampling derive from it.
    pub seed: u64,
    pub train: Option<DatasetPaths>,
    /// The shifted evaluation set, typically a development set from a later period.
    pub eval: Option<DatasetPaths>,
    /// Optional third set, used only by the similarity report; labels may be empty.
    pub test: Option<DatasetPaths>,
    pub train_spans: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    /// `None` selects the bundled English list.
    pub stopwords: Option<PathBuf>,

    pub split_fraction: f64,
    pub split_granularity: SplitGranularity,
    pub seeds: Vec<u64>,

    pub encoder: EncoderKind,
    pub hash_dim: usize,
    pub ngram_max: usize,

    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub minority_weight: f64,

    pub sweep_weights: Vec<f64>,
    pub selection_metric: SelectionMetric,

    pub augmentation: Technique,
    pub deletion_prob: f64,
    pub synonyms_per_sentence: usize,
    pub oversample_ratio: f64,

    pub similarity_samples: usize,
    pub similarity_runs: usize,
    pub alpha: f64,
    pub pairing: PairingUnit,
    pub wilcoxon: WilcoxonMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        let aug = AugmentationConfig::default();
        let sim = SimilarityConfig::default();
        ExperimentConfig {
            seed: 0,
            train: None,
            eval: None,
            test: None,
            train_spans: None,
            embeddings: None,
            lexicon: None,
            stopwords: None,
            split_fraction: 0.75,
            split_granularity: SplitGranularity::Sentence,
            seeds: vec![0, 1, 2],
            encoder: EncoderKind::Hashing,
            hash_dim: 4096,
            ngram_max: 2,
            learning_rate: train.learning_rate,
            epochs: train.epochs,
            batch_size: train.batch_size,
            l2: train.l2,
            minority_weight: 1.0,
            sweep_weights: DEFAULT_SWEEP_WEIGHTS.to_vec(),
            selection_metric: SelectionMetric::PositiveF1,
            augmentation: Technique::None,
            deletion_prob: aug.deletion_prob,
            synonyms_per_sentence: aug.synonyms_per_sentence,
            oversample_ratio: aug.oversample_ratio,
            similarity_samples: sim.n_samples,
            similarity_runs: sim.runs,
            alpha: sim.alpha,
            pairing: sim.unit,
            wilcoxon: sim.mode,
        }
    }
}

fn config_err(line: usize, msg: impl fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn split_granularity_str(g: SplitGranularity) -> &'static str {
    match g {
        SplitGranularity::Sentence => "sentence",
        SplitGranularity::Article => "article",
    }
}

fn pairing_str(p: PairingUnit) -> &'static str {
    match p {
        PairingUnit::Token => "token",
        PairingUnit::Type => "type",
    }
}

fn wilcoxon_str(m: WilcoxonMode) -> &'static str {
    match m {
        WilcoxonMode::Auto => "auto",
        WilcoxonMode::Exact => "exact",
        WilcoxonMode::Normal => "normal",
    }
}

impl ExperimentConfig {
    /// Parses config text. `base_dir` anchors relative paths.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| config_err(line, "expected `key = value`"))?;
            let key = key.trim();
            if let Some(first) = seen.insert(key.to_string(), line) {
                return Err(config_err(line, format!("`{key}` already set on line {first}")));
            }
            cfg.set(key, value.trim(), base_dir).map_err(|e| config_err(line, e))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Assigns one key. Used by the parser and for command-line overrides;
    /// call [`ExperimentConfig::validate`] afterwards.
    pub fn set(&mut self, key: &str, value: &str, base_dir: &Path) -> Result<(), String> {
        fn val<T: FromStr>(key: &str, value: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            value
                .parse()
                .map_err(|e| format!("bad value {value:?} for `{key}`: {e}"))
        }
        fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, String>
        where
            T::Err: fmt::Display,
        {
            value
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(|v| val(key, v))
                .collect()
        }
        let path = base_dir.join(value);
        let half = |slot: &mut Option<DatasetPaths>, articles: bool| {
            let set = slot.get_or_insert_with(|| DatasetPaths {
                articles: PathBuf::new(),
                labels: PathBuf::new(),
            });
            if articles {
                set.articles = path.clone();
            } else {
                set.labels = path.clone();
            }
        };
        match key {
            "seed" => self.seed = val(key, value)?,
            "train_articles" => half(&mut self.train, true),
            "train_labels" => half(&mut self.train, false),
            "eval_articles" => half(&mut self.eval, true),
            "eval_labels" => half(&mut self.eval, false),
            "test_articles" => half(&mut self.test, true),
            "test_labels" => half(&mut self.test, false),
            "train_spans" => self.train_spans = Some(path),
            "embeddings" => self.embeddings = Some(path),
            "lexicon" => self.lexicon = Some(path),
            "stopwords" => self.stopwords = Some(path),
            "split_fraction" => self.split_fraction = val(key, value)?,
            "split_granularity" => self.split_granularity = val(key, value)?,
            "seeds" => self.seeds = list(key, value)?,
            "encoder" => self.encoder = val(key, value)?,
            "hash_dim" => self.hash_dim = val(key, value)?,
            "ngram_max" => self.ngram_max = val(key, value)?,
            "learning_rate" => self.learning_rate = val(key, value)?,
            "epochs" => self.epochs = val(key, value)?,
            "batch_size" => self.batch_size = val(key, value)?,
            "l2" => self.l2 = val(key, value)?,
            "minority_weight" => self.minority_weight = val(key, value)?,
            "sweep_weights" => self.sweep_weights = list(key, value)?,
            "selection_metric" => self.selection_metric = val(key, value)?,
            "augmentation" => self.augmentation = val(key, value)?,
            "deletion_prob" => self.deletion_prob = val(key, value)?,
            "synonyms_per_sentence" => self.synonyms_per_sentence = val(key, value)?,
            "oversample_ratio" => self.oversample_ratio = val(key, value)?,
            "similarity_samples" => self.similarity_samples = val(key, value)?,
            "similarity_runs" => self.similarity_runs = val(key, value)?,
            "alpha" => self.alpha = val(key, value)?,
            "pairing" => self.pairing = val(key, value)?,
            "wilcoxon" => self.wilcoxon = val(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks value ranges and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return bad(format!("split_fraction {} is not in (0, 1)", self.split_fraction));
        }
        if self.seeds.is_empty() {
            return bad("seeds must list at least one seed".into());
        }
        if self.sweep_weights.is_empty() {
            return bad("sweep_weights must not be empty".into());
        }
        if self.sweep_weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return bad(format!("sweep_weights must be positive: {}", join(&self.sweep_weights)));
        }
        if self.sweep_weights.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "sweep_weights must be strictly increasing: {}",
                join(&self.sweep_weights)
            ));
        }
        if !(self.minority_weight.is_finite() && self.minority_weight > 0.0) {
            return bad(format!("minority_weight {} must be positive", self.minority_weight));
        }
        if !self.hash_dim.is_power_of_two() || self.ngram_max == 0 {
            return bad(format!(
                "hash_dim must be a power of two and ngram_max at least 1 (got {}, {})",
                self.hash_dim, self.ngram_max
            ));
        }
        if self.encoder != EncoderKind::Hashing && self.embeddings.is_none() {
            return bad(format!("encoder `{}` needs `embeddings`", self.encoder.as_str()));
        }
        if self.similarity_runs == 0 || self.similarity_samples == 0 {
            return bad("similarity_runs and similarity_samples must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha {} is not in (0, 1]", self.alpha));
        }
        self.train_config(1.0)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.augmentation_config()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;

        let mut paths: Vec<(&str, &Path)> = Vec::new();
        for (name, set) in [("train", &self.train), ("eval", &self.eval), ("test", &self.test)] {
            if let Some(set) = set {
                if set.articles.as_os_str().is_empty() || set.labels.as_os_str().is_empty() {
                    return bad(format!("`{name}_articles` and `{name}_labels` must be given together"));
                }
                paths.push((name, &set.articles));
                paths.push((name, &set.labels));
            }
        }
        for (name, p) in [
            ("train_spans", &self.train_spans),
            ("embeddings", &self.embeddings),
            ("lexicon", &self.lexicon),
            ("stopwords", &self.stopwords),
        ] {
            if let Some(p) = p {
                paths.push((name, p));
            }
        }
        for (name, p) in paths {
            if !p.exists() {
                return bad(format!("{name}: {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    /// Training hyperparameters with class weights `[1, minority_weight]`.
    pub fn train_config(&self, minority_weight: f64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            class_weights: ClassWeights::new(vec![1.0, minority_weight]).unwrap_or_else(|_| ClassWeights::uniform(2)),
            l2: self.l2,
        }
    }

    pub fn augmentation_config(&self) -> AugmentationConfig {
        AugmentationConfig {
            technique: self.augmentation,
            deletion_prob: self.deletion_prob,
            synonyms_per_sentence: self.synonyms_per_sentence,
            oversample_ratio: self.oversample_ratio,
            seed: self.seed,
        }
    }

    pub fn similarity_config(&self) -> SimilarityConfig {
        SimilarityConfig {
            n_samples: self.similarity_samples,
            runs: self.similarity_runs,
            alpha: self.alpha,
            seed: self.seed,
            unit: self.pairing,
            mode: self.wilcoxon,
        }
    }

    /// Canonical config text: every key, absolute paths. Parsing it back
    /// yields an equal config.
    pub fn snapshot(&self) -> String {
        let mut out = String::from("# skewlens run snapshot\n");
        let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("seed", self.seed.to_string());
        for (name, set) in [("train", &self.train), ("eval", &self.eval), ("test", &self.test)] {
            if let Some(set) = set {
                kv(&format!("{name}_articles"), abs(&set.articles).display().to_string());
                kv(&format!("{name}_labels"), abs(&set.labels).display().to_string());
            }
        }
        for (name, p) in [
            ("train_spans", &self.train_spans),
            ("embeddings", &self.embeddings),
            ("lexicon", &self.lexicon),
            ("stopwords", &self.stopwords),
        ] {
            if let Some(p) = p {
                kv(name, abs(p).display().to_string());
            }
        }
        kv("split_fraction", self.split_fraction.to_string());
        kv(
            "split_granularity",
            split_granularity_str(self.split_granularity).into(),
        );
        kv("seeds", join(&self.seeds));
        kv("encoder", self.encoder.as_str().into());
        kv("hash_dim", self.hash_dim.to_string());
        kv("ngram_max", self.ngram_max.to_string());
        kv("learning_rate", self.learning_rate.to_string());
        kv("epochs", self.epochs.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("l2", self.l2.to_string());
        kv("minority_weight", self.minority_weight.to_string());
        kv("sweep_weights", join(&self.sweep_weights));
        kv("selection_metric", self.selection_metric.as_str().into());
        kv("augmentation", self.augmentation.as_str().into());
        kv("deletion_prob", self.deletion_prob.to_string());
        kv("synonyms_per_sentence", self.synonyms_per_sentence.to_string());
        kv("oversample_ratio", self.oversample_ratio.to_string());
        kv("similarity_samples", self.similarity_samples.to_string());
        kv("similarity_runs", self.similarity_runs.to_string());
        kv("alpha", self.alpha.to_string());
        kv("pairing", pairing_str(self.pairing).into());
        kv("wilcoxon", wilcoxon_str(self.wilcoxon).into());
        out
    }
}
