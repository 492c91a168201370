use std::fmt::Write as _;

use super::config::{EncoderKind, ExperimentConfig, SelectionMetric};
use crate::augmentation::{augment_dataset, AugmentationConfig, SynonymLexicon, Technique};
use crate::classifier::{run_repeated_multi, ClassWeights, ModelParams, RepeatedReport, RepeatedRun, TrainConfig};
use crate::corpus_io::{
    filter_fragment_sentences, load_flc_annotations, load_slc_dataset, resolve_overlapping_spans, split_dataset,
    ArticleOffsets, Label, LabeledDataset, StopwordSet,
};
use crate::divergence::{corpus_similarity, SimilarityReport};
use crate::error::{Error, Result};
use crate::features::{load_embeddings, ConcatEncoder, EmbeddingEncoder, Encoder, HashingEncoder};
use crate::metrics::{evaluate, EvalReport, Scores};
use crate::seed::derive_seed;

// Independent seed streams under the master seed.
const SPLIT_STREAM: u64 = 0;
const AUGMENT_STREAM: u64 = 1;
const SIMILARITY_STREAM: u64 = 2;
const SPAN_STREAM: u64 = 3;

/// Datasets and resources loaded from an [`ExperimentConfig`].
///
/// The fields are public so tests and callers can assemble one in memory.
pub struct ExperimentData {
    pub train: LabeledDataset,
    /// Shifted evaluation set.
    pub eval: Option<LabeledDataset>,
    pub test: Option<LabeledDataset>,
    /// Training sentences that intersect at least one span annotation.
    pub fragments: Option<LabeledDataset>,
    pub encoder: Box<dyn Encoder>,
    pub stopwords: StopwordSet,
    pub lexicon: SynonymLexicon,
}

impl ExperimentData {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let train_paths = cfg
            .train
            .as_ref()
            .ok_or_else(|| Error::Config("`train_articles` and `train_labels` are required".into()))?;
        let train = load_slc_dataset(&train_paths.articles, &train_paths.labels, "train")?;
        let eval = match &cfg.eval {
            Some(p) => Some(load_slc_dataset(&p.articles, &p.labels, "eval")?),
            None => None,
        };
        let test = match &cfg.test {
            Some(p) => Some(load_slc_dataset(&p.articles, &p.labels, "test")?),
            None => None,
        };
        let fragments = match &cfg.train_spans {
            Some(path) => {
                let spans = resolve_overlapping_spans(&load_flc_annotations(path)?, derive_seed(cfg.seed, SPAN_STREAM));
                let offsets = ArticleOffsets::load(&train_paths.articles)?;
                let mut ds = filter_fragment_sentences(&train, &spans, &offsets)?;
                ds.name = "train-fragments".into();
                Some(ds)
            }
            None => None,
        };
        let stopwords = match &cfg.stopwords {
            Some(p) => StopwordSet::load(p)?,
            None => StopwordSet::english_default(),
        };
        let lexicon = match &cfg.lexicon {
            Some(p) => SynonymLexicon::load(p)?,
            None => SynonymLexicon::english_default(),
        };
        let encoder = build_encoder(cfg, &stopwords)?;
        Ok(ExperimentData {
            train,
            eval,
            test,
            fragments,
            encoder,
            stopwords,
            lexicon,
        })
    }

    fn shifted(&self) -> Result<&LabeledDataset> {
        self.eval.as_ref().ok_or_else(|| {
            Error::Config("this protocol needs a shifted evaluation set (`eval_articles`, `eval_labels`)".into())
        })
    }
}

pub fn build_encoder(cfg: &ExperimentConfig, stopwords: &StopwordSet) -> Result<Box<dyn Encoder>> {
    let hashing = || HashingEncoder::new(cfg.hash_dim, cfg.ngram_max, stopwords.clone());
    let embedding = || -> Result<EmbeddingEncoder> {
        let path = cfg
            .embeddings
            .as_ref()
            .ok_or_else(|| Error::Config(format!("encoder `{}` needs `embeddings`", cfg.encoder.as_str())))?;
        EmbeddingEncoder::new(load_embeddings(path)?)
    };
    Ok(match cfg.encoder {
        EncoderKind::Hashing => Box::new(hashing()?),
        EncoderKind::Embedding => Box::new(embedding()?),
        EncoderKind::Concat => Box::new(ConcatEncoder::new(vec![Box::new(hashing()?), Box::new(embedding()?)])?),
    })
}

/// The fixed train/in-domain-test split every protocol shares.
pub fn split_train(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<(LabeledDataset, LabeledDataset)> {
    split_dataset(
        &data.train,
        cfg.split_fraction,
        derive_seed(cfg.seed, SPLIT_STREAM),
        cfg.split_granularity,
    )
}

fn augmentation_for(cfg: &ExperimentConfig, technique: Technique) -> AugmentationConfig {
    AugmentationConfig {
        technique,
        seed: derive_seed(cfg.seed, AUGMENT_STREAM),
        ..cfg.augmentation_config()
    }
}

fn metric_value(scores: &Scores, metric: SelectionMetric) -> f64 {
    match metric {
        SelectionMetric::PositiveF1 => scores.positive_f1,
        SelectionMetric::MacroF1 => scores.macro_f1,
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub minority_weight: f64,
    pub in_domain: RepeatedReport,
    pub shifted: RepeatedReport,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub best_weight: f64,
    pub metric: SelectionMetric,
    pub in_domain_hash: u64,
    pub shifted_hash: u64,
}

/// First weight whose shifted-set score is maximal.
pub fn select_best_weight(rows: &[SweepRow], metric: SelectionMetric) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for row in rows {
        let v = metric_value(&row.shifted.mean, metric);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((row.minority_weight, v));
        }
    }
    best.map(|(w, _)| w)
}

/// Trains with class weights `[1, w]` for each `w` and evaluates every model
/// on both sets.
#[allow(clippy::too_many_arguments)]
pub fn weight_sweep(
    train: &LabeledDataset,
    in_domain: &LabeledDataset,
    shifted: &LabeledDataset,
    encoder: &dyn Encoder,
    base: &TrainConfig,
    weights: &[f64],
    seeds: &[u64],
    metric: SelectionMetric,
) -> Result<SweepResult> {
    if weights.is_empty() {
        return Err(Error::invalid("weight list is empty"));
    }
    if weights.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("weights must be strictly increasing"));
    }
    let minority = Label::Propaganda.class_index();
    let mut rows = Vec::with_capacity(weights.len());
    for &w in weights {
        let mut class_weights = vec![1.0; Label::CLASS_COUNT];
        class_weights[minority] = w;
        let cfg = TrainConfig {
            class_weights: ClassWeights::new(class_weights)?,
            ..base.clone()
        };
        let mut run = run_repeated_multi(train, &[in_domain, shifted], encoder, &cfg, seeds)?;
        let shifted_report = run.reports.pop().expect("two evaluation sets");
        let in_domain_report = run.reports.pop().expect("two evaluation sets");
        rows.push(SweepRow {
            minority_weight: w,
            in_domain: in_domain_report,
            shifted: shifted_report,
        });
    }
    let best_weight = select_best_weight(&rows, metric).expect("non-empty rows");
    Ok(SweepResult {
        rows,
        best_weight,
        metric,
        in_domain_hash: in_domain.content_hash(),
        shifted_hash: shifted.content_hash(),
    })
}

pub fn run_weight_sweep(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<SweepResult> {
    let shifted = data.shifted()?;
    let (train, in_domain) = split_train(cfg, data)?;
    let train = augment_dataset(
        &train,
        &augmentation_for(cfg, cfg.augmentation),
        &data.lexicon,
        &data.stopwords,
    )?;
    weight_sweep(
        &train,
        &in_domain,
        shifted,
        data.encoder.as_ref(),
        &cfg.train_config(1.0),
        &cfg.sweep_weights,
        &cfg.seeds,
        cfg.selection_metric,
    )
}

/// `weight,set,precision,recall,f1`, two rows per weight, positive-class
/// scores averaged over seeds.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("weight,set,precision,recall,f1\n");
    for row in &result.rows {
        for (set, report) in [("in_domain", &row.in_domain), ("shifted", &row.shifted)] {
            let p = report.mean.positive_class();
            let _ = writeln!(
                out,
                "{},{set},{:.6},{:.6},{:.6}",
                row.minority_weight, p.precision, p.recall, p.f1
            );
        }
    }
    out
}

pub fn format_sweep(result: &SweepResult) -> String {
    let mut out = format!(
        "{:>8} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
        "weight", "in-dom P", "in-dom R", "in-dom F1", "shifted P", "shifted R", "shifted F1"
    );
    for row in &result.rows {
        let a = row.in_domain.mean.positive_class();
        let b = row.shifted.mean.positive_class();
        let _ = writeln!(
            out,
            "{:>8} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>12.4}",
            row.minority_weight, a.precision, a.recall, a.f1, b.precision, b.recall, b.f1
        );
    }
    let _ = writeln!(
        out,
        "best weight by shifted {}: {}",
        result.metric.as_str(),
        result.best_weight
    );
    out
}

#[derive(Debug, Clone)]
pub struct AugmentationRow {
    pub technique: Technique,
    pub train_size: usize,
    pub in_domain: RepeatedReport,
    pub shifted: RepeatedReport,
    pub in_domain_hash: u64,
    pub shifted_hash: u64,
}

/// Runs every treatment in [`Technique::COMPARISON_ORDER`] on the same split
/// with the same seeds.
#[allow(clippy::too_many_arguments)]
pub fn augmentation_comparison(
    train: &LabeledDataset,
    in_domain: &LabeledDataset,
    shifted: &LabeledDataset,
    encoder: &dyn Encoder,
    train_cfg: &TrainConfig,
    aug: &AugmentationConfig,
    lexicon: &SynonymLexicon,
    stopwords: &StopwordSet,
    seeds: &[u64],
) -> Result<Vec<AugmentationRow>> {
    Technique::COMPARISON_ORDER
        .iter()
        .map(|&technique| {
            let augmented = augment_dataset(
                train,
                &AugmentationConfig {
                    technique,
                    ..aug.clone()
                },
                lexicon,
                stopwords,
            )?;
            let mut run = run_repeated_multi(&augmented, &[in_domain, shifted], encoder, train_cfg, seeds)?;
            let shifted_report = run.reports.pop().expect("two evaluation sets");
            let in_domain_report = run.reports.pop().expect("two evaluation sets");
            Ok(AugmentationRow {
                technique,
                train_size: augmented.len(),
                in_domain: in_domain_report,
                shifted: shifted_report,
                in_domain_hash: in_domain.content_hash(),
                shifted_hash: shifted.content_hash(),
            })
        })
        .collect()
}

pub fn run_augmentation_comparison(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<Vec<AugmentationRow>> {
    let shifted = data.shifted()?;
    let (train, in_domain) = split_train(cfg, data)?;
    augmentation_comparison(
        &train,
        &in_domain,
        shifted,
        data.encoder.as_ref(),
        &cfg.train_config(cfg.minority_weight),
        &augmentation_for(cfg, Technique::None),
        &data.lexicon,
        &data.stopwords,
        &cfg.seeds,
    )
}

pub fn comparison_csv(rows: &[AugmentationRow]) -> String {
    let mut out = String::from("technique,in_domain_f1,shifted_f1\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6}",
            r.technique, r.in_domain.mean.positive_f1, r.shifted.mean.positive_f1
        );
    }
    out
}

pub fn format_comparison(rows: &[AugmentationRow]) -> String {
    let mut out = format!(
        "{:<12} {:>10} {:>14} {:>14}\n",
        "technique", "train size", "in-domain F1", "shifted F1"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<12} {:>10} {:>14.4} {:>14.4}",
            r.technique.as_str(),
            r.train_size,
            r.in_domain.mean.positive_f1,
            r.shifted.mean.positive_f1
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRow {
    pub set_a: String,
    pub set_b: String,
    pub report: SimilarityReport,
}

fn halves(
    ds: &LabeledDataset,
    fraction: f64,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (mut a, mut b) = split_dataset(ds, fraction, seed, cfg.split_granularity)?;
    let pct = (fraction * 100.0).round() as u32;
    if pct * 2 == 100 {
        a.name = format!("{} (50%)", ds.name);
        b.name = format!("{} (other 50%)", ds.name);
    } else {
        a.name = format!("{} ({pct}%)", ds.name);
        b.name = format!("{} ({}%)", ds.name, 100 - pct);
    }
    Ok((a, b))
}

/// Self-similarity of every dataset at 50/50 and 25/75, then every cross pair.
pub fn similarity_report(
    datasets: &[&LabeledDataset],
    cfg: &ExperimentConfig,
    stopwords: &StopwordSet,
) -> Result<Vec<SimilarityRow>> {
    if datasets.len() < 2 {
        return Err(Error::Config(
            "the similarity report needs at least two datasets".into(),
        ));
    }
    let stream = derive_seed(cfg.seed, SIMILARITY_STREAM);
    let mut pairs: Vec<(LabeledDataset, LabeledDataset)> = Vec::new();
    for (i, ds) in datasets.iter().enumerate() {
        for (j, fraction) in [0.5, 0.25].into_iter().enumerate() {
            pairs.push(halves(ds, fraction, derive_seed(stream, (2 * i + j) as u64), cfg)?);
        }
    }
    for i in 0..datasets.len() {
        for j in i + 1..datasets.len() {
            pairs.push((datasets[i].clone(), datasets[j].clone()));
        }
    }
    let sampling = derive_seed(stream, u64::MAX);
    pairs
        .iter()
        .enumerate()
        .map(|(k, (a, b))| {
            let sim_cfg = crate::divergence::SimilarityConfig {
                seed: derive_seed(sampling, k as u64),
                ..cfg.similarity_config()
            };
            Ok(SimilarityRow {
                set_a: a.name.clone(),
                set_b: b.name.clone(),
                report: corpus_similarity(a, b, stopwords, &sim_cfg)?,
            })
        })
        .collect()
}

pub fn run_similarity_report(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<Vec<SimilarityRow>> {
    let sets: Vec<&LabeledDataset> = std::iter::once(&data.train)
        .chain(data.fragments.as_ref())
        .chain(data.eval.as_ref())
        .chain(data.test.as_ref())
        .collect();
    similarity_report(&sets, cfg, &data.stopwords)
}

pub fn similarity_csv(rows: &[SimilarityRow]) -> String {
    let mut out = String::from("set_a,set_b,p_min,p_max,pct_similar\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6e},{:.6e},{:.1}",
            r.set_a,
            r.set_b,
            r.report.p_min,
            r.report.p_max,
            100.0 * r.report.fraction_similar
        );
    }
    out
}

pub fn format_similarity(rows: &[SimilarityRow]) -> String {
    let mut out = format!(
        "{:<28} {:<28} {:>12} {:>12} {:>10}\n",
        "set 1", "set 2", "p (min)", "p (max)", "% similar"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<28} {:<28} {:>12.3e} {:>12.3e} {:>10.0}",
            r.set_a,
            r.set_b,
            r.report.p_min,
            r.report.p_max,
            100.0 * r.report.fraction_similar
        );
    }
    out
}

/// Models from a `train` run plus the names of the sets they were scored on.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub run: RepeatedRun,
    pub set_names: Vec<String>,
    pub train_size: usize,
}

/// Split, augment, train once per seed, and evaluate on the in-domain test
/// split and, when configured, the shifted set.
pub fn run_train(cfg: &ExperimentConfig, data: &ExperimentData) -> Result<TrainOutcome> {
    let (train, in_domain) = split_train(cfg, data)?;
    let train = augment_dataset(
        &train,
        &augmentation_for(cfg, cfg.augmentation),
        &data.lexicon,
        &data.stopwords,
    )?;
    let mut sets = vec![&in_domain];
    sets.extend(data.eval.as_ref());
    let run = run_repeated_multi(
        &train,
        &sets,
        data.encoder.as_ref(),
        &cfg.train_config(cfg.minority_weight),
        &cfg.seeds,
    )?;
    Ok(TrainOutcome {
        set_names: sets.iter().map(|s| s.name.clone()).collect(),
        train_size: train.len(),
        run,
    })
}

/// Scores a saved model on a labeled dataset.
pub fn eval_model(model: &ModelParams, ds: &LabeledDataset, encoder: &dyn Encoder) -> Result<EvalReport> {
    if model.dim() != encoder.dim() {
        return Err(Error::DimensionMismatch {
            expected: encoder.dim(),
            actual: model.dim(),
        });
    }
    if model.n_classes() != Label::CLASS_COUNT {
        return Err(Error::invalid(format!(
            "model has {} classes, expected {}",
            model.n_classes(),
            Label::CLASS_COUNT
        )));
    }
    let truth = ds.class_indices()?;
    let predicted = encoder
        .encode_dataset(ds)?
        .iter()
        .map(|x| model.predict(x))
        .collect::<Result<Vec<_>>>()?;
    evaluate(&truth, &predicted, Label::CLASS_COUNT, Label::Propaganda.class_index())
}
