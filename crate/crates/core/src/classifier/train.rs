use rand::seq::SliceRandom;

use super::{gradient, ModelParams, TrainConfig};
use crate::corpus_io::{Label, LabeledDataset};
use crate::error::{Error, Result};
use crate::features::{Encoder, FeatureVector};
use crate::metrics::{evaluate, EvalReport, Scores};
use crate::seed;

/// Minibatch gradient descent from zero parameters. Each epoch visits the
/// examples in an order drawn from the seeded generator.
pub fn train_on_features(
    xs: &[FeatureVector],
    ys: &[usize],
    n_classes: usize,
    cfg: &TrainConfig,
) -> Result<ModelParams> {
    cfg.validate()?;
    if xs.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "{} feature vectors but {} labels",
            xs.len(),
            ys.len()
        )));
    }
    if cfg.class_weights.len() != n_classes {
        return Err(Error::DimensionMismatch {
            expected: n_classes,
            actual: cfg.class_weights.len(),
        });
    }
    let dim = xs[0].dim();
    if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: x.dim(),
        });
    }
    if let Some(y) = ys.iter().find(|&&y| y >= n_classes) {
        return Err(Error::invalid(format!(
            "label {y} out of range for {n_classes} classes"
        )));
    }

    let mut params = ModelParams::zeros(n_classes, dim)?;
    let mut rng = seed::rng(cfg.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&FeatureVector, usize)> = chunk.iter().map(|&i| (&xs[i], ys[i])).collect();
            let grad = gradient(&params, &batch, &cfg.class_weights, cfg.l2)?;
            params.apply_gradient(&grad, cfg.learning_rate);
        }
    }
    Ok(params)
}

pub fn train(ds: &LabeledDataset, encoder: &dyn Encoder, cfg: &TrainConfig) -> Result<ModelParams> {
    if ds.is_empty() {
        return Err(Error::invalid(format!("dataset {:?} is empty", ds.name)));
    }
    let ys = ds.class_indices()?;
    let xs = encoder.encode_dataset(ds)?;
    train_on_features(&xs, &ys, Label::CLASS_COUNT, cfg)
}

/// Mean of the per-seed scores together with the per-seed reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedReport {
    pub mean: Scores,
    pub per_seed: Vec<EvalReport>,
    pub seeds: Vec<u64>,
}

/// One model per seed, each evaluated on every evaluation set.
#[derive(Debug, Clone)]
pub struct RepeatedRun {
    /// One entry per evaluation set, in the order given.
    pub reports: Vec<RepeatedReport>,
    /// One trained model per seed.
    pub models: Vec<ModelParams>,
}

pub fn run_repeated_multi(
    train_ds: &LabeledDataset,
    eval_sets: &[&LabeledDataset],
    encoder: &dyn Encoder,
    cfg: &TrainConfig,
    seeds: &[u64],
) -> Result<RepeatedRun> {
    if seeds.is_empty() {
        return Err(Error::invalid("at least one seed is required"));
    }
    if train_ds.is_empty() {
        return Err(Error::invalid(format!("training set {:?} is empty", train_ds.name)));
    }
    let ys = train_ds.class_indices()?;
    let xs = encoder.encode_dataset(train_ds)?;
    let evals = eval_sets
        .iter()
        .map(|ds| Ok((ds.class_indices()?, encoder.encode_dataset(ds)?)))
        .collect::<Result<Vec<_>>>()?;

    let positive = Label::Propaganda.class_index();
    let mut per_set: Vec<Vec<EvalReport>> = vec![Vec::new(); eval_sets.len()];
    let mut models = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let run_cfg = TrainConfig { seed, ..cfg.clone() };
        let model = train_on_features(&xs, &ys, Label::CLASS_COUNT, &run_cfg)?;
        for (slot, (truth, feats)) in per_set.iter_mut().zip(&evals) {
            let predicted = feats.iter().map(|x| model.predict(x)).collect::<Result<Vec<_>>>()?;
            slot.push(evaluate(truth, &predicted, Label::CLASS_COUNT, positive)?);
        }
        models.push(model);
    }

    let reports = per_set
        .into_iter()
        .map(|per_seed| {
            let scores: Vec<Scores> = per_seed.iter().map(|r| r.scores.clone()).collect();
            Ok(RepeatedReport {
                mean: Scores::mean(&scores)?,
                per_seed,
                seeds: seeds.to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RepeatedRun { reports, models })
}

/// Trains once per seed and evaluates each model on `eval_ds`.
pub fn run_repeated(
    train_ds: &LabeledDataset,
    eval_ds: &LabeledDataset,
    encoder: &dyn Encoder,
    cfg: &TrainConfig,
    seeds: &[u64],
) -> Result<RepeatedReport> {
    let mut run = run_repeated_multi(train_ds, &[eval_ds], encoder, cfg, seeds)?;
    Ok(run.reports.remove(0))
}
