use std::str::FromStr;

use rand::seq::SliceRandom;

use super::{LabeledDataset, Sentence};
use crate::error::{Error, Result};
use crate::seed;

/// The unit shuffled by [`split_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitGranularity {
    #[default]
    Sentence,
    /// Whole articles; no article straddles the cut.
    Article,
}

impl FromStr for SplitGranularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sentence" => Ok(SplitGranularity::Sentence),
            "article" => Ok(SplitGranularity::Article),
            other => Err(format!(
                "unknown split granularity {other:?} (expected sentence|article)"
            )),
        }
    }
}

/// Shuffles the units with the seeded generator and cuts at
/// `floor(train_fraction * units)`. Both sides keep the shuffled order and
/// are named `<name>-train` / `<name>-test`.
pub fn split_dataset(
    ds: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
    granularity: SplitGranularity,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction {train_fraction} is not in (0, 1)"
        )));
    }

    let mut units: Vec<Vec<&Sentence>> = match granularity {
        SplitGranularity::Sentence => ds.sentences.iter().map(|s| vec![s]).collect(),
        SplitGranularity::Article => {
            let mut order: Vec<&str> = Vec::new();
            let mut groups: std::collections::HashMap<&str, Vec<&Sentence>> = Default::default();
            for s in &ds.sentences {
                groups
                    .entry(&s.article_id)
                    .or_insert_with(|| {
                        order.push(&s.article_id);
                        Vec::new()
                    })
                    .push(s);
            }
            order.into_iter().map(|id| groups.remove(id).unwrap()).collect()
        }
    };

    let cut = (train_fraction * units.len() as f64).floor() as usize;
    if cut == 0 || cut == units.len() {
        return Err(Error::invalid(format!(
            "splitting {} units at fraction {train_fraction} leaves one side empty",
            units.len()
        )));
    }

    units.shuffle(&mut seed::rng(seed));
    let collect = |part: &[Vec<&Sentence>]| part.iter().flatten().map(|s| (*s).clone()).collect::<Vec<_>>();
    Ok((
        LabeledDataset::new(format!("{}-train", ds.name), collect(&units[..cut])),
        LabeledDataset::new(format!("{}-test", ds.name), collect(&units[cut..])),
    ))
}
