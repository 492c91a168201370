//! Imbalanced sentence classification under train/test distribution shift.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`corpus_io`]: article / label / span files, tokenization, seeded splits
//! - [`divergence`]: corpus similarity via sampled word frequencies and the
//!   Wilcoxon signed-rank test
//! - [`augmentation`]: random oversampling, synonym replacement, random deletion
//! - [`features`]: sentence encoders (hashed n-grams, imported embeddings, concatenation)
//! - [`classifier`]: class-weighted softmax head and its training loop
//! - [`metrics`]: confusion-matrix reports
//! - [`experiments`]: the end-to-end protocols (weight sweep, augmentation
//!   comparison, similarity table) and run directories

pub mod augmentation;
pub mod classifier;
pub mod corpus_io;
pub mod divergence;
pub mod error;
pub mod experiments;
pub mod features;
pub mod metrics;
pub mod seed;

pub use augmentation::{AugmentationConfig, SynonymLexicon, Technique};
pub use classifier::{ClassWeights, ModelParams, TrainConfig};
pub use corpus_io::{Label, LabeledDataset, Sentence, SpanAnnotation, StopwordSet};
pub use divergence::{FrequencyTable, PairingUnit, SimilarityReport, WilcoxonMode, WilcoxonResult};
pub use error::{Error, Result};
pub use features::{Encoder, FeatureVector};
pub use metrics::{EvalReport, Scores};
