//! End-to-end protocols: the minority-weight sweep, the augmentation
//! comparison and the similarity table, plus config files and run directories.
//!
//! Every protocol splits the training set once with a seed derived from the
//! master seed, so all rows of a table are scored on identical data.

mod config;
mod protocols;
mod run_dir;

pub use config::{DatasetPaths, EncoderKind, ExperimentConfig, SelectionMetric, DEFAULT_SWEEP_WEIGHTS};
pub use protocols::{
    augmentation_comparison, build_encoder, comparison_csv, eval_model, format_comparison, format_similarity,
    format_sweep, run_augmentation_comparison, run_similarity_report, run_train, run_weight_sweep, select_best_weight,
    similarity_csv, similarity_report, split_train, sweep_csv, weight_sweep, AugmentationRow, ExperimentData,
    SimilarityRow, SweepResult, SweepRow, TrainOutcome,
};
pub use run_dir::{save_run, RunArtifacts, SNAPSHOT_FILE};
