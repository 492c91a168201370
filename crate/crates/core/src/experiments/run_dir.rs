use std::collections::BTreeMap;
use std::path::Path;

use crate::classifier::{ModelParams, RepeatedReport};
use crate::corpus_io::Label;
use crate::error::{Error, Result};
use crate::metrics::{format_report, format_scores, scores_csv};

/// File name of the config snapshot inside a run directory.
pub const SNAPSHOT_FILE: &str = "config.snapshot";

/// Everything a run writes, keyed by path relative to the run directory.
#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    pub config_snapshot: String,
    pub files: BTreeMap<String, String>,
    pub models: BTreeMap<String, ModelParams>,
}

impl RunArtifacts {
    pub fn new(config_snapshot: String) -> Self {
        RunArtifacts {
            config_snapshot,
            ..Default::default()
        }
    }

    pub fn add_file(&mut self, name: impl Into<String>, content: impl Into<String>) {
        self.files.insert(name.into(), content.into());
    }

    pub fn add_model(&mut self, name: impl Into<String>, model: ModelParams) {
        self.models.insert(name.into(), model);
    }

    /// Per-seed report tables plus the seed-averaged scores, under `reports/`.
    pub fn add_repeated(&mut self, prefix: &str, report: &RepeatedReport) {
        let names = Label::CLASS_NAMES;
        for (seed, r) in report.seeds.iter().zip(&report.per_seed) {
            self.add_file(format!("reports/{prefix}-seed{seed}.txt"), format_report(r, &names));
        }
        self.add_file(
            format!("reports/{prefix}-mean.txt"),
            format_scores(&report.mean, &names),
        );
        self.add_file(format!("reports/{prefix}-mean.csv"), scores_csv(&report.mean, &names));
    }
}

fn write(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Writes the snapshot, every file and every model (as `<name>.model`) under
/// `dir`, creating directories as needed.
pub fn save_run(dir: &Path, artifacts: &RunArtifacts) -> Result<()> {
    write(&dir.join(SNAPSHOT_FILE), &artifacts.config_snapshot)?;
    for (name, content) in &artifacts.files {
        write(&dir.join(name), content)?;
    }
    for (name, model) in &artifacts.models {
        write(&dir.join(format!("{name}.model")), &model.to_model_text())?;
    }
    Ok(())
}
