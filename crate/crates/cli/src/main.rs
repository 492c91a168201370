use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skewlens::experiments::{
    comparison_csv, eval_model, format_comparison, format_similarity, format_sweep, run_augmentation_comparison,
    run_similarity_report, run_train, run_weight_sweep, save_run, similarity_csv, split_train, sweep_csv,
    ExperimentConfig, ExperimentData, RunArtifacts,
};
use skewlens::metrics::{format_report, format_scores, scores_csv};
use skewlens::{Error, Label, ModelParams};

#[derive(Parser)]
#[command(
    name = "skewlens",
    version,
    about = "Imbalanced sentence classification under distribution shift"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wilcoxon similarity table: self-splits (50/50, 25/75) and cross-set pairs
    Similarity(Common),
    /// Split, augment, train once per seed, evaluate
    Train(Common),
    /// Minority class weight sweep on the in-domain and shifted sets
    Sweep(Common),
    /// Compare none / synonym / delete / oversample under identical splits
    AugmentCompare(Common),
    /// Score a saved model
    Eval(EvalArgs),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file
    #[arg(long)]
    config: PathBuf,
    /// Run directory [default: runs/<subcommand>]
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated training seeds
    #[arg(long)]
    seeds: Option<String>,
    /// Comma-separated minority class weights for `sweep`
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    minority_weight: Option<String>,
    /// none | oversample | synonym | delete
    #[arg(long)]
    augmentation: Option<String>,
    /// hashing | embedding | concat
    #[arg(long)]
    encoder: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    /// Any other config key, e.g. `--set alpha=0.01` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Model file written by `train`
    #[arg(long)]
    model: PathBuf,
    /// eval | test | train | in-domain (the held-out training split)
    #[arg(long, default_value = "eval")]
    on: String,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load_config(c: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&c.config).map_err(|e| Failure::Config(e.to_string()))?;
    let named = [
        ("seed", &c.seed),
        ("seeds", &c.seeds),
        ("sweep_weights", &c.weights),
        ("minority_weight", &c.minority_weight),
        ("augmentation", &c.augmentation),
        ("encoder", &c.encoder),
        ("epochs", &c.epochs),
    ];
    let mut overrides: Vec<(String, String)> = named
        .iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect();
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    for (k, v) in overrides {
        cfg.set(&k, &v, Path::new("."))
            .map_err(|e| Failure::Config(format!("override: {e}")))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_dir(c: &Common, name: &str) -> PathBuf {
    c.out.clone().unwrap_or_else(|| Path::new("runs").join(name))
}

fn finish(dir: &Path, artifacts: &RunArtifacts, human: &str) -> Result<(), Failure> {
    save_run(dir, artifacts)?;
    print!("{human}");
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let names = Label::CLASS_NAMES;
    match cli.command {
        Command::Similarity(c) => {
            let cfg = load_config(&c)?;
            let data = ExperimentData::load(&cfg)?;
            let rows = run_similarity_report(&cfg, &data)?;
            let human = format_similarity(&rows);
            let mut art = RunArtifacts::new(cfg.snapshot());
            art.add_file("similarity.csv", similarity_csv(&rows));
            art.add_file("similarity.txt", human.clone());
            finish(&run_dir(&c, "similarity"), &art, &human)
        }
        Command::Train(c) => {
            let cfg = load_config(&c)?;
            let data = ExperimentData::load(&cfg)?;
            let outcome = run_train(&cfg, &data)?;
            let mut art = RunArtifacts::new(cfg.snapshot());
            let mut human = format!("trained on {} sentences, seeds {:?}\n", outcome.train_size, cfg.seeds);
            for (name, report) in outcome.set_names.iter().zip(&outcome.run.reports) {
                human.push_str(&format!("\n== {name} (mean over seeds)\n"));
                human.push_str(&format_scores(&report.mean, &names));
                art.add_repeated(name, report);
            }
            for (seed, model) in cfg.seeds.iter().zip(&outcome.run.models) {
                art.add_model(format!("models/seed{seed}"), model.clone());
            }
            art.add_file("train.txt", human.clone());
            finish(&run_dir(&c, "train"), &art, &human)
        }
        Command::Sweep(c) => {
            let cfg = load_config(&c)?;
            let data = ExperimentData::load(&cfg)?;
            let result = run_weight_sweep(&cfg, &data)?;
            let human = format_sweep(&result);
            let mut art = RunArtifacts::new(cfg.snapshot());
            for row in &result.rows {
                art.add_repeated(&format!("w{}-in_domain", row.minority_weight), &row.in_domain);
                art.add_repeated(&format!("w{}-shifted", row.minority_weight), &row.shifted);
            }
            art.add_file("sweep.csv", sweep_csv(&result));
            art.add_file("sweep.txt", human.clone());
            finish(&run_dir(&c, "sweep"), &art, &human)
        }
        Command::AugmentCompare(c) => {
            let cfg = load_config(&c)?;
            let data = ExperimentData::load(&cfg)?;
            let rows = run_augmentation_comparison(&cfg, &data)?;
            let human = format_comparison(&rows);
            let mut art = RunArtifacts::new(cfg.snapshot());
            for row in &rows {
                art.add_repeated(&format!("{}-in_domain", row.technique), &row.in_domain);
                art.add_repeated(&format!("{}-shifted", row.technique), &row.shifted);
            }
            art.add_file("augmentation.csv", comparison_csv(&rows));
            art.add_file("augmentation.txt", human.clone());
            finish(&run_dir(&c, "augment-compare"), &art, &human)
        }
        Command::Eval(args) => {
            let cfg = load_config(&args.common)?;
            let data = ExperimentData::load(&cfg)?;
            let model = ModelParams::load(&args.model)?;
            let in_domain;
            let ds = match args.on.as_str() {
                "eval" => data.eval.as_ref(),
                "test" => data.test.as_ref(),
                "train" => Some(&data.train),
                "in-domain" => {
                    in_domain = split_train(&cfg, &data)?.1;
                    Some(&in_domain)
                }
                other => {
                    return Err(Failure::Config(format!(
                        "--on {other:?}: expected eval|test|train|in-domain"
                    )))
                }
            }
            .ok_or_else(|| Failure::Config(format!("no `{}` dataset configured", args.on)))?;
            let report = eval_model(&model, ds, data.encoder.as_ref())?;
            let human = format_report(&report, &names);
            let mut art = RunArtifacts::new(cfg.snapshot());
            art.add_file("eval.txt", human.clone());
            art.add_file("eval.csv", scores_csv(&report.scores, &names));
            finish(&run_dir(&args.common, "eval"), &art, &human)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("skewlens: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("skewlens: {m}");
            ExitCode::from(1)
        }
    }
}
