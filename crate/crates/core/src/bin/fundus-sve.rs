use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use fundus_sve::dataset::{load_manifest, summarize_distribution, Split};
use fundus_sve::pipeline::{
    cmd_augment, cmd_enhance, cmd_evaluate, cmd_features, cmd_features_import, cmd_manifest_init, cmd_pipeline,
    cmd_predict, cmd_split, cmd_train, log_path_for, predictions_path_for, with_jobs, Categorize, PipelineError,
    PipelineOptions, RunConfig, StageOutcome,
};

/// Vessel-mask guided enhancement and classification of fundus images.
///
/// Exit codes: 0 success, 2 usage error, 3 input error, 4 numeric or
/// degenerate result.
#[derive(Parser)]
#[command(name = "fundus-sve", version)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for every stochastic stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print what would run without writing anything.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assign a stratified train/val/test split.
    Split {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Three ratios, e.g. 0.6,0.2,0.2.
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
    },
    /// Enhance every image with its vessel mask.
    Enhance {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        sve: SveArgs,
    },
    /// Balance classes with derived images.
    Augment {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        aug: AugmentArgs,
    },
    /// Extract HOG or LBP feature tables, or import an external table.
    Features(FeaturesArgs),
    /// Fit a classifier on a feature table.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Score a feature table with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Metrics, confusion matrix and ROC curves for a score file.
    Evaluate {
        #[arg(long)]
        scores: PathBuf,
        /// Hard decisions; defaults to the file `predict` wrote beside the scores.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Manifest helpers.
    #[command(subcommand)]
    Manifest(ManifestCommand),
    /// Run every stage end to end.
    Pipeline {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-run stages that are already up to date.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        sve: SveArgs,
        #[command(flatten)]
        aug: AugmentArgs,
        /// Skip augmentation.
        #[arg(long)]
        no_augment: bool,
        #[arg(long)]
        descriptor: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Subcommand)]
enum ManifestCommand {
    /// Build a manifest from an image directory and a `<stem> <label>` list.
    Init {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        masks: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a manifest and print its per-split class counts.
    Check {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        check_files: bool,
    },
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct FeaturesArgs {
    #[command(subcommand)]
    import: Option<FeaturesCommand>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// hog or lbp.
    #[arg(long)]
    descriptor: Option<String>,
    /// Square resize side; 0 keeps the native size.
    #[arg(long)]
    resize: Option<usize>,
    /// Descriptor parameters, e.g. radius=2 or cell_size=16,bins=12.
    #[arg(long, value_delimiter = ',')]
    params: Vec<String>,
}

#[derive(Subcommand)]
enum FeaturesCommand {
    /// Validate an external feature CSV and rewrite it canonically.
    Import {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SveArgs {
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct AugmentArgs {
    /// Samples per class after balancing.
    #[arg(long)]
    target: Option<usize>,
    /// Rotation cycle in degrees, e.g. 5,-5,90.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    angles: Option<Vec<f64>>,
    /// Splits to augment, e.g. train or train,val,test.
    #[arg(long, value_delimiter = ',')]
    augment_splits: Option<Vec<String>>,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    allow_undershoot: bool,
}

#[derive(Args)]
struct ModelArgs {
    /// knn, mlp, logreg or lda.
    #[arg(long = "model", id = "model_kind")]
    kind: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    ridge: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    no_standardize: bool,
}

#[derive(Default)]
struct Overrides(Map<String, Value>);

impl Overrides {
    fn set(&mut self, key: &str, value: Option<impl Into<Value>>) {
        if let Some(v) = value {
            self.0.insert(key.to_string(), v.into());
        }
    }

    fn path(&mut self, key: &str, value: Option<&PathBuf>) {
        self.set(key, value.map(|p| p.to_string_lossy().into_owned()));
    }

    fn sve(&mut self, a: &SveArgs) {
        self.set("strategy", a.strategy.clone());
        self.set("weight", a.weight);
        self.set("gamma", a.gamma);
    }

    fn augment(&mut self, a: &AugmentArgs) {
        self.set("augment_target", a.target);
        self.set("augment_angles", a.angles.clone());
        self.set("augment_splits", a.augment_splits.clone());
        self.set("augment_noise_std", a.noise_std);
        if a.allow_undershoot {
            self.set("allow_undershoot", Some(true));
        }
    }

    fn model(&mut self, a: &ModelArgs) {
        self.set("model", a.kind.clone());
        self.set("k", a.k);
        self.set("hidden", a.hidden);
        self.set("learning_rate", a.learning_rate);
        self.set("epochs", a.epochs);
        self.set("l2", a.l2);
        self.set("ridge", a.ridge);
        self.set("batch_size", a.batch_size);
        if a.no_standardize {
            self.set("standardize", Some(false));
        }
    }
}

fn load_config(cli: &Cli, mut o: Overrides) -> Result<RunConfig, PipelineError> {
    o.set("seed", cli.seed);
    o.set("jobs", cli.jobs);
    let cfg = RunConfig::load(cli.config.as_deref(), o.0)?;
    for w in cfg.validate()? {
        log::warn!("{w}");
    }
    Ok(cfg)
}

fn manifest_of(cfg: &RunConfig) -> Result<PathBuf, PipelineError> {
    cfg.manifest
        .clone()
        .ok_or_else(|| PipelineError::usage("--manifest is required (or `manifest` in the config)"))
}

fn print_outcome(o: &StageOutcome) {
    if o.skipped {
        log::info!("{}: reused up-to-date results", o.stage);
    }
    for a in &o.artifacts {
        println!("{}", a.display());
    }
    println!("{}", o.log.display());
}

fn dry(stage: &str, inputs: &[&Path], outputs: &[PathBuf]) {
    let list = |v: Vec<String>| v.join(", ");
    println!(
        "would run {stage}: {} -> {}",
        list(inputs.iter().map(|p| p.display().to_string()).collect()),
        list(outputs.iter().map(|p| p.display().to_string()).collect())
    );
}

fn parse_param(raw: &str, prefix: &str) -> Result<(String, Value), PipelineError> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| PipelineError::usage(format!("--params entry {raw:?} is not key=value")))?;
    let value = serde_json::from_str(v.trim()).unwrap_or_else(|_| Value::String(v.trim().to_string()));
    Ok((format!("{prefix}_{}", k.trim()), value))
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    match &cli.command {
        Command::Split { manifest, out, ratios } => {
            let mut o = Overrides::default();
            o.path("manifest", manifest.as_ref());
            o.set("split_ratios", ratios.clone());
            let cfg = load_config(cli, o)?;
            let m = manifest_of(&cfg)?;
            if cli.dry_run {
                dry("split", &[&m], &[out.join("manifest.csv")]);
                return Ok(());
            }
            print_outcome(&with_jobs(cfg.jobs, || cmd_split(&cfg, &m, out))??);
        }
        Command::Enhance { manifest, out, sve } => {
            let mut o = Overrides::default();
            o.path("manifest", manifest.as_ref());
            o.sve(sve);
            let cfg = load_config(cli, o)?;
            let m = manifest_of(&cfg)?;
            if cli.dry_run {
                dry("enhance", &[&m], &[out.join("images"), out.join("manifest.csv")]);
                return Ok(());
            }
            print_outcome(&with_jobs(cfg.jobs, || cmd_enhance(&cfg, &m, out))??);
        }
        Command::Augment { manifest, out, aug } => {
            let mut o = Overrides::default();
            o.path("manifest", manifest.as_ref());
            o.augment(aug);
            let cfg = load_config(cli, o)?;
            let m = manifest_of(&cfg)?;
            if cli.dry_run {
                dry(
                    "augment",
                    &[&m],
                    &[out.join("images"), out.join("plan.json"), out.join("manifest.csv")],
                );
                return Ok(());
            }
            print_outcome(&with_jobs(cfg.jobs, || cmd_augment(&cfg, &m, out))??);
        }
        Command::Features(args) => {
            if let Some(FeaturesCommand::Import { csv, out }) = &args.import {
                if cli.dry_run {
                    dry("features import", &[csv], std::slice::from_ref(out));
                    return Ok(());
                }
                print_outcome(&cmd_features_import(csv, out)?);
                return Ok(());
            }
            let out = args
                .out
                .as_ref()
                .ok_or_else(|| PipelineError::usage("--out is required"))?;
            let mut o = Overrides::default();
            o.path("manifest", args.manifest.as_ref());
            o.set("descriptor", args.descriptor.clone());
            o.set("resize", args.resize);
            let prefix = args.descriptor.clone().map_or_else(
                || {
                    RunConfig::load(cli.config.as_deref(), Map::new())
                        .map(|c| serde_json::to_value(c.descriptor).expect("descriptor serialises"))
                        .map(|v| v.as_str().unwrap_or("lbp").to_string())
                },
                Ok,
            )?;
            for p in &args.params {
                let (k, v) = parse_param(p, &prefix)?;
                o.0.insert(k, v);
            }
            let cfg = load_config(cli, o)?;
            let m = manifest_of(&cfg)?;
            if cli.dry_run {
                let outputs: Vec<PathBuf> = Split::ASSIGNED.iter().map(|s| out.join(format!("{s}.csv"))).collect();
                dry("features", &[&m], &outputs);
                return Ok(());
            }
            print_outcome(&with_jobs(cfg.jobs, || cmd_features(&cfg, &m, out))??);
        }
        Command::Train { features, out, model } => {
            let mut o = Overrides::default();
            o.model(model);
            let cfg = load_config(cli, o)?;
            if cli.dry_run {
                dry("train", &[features], &[out.clone(), log_path_for(out)]);
                return Ok(());
            }
            print_outcome(&with_jobs(cfg.jobs, || cmd_train(&cfg, features, out))??);
        }
        Command::Predict { model, features, out } => {
            let cfg = load_config(cli, Overrides::default())?;
            if cli.dry_run {
                dry("predict", &[model, features], &[out.clone(), predictions_path_for(out)]);
                return Ok(());
            }
            print_outcome(&with_jobs(cfg.jobs, || cmd_predict(model, features, out))??);
        }
        Command::Evaluate { scores, predictions, out } => {
            if cli.dry_run {
                dry("evaluate", &[scores], &[out.join("report.json"), out.join("confusion.csv")]);
                return Ok(());
            }
            print_outcome(&cmd_evaluate(scores, predictions.as_deref(), out)?);
        }
        Command::Manifest(ManifestCommand::Init {
            images,
            labels,
            masks,
            out,
        }) => {
            if cli.dry_run {
                dry("manifest init", &[images, labels], std::slice::from_ref(out));
                return Ok(());
            }
            print_outcome(&cmd_manifest_init(images, labels, masks.as_deref(), out)?);
        }
        Command::Manifest(ManifestCommand::Check { manifest, check_files }) => {
            let m = load_manifest(manifest, *check_files).map_err(|e| e.into_pipeline(manifest.display().to_string()))?;
            let d = summarize_distribution(&m).map_err(|e| e.into_pipeline(manifest.display().to_string()))?;
            println!("{}", serde_json::to_string_pretty(&json!({ "samples": d.total(), "counts": d.counts })).expect("counts serialise"));
        }
        Command::Pipeline {
            manifest,
            out,
            force,
            sve,
            aug,
            no_augment,
            descriptor,
            model,
        } => {
            let mut o = Overrides::default();
            o.path("manifest", manifest.as_ref());
            o.path("out_dir", out.as_ref());
            o.sve(sve);
            o.augment(aug);
            if *no_augment {
                o.set("augment", Some(false));
            }
            o.set("descriptor", descriptor.clone());
            o.model(model);
            o.set("seed", cli.seed);
            o.set("jobs", cli.jobs);
            let cfg = RunConfig::load(cli.config.as_deref(), o.0)?;
            let outcome = cmd_pipeline(
                &cfg,
                PipelineOptions {
                    force: *force,
                    dry_run: cli.dry_run,
                },
            )?;
            if cli.dry_run {
                for s in &outcome.plan {
                    println!("would run {s}");
                }
            }
            for s in &outcome.stages {
                print_outcome(s);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
