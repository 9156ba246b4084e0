//! Command-line front end.
//!
//! Exit codes: 0 success, 1 operational failure, 2 usage error.

mod manifest;

pub use manifest::{FailedItem, RunManifest, MANIFEST_FILE};

use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::cnn::{self, CnnError, CnnShape, MicroCnn, Tensor3, TrainConfig};
use crate::dft::log_magnitude_view;
use crate::enhance::{enhance, parse_bool, EnhanceConfig, EnhanceError, FilterKind};
use crate::image_io::{self, ImageIoError, Split};
use crate::metrics::{self, MetricsError, MetricsReport, PredictionRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Image(#[from] ImageIoError),
    #[error(transparent)]
    Enhance(#[from] EnhanceError),
    #[error(transparent)]
    Cnn(#[from] CnnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "spectra", version, about = "Frequency-domain MRI enhancement, a toy CNN and classification metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enhance one image and write the result as PNG.
    Enhance {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        flags: EnhanceFlags,
    },
    /// Enhance every image of a class-directory tree into a mirrored tree.
    Batch {
        input_root: PathBuf,
        output_root: PathBuf,
        #[command(flatten)]
        flags: EnhanceFlags,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Recorded in the run manifest; enhancement itself draws no randomness.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the centered log-magnitude spectrum of an image as PNG.
    Spectrum { input: PathBuf, output: PathBuf },
    /// Train the micro-CNN on `<root>/train` and predict `<root>/test`.
    TrainToy(TrainArgs),
    /// Score a prediction CSV and write a JSON report.
    Metrics { predictions: PathBuf, report: PathBuf },
}

/// Enhancement flags; each overrides the same key of `--config`.
#[derive(Debug, Clone, Default, Args)]
struct EnhanceFlags {
    /// Flat `key = value` file with enhancement settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ideal | gaussian | butterworth
    #[arg(long)]
    filter: Option<FilterKind>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    order: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "pre-smooth")]
    pre_smooth: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    brightness: Option<f64>,
    #[arg(long)]
    contrast: Option<f64>,
    #[arg(long, value_parser = bool_value)]
    equalize: Option<bool>,
}

fn bool_value(s: &str) -> Result<bool, String> {
    parse_bool(s).ok_or_else(|| format!("expected true or false, got `{s}`"))
}

impl EnhanceFlags {
    fn resolve(&self) -> Result<EnhanceConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => EnhanceConfig::load(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
            None => EnhanceConfig::default(),
        };
        if let Some(v) = self.filter {
            cfg.filter = v;
        }
        if let Some(v) = self.cutoff {
            cfg.cutoff = v;
        }
        if let Some(v) = self.order {
            cfg.order = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.pre_smooth {
            cfg.pre_smooth = v;
        }
        if let Some(v) = self.brightness {
            cfg.brightness = v;
        }
        if let Some(v) = self.contrast {
            cfg.contrast = v;
        }
        if let Some(v) = self.equalize {
            cfg.equalize = v;
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Dataset root holding `train/` and `test/`, each with the four class directories.
    root: PathBuf,
    /// Directory for model.txt, trace.csv, predictions.csv and the run manifest.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long = "batch-size", default_value_t = 8)]
    batch_size: usize,
    /// Side of the square network input; images are resized bilinearly.
    #[arg(long, default_value_t = 32)]
    size: usize,
    #[arg(long, default_value_t = 0.25)]
    dropout: f64,
    #[arg(long, default_value_t = 4)]
    conv1: usize,
    #[arg(long, default_value_t = 8)]
    conv2: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the enhancement chain on every image before resizing.
    #[arg(long)]
    enhance: bool,
    #[command(flatten)]
    flags: EnhanceFlags,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Enhance { input, output, flags } => cmd_enhance(&input, &output, &flags.resolve()?),
        Command::Batch {
            input_root,
            output_root,
            flags,
            jobs,
            seed,
        } => cmd_batch(&input_root, &output_root, &flags.resolve()?, jobs, seed).map(|_| ()),
        Command::Spectrum { input, output } => cmd_spectrum(&input, &output),
        Command::TrainToy(args) => cmd_train_toy(&args).map(|_| ()),
        Command::Metrics { predictions, report } => cmd_metrics(&predictions, &report).map(|_| ()),
    }
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(io_err(dir)),
        _ => Ok(()),
    }
}

pub fn cmd_enhance(input: &Path, output: &Path, cfg: &EnhanceConfig) -> Result<(), CliError> {
    let img = image_io::load_grayscale(input)?;
    let out = enhance(&img, cfg)?;
    ensure_parent(output)?;
    image_io::save_grayscale(&out, output)?;
    log::info!("enhanced {} -> {}", input.display(), output.display());
    Ok(())
}

pub fn cmd_spectrum(input: &Path, output: &Path) -> Result<(), CliError> {
    let img = image_io::load_grayscale(input)?;
    ensure_parent(output)?;
    image_io::save_grayscale(&log_magnitude_view(&img), output)?;
    Ok(())
}

/// Enhances a dataset tree with `jobs` workers.
///
/// Outputs keep their path relative to `input_root` with a `.png`
/// extension. Undecodable or failing images are logged and tallied; the
/// command fails only when nothing succeeds.
pub fn cmd_batch(
    input_root: &Path,
    output_root: &Path,
    cfg: &EnhanceConfig,
    jobs: usize,
    seed: u64,
) -> Result<RunManifest, CliError> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let start = Instant::now();
    let dataset = image_io::scan_dataset(input_root, Split::Train)?;
    let config = serde_json::to_value(cfg).expect("config serializes");
    let mut manifest = RunManifest::new("batch", config, seed, jobs);
    manifest.inputs.push(input_root.to_path_buf());
    manifest.outputs.push(output_root.to_path_buf());
    for skipped in &dataset.skipped {
        log::warn!("skipping {}: {}", skipped.path.display(), skipped.reason);
        manifest.record_failure(skipped.path.clone(), skipped.reason.clone());
    }

    let mut targets: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(dataset.entries.len());
    for entry in &dataset.entries {
        let rel = entry.path.strip_prefix(input_root).unwrap_or(&entry.path);
        let target = output_root.join(rel).with_extension("png");
        if targets.iter().any(|(_, t)| *t == target) {
            manifest.record_failure(entry.path.clone(), format!("output {} already claimed", target.display()));
            continue;
        }
        targets.push((entry.path.clone(), target));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Failed(format!("worker pool: {e}")))?;
    let results: Vec<Result<(), String>> = pool.install(|| {
        targets
            .par_iter()
            .map(|(src, dst)| {
                let out = image_io::load_grayscale(src)
                    .map_err(CliError::from)
                    .and_then(|img| Ok(enhance(&img, cfg)?))
                    .and_then(|img| {
                        ensure_parent(dst)?;
                        Ok(image_io::save_grayscale(&img, dst)?)
                    });
                out.map_err(|e| e.to_string())
            })
            .collect()
    });
    for ((src, _), result) in targets.iter().zip(results) {
        match result {
            Ok(()) => manifest.successes += 1,
            Err(reason) => {
                log::warn!("failed {}: {reason}", src.display());
                manifest.record_failure(src.clone(), reason);
            }
        }
    }
    manifest.failed.sort_by(|a, b| a.path.cmp(&b.path));
    manifest.set_duration(start.elapsed());
    if manifest.successes == 0 {
        return Err(CliError::Failed(format!("no image in {} was enhanced", input_root.display())));
    }
    fs::create_dir_all(output_root).map_err(io_err(output_root))?;
    manifest.write(output_root).map_err(io_err(output_root))?;
    log::info!("batch: {} ok, {} failed", manifest.successes, manifest.failures);
    Ok(manifest)
}

fn load_split(
    root: &Path,
    split: Split,
    size: usize,
    cfg: Option<&EnhanceConfig>,
) -> Result<Vec<(String, Tensor3, usize)>, CliError> {
    let dir = root.join(split.as_str());
    let dataset = image_io::scan_dataset(&dir, split)?;
    for skipped in &dataset.skipped {
        log::warn!("skipping {}: {}", skipped.path.display(), skipped.reason);
    }
    dataset
        .entries
        .iter()
        .map(|entry| {
            let mut img = image_io::load_grayscale(&entry.path)?;
            if let Some(cfg) = cfg {
                img = enhance(&img, cfg)?;
            }
            let img = img.resize_bilinear(size, size);
            let rel = entry.path.strip_prefix(root).unwrap_or(&entry.path);
            let id = rel.iter().map(|p| p.to_string_lossy()).collect::<Vec<_>>().join("/");
            Ok((id, Tensor3::from_grid(&img), entry.label.index()))
        })
        .collect()
}

/// Output files of `train-toy`.
#[derive(Clone, Debug)]
pub struct TrainOutputs {
    pub model: PathBuf,
    pub trace: PathBuf,
    pub predictions: PathBuf,
    pub manifest: RunManifest,
}

fn cmd_train_toy(args: &TrainArgs) -> Result<TrainOutputs, CliError> {
    let cfg = if args.enhance { Some(args.flags.resolve()?) } else { None };
    let train_cfg = TrainConfig {
        learning_rate: args.lr,
        epochs: args.epochs,
        batch_size: args.batch_size,
        seed: args.seed,
    };
    let shape = CnnShape {
        in_channels: 1,
        height: args.size,
        width: args.size,
        conv1_channels: args.conv1,
        conv2_channels: args.conv2,
    };
    train_toy(&args.root, &args.out, shape, args.dropout, &train_cfg, cfg.as_ref())
}

/// Trains on `<root>/train`, predicts `<root>/test` and writes model,
/// trace, predictions and manifest into `out`.
pub fn train_toy(
    root: &Path,
    out: &Path,
    shape: CnnShape,
    dropout: f64,
    train_cfg: &TrainConfig,
    enhance_cfg: Option<&EnhanceConfig>,
) -> Result<TrainOutputs, CliError> {
    if shape.height == 0 || shape.height % 4 != 0 || shape.width == 0 || shape.width % 4 != 0 {
        return Err(CliError::Usage(format!("--size must be a positive multiple of 4, got {}", shape.height)));
    }
    if train_cfg.batch_size == 0 {
        return Err(CliError::Usage("--batch-size must be at least 1".into()));
    }
    if !(train_cfg.learning_rate >= 0.0) || !train_cfg.learning_rate.is_finite() {
        return Err(CliError::Usage(format!("--lr must be finite and >= 0, got {}", train_cfg.learning_rate)));
    }
    if !(0.0..1.0).contains(&dropout) {
        return Err(CliError::Usage(format!("--dropout must be in [0, 1), got {dropout}")));
    }
    let start = Instant::now();
    let train_set = load_split(root, Split::Train, shape.height, enhance_cfg)?;
    let test_set = load_split(root, Split::Test, shape.height, enhance_cfg)?;

    let mut net = MicroCnn::new(shape, dropout, train_cfg.seed)?;
    let data: Vec<(Tensor3, usize)> = train_set.iter().map(|(_, x, y)| (x.clone(), *y)).collect();
    let trace = cnn::train(&mut net, &data, train_cfg)?;

    let mut predictions = Vec::with_capacity(test_set.len());
    for (id, x, y) in &test_set {
        let probs = net.predict(x)?;
        let scores = [probs[0], probs[1], probs[2], probs[3]];
        predictions.push(PredictionRecord {
            id: id.clone(),
            truth: image_io::ClassLabel::from_index(*y).expect("scanned label"),
            predicted: image_io::ClassLabel::from_index(metrics::argmax4(&scores)).expect("argmax < 4"),
            scores: Some(scores),
        });
    }

    fs::create_dir_all(out).map_err(io_err(out))?;
    let model_path = out.join("model.txt");
    cnn::save_model(&net, &model_path)?;
    let trace_path = out.join("trace.csv");
    let file = fs::File::create(&trace_path).map_err(io_err(&trace_path))?;
    cnn::write_trace_csv(&trace, file).map_err(|e| CliError::Failed(format!("{}: {e}", trace_path.display())))?;
    let pred_path = out.join("predictions.csv");
    let file = fs::File::create(&pred_path).map_err(io_err(&pred_path))?;
    metrics::write_predictions(&predictions, file)?;

    let config = serde_json::json!({
        "epochs": train_cfg.epochs,
        "learning_rate": train_cfg.learning_rate,
        "batch_size": train_cfg.batch_size,
        "input_size": shape.height,
        "conv1_channels": shape.conv1_channels,
        "conv2_channels": shape.conv2_channels,
        "dropout": dropout,
        "enhance": enhance_cfg,
    });
    let mut manifest = RunManifest::new("train-toy", config, train_cfg.seed, 1);
    manifest.inputs.push(root.to_path_buf());
    manifest.outputs = vec![model_path.clone(), trace_path.clone(), pred_path.clone()];
    manifest.successes = train_set.len() + test_set.len();
    manifest.set_duration(start.elapsed());
    manifest.write(out).map_err(io_err(out))?;
    if let Some(last) = trace.last() {
        log::info!("train-toy: epoch {} loss {:.6} accuracy {:.4}", last.epoch, last.loss, last.accuracy);
    }
    Ok(TrainOutputs {
        model: model_path,
        trace: trace_path,
        predictions: pred_path,
        manifest,
    })
}

pub fn cmd_metrics(predictions: &Path, report_path: &Path) -> Result<MetricsReport, CliError> {
    let records = metrics::read_predictions(predictions)?;
    let report = MetricsReport::from_records(&records)?;
    ensure_parent(report_path)?;
    metrics::write_report(&report, report_path)?;
    Ok(report)
}
