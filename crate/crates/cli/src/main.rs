//! genomotif — circular color-motif encoding, SUSAN edge filtering, and
//! region classification for viral RNA sequences.
//!
//! Subcommands cover the full pipeline: `ingest` quality-gates a FASTA
//! against metadata labels, `rasterize` paints one sequence as a motif PNG,
//! `filter` runs the SUSAN detector over a PNG, `build-dataset` packs
//! labeled edge maps into a GMD1 file, `train` fits the classifier and
//! writes GMNN checkpoints, `evaluate` scores a checkpoint against a
//! dataset, `predict` prints per-region probabilities for new sequences,
//! and `report` renders a saved metrics file as text.
//!
//! Configuration resolves flag → config file (`--config key=value lines`) →
//! environment (`GENOMOTIF_THREADS`, threads only) → built-in default, and
//! every run that writes files also writes a JSON manifest recording the
//! resolved configuration and SHA-256 digests of its inputs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or I/O error.

mod manifest;
mod settings;

use std::error::Error;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use genomotif_core::nn::load_checkpoint;
use genomotif_core::pipeline::{
    build_dataset, evaluate, predict_one, render_report, train, write_history_csv,
    write_metrics_json, write_roc_csv, BuildOptions, Dataset, DatasetManifest,
};
use genomotif_core::rasterizer::png_io::{read_png, write_gray_png, write_motif_png};
use genomotif_core::rasterizer::rasterize;
use genomotif_core::seqio::{
    parse_fasta, parse_metadata, quality_filter, write_fasta, QualityVerdict, RejectReason,
    SequenceRecord,
};
use genomotif_core::susan::{susan_edges, to_grayscale, OutputMode, Similarity};
use genomotif_core::{
    FillMode, MetricsReport, MotifGeometry, MotifImage, QualityConfig, Region, SusanParams,
    TrainConfig,
};

use manifest::{default_manifest_path, RunManifest};
use settings::Settings;

type CliResult = Result<(), Box<dyn Error>>;

#[derive(Parser)]
#[command(
    name = "genomotif",
    version,
    about = "Encode RNA sequences as color motifs and classify them by region"
)]
struct Cli {
    /// Config file with key=value defaults (flags take precedence)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: GENOMOTIF_THREADS, then all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Run-manifest path (default: <primary output>.run.json)
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quality-gate a FASTA against metadata labels and write the survivors
    Ingest(IngestArgs),
    /// Paint one sequence as a circular color-motif PNG
    Rasterize(RasterizeArgs),
    /// Run the SUSAN edge detector over a PNG
    Filter(FilterArgs),
    /// Encode labeled sequences into a GMD1 dataset
    BuildDataset(BuildDatasetArgs),
    /// Train the region classifier on a GMD1 dataset
    Train(TrainArgs),
    /// Score a checkpoint against a GMD1 dataset
    Evaluate(EvaluateArgs),
    /// Print per-region probabilities for each sequence in a FASTA
    Predict(PredictArgs),
    /// Render a saved metrics JSON as a text table
    Report(ReportArgs),
}

/// Motif canvas shape, shared by every command that paints sequences.
#[derive(Args)]
struct GeometryOpts {
    /// Canvas side length in pixels [default: 200]
    #[arg(long, value_name = "PX")]
    size: Option<u32>,

    /// Pixel fill order: rings | disk [default: rings]
    #[arg(long, value_name = "MODE")]
    fill: Option<String>,
}

/// SUSAN detector knobs, shared by every command that filters motifs.
#[derive(Args)]
struct SusanOpts {
    /// Brightness threshold t [default: 27]
    #[arg(long, value_name = "T")]
    threshold: Option<f64>,

    /// Output mode: graded | binary [default: graded]
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,

    /// Similarity function: smooth | hard [default: smooth]
    #[arg(long, value_name = "FN")]
    similarity: Option<String>,
}

/// Sequence quality gate, shared by ingest, build-dataset, and predict.
#[derive(Args)]
struct QualityOpts {
    /// Minimum sequence length in bases [default: 29000]
    #[arg(long, value_name = "N")]
    min_length: Option<usize>,

    /// Maximum tolerated fraction of ambiguous bases [default: 0.05]
    #[arg(long, value_name = "F")]
    max_ambiguous: Option<f64>,
}

#[derive(Args)]
struct IngestArgs {
    /// Input FASTA
    #[arg(long, value_name = "FILE")]
    fasta: PathBuf,

    /// Metadata CSV (accession,region,location,date)
    #[arg(long, value_name = "FILE")]
    metadata: PathBuf,

    /// Cleaned FASTA to write
    #[arg(long, value_name = "FILE")]
    output: PathBuf,

    #[command(flatten)]
    quality: QualityOpts,
}

#[derive(Args)]
struct RasterizeArgs {
    /// Input FASTA
    #[arg(long, value_name = "FILE")]
    fasta: PathBuf,

    /// Record to paint (default: the first record)
    #[arg(long, value_name = "ID")]
    accession: Option<String>,

    /// Motif PNG to write
    #[arg(long, value_name = "FILE")]
    output: PathBuf,

    #[command(flatten)]
    geometry: GeometryOpts,
}

#[derive(Args)]
struct FilterArgs {
    /// Input PNG (RGB or grayscale)
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// Edge-response PNG to write (grayscale)
    #[arg(long, value_name = "FILE")]
    output: PathBuf,

    #[command(flatten)]
    susan: SusanOpts,
}

#[derive(Args)]
struct BuildDatasetArgs {
    /// Input FASTA
    #[arg(long, value_name = "FILE")]
    fasta: PathBuf,

    /// Metadata CSV (accession,region,location,date)
    #[arg(long, value_name = "FILE")]
    metadata: PathBuf,

    /// GMD1 dataset to write
    #[arg(long, value_name = "FILE")]
    output: PathBuf,

    /// Dataset summary JSON (default: <output>.json)
    #[arg(long, value_name = "FILE")]
    summary: Option<PathBuf>,

    #[command(flatten)]
    geometry: GeometryOpts,

    #[command(flatten)]
    susan: SusanOpts,

    #[command(flatten)]
    quality: QualityOpts,
}

#[derive(Args)]
struct TrainArgs {
    /// GMD1 dataset to train on
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,

    /// Best-model GMNN checkpoint to write
    #[arg(long, value_name = "FILE")]
    output: PathBuf,

    /// Per-epoch history CSV (default: <output>.history.csv)
    #[arg(long, value_name = "FILE")]
    history: Option<PathBuf>,

    /// Last-epoch snapshot, overwritten every epoch; the resume point
    #[arg(long, value_name = "FILE")]
    snapshot: Option<PathBuf>,

    /// Continue a run from a snapshot or checkpoint
    #[arg(long, value_name = "FILE")]
    resume: Option<PathBuf>,

    /// Total epochs, counting any resumed ones [default: 10]
    #[arg(long, value_name = "N")]
    epochs: Option<usize>,

    /// Minibatch size [default: 32]
    #[arg(long, value_name = "N")]
    batch_size: Option<usize>,

    /// RMSProp learning rate [default: 0.001]
    #[arg(long, value_name = "F")]
    learning_rate: Option<f64>,

    /// Seed for every random stream in the run [default: 0]
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Fraction of each class held out for validation [default: 0.2]
    #[arg(long, value_name = "F")]
    validation_fraction: Option<f64>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// GMD1 dataset to score
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,

    /// GMNN checkpoint to load
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,

    /// Metrics JSON to write (default: <dataset>.metrics.json)
    #[arg(long, value_name = "FILE")]
    metrics: Option<PathBuf>,

    /// ROC points CSV to write (default: <dataset>.roc.csv)
    #[arg(long, value_name = "FILE")]
    roc: Option<PathBuf>,

    /// Forward-pass batch size [default: 32]
    #[arg(long, value_name = "N")]
    batch_size: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    /// Input FASTA
    #[arg(long, value_name = "FILE")]
    fasta: PathBuf,

    /// GMNN checkpoint to load (fixes the motif canvas size)
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,

    /// Pixel fill order: rings | disk [default: rings]
    #[arg(long, value_name = "MODE")]
    fill: Option<String>,

    #[command(flatten)]
    susan: SusanOpts,

    #[command(flatten)]
    quality: QualityOpts,
}

#[derive(Args)]
struct ReportArgs {
    /// Metrics JSON written by evaluate
    #[arg(long, value_name = "FILE")]
    metrics: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };

    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> CliResult {
    let mut settings = Settings::load(cli.config.as_deref())?;
    if let Some(n) = settings.threads(cli.threads)? {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }

    match cli.command {
        Command::Ingest(args) => cmd_ingest(args, &mut settings, cli.manifest),
        Command::Rasterize(args) => cmd_rasterize(args, &mut settings, cli.manifest),
        Command::Filter(args) => cmd_filter(args, &mut settings, cli.manifest),
        Command::BuildDataset(args) => cmd_build_dataset(args, &mut settings, cli.manifest),
        Command::Train(args) => cmd_train(args, &mut settings, cli.manifest),
        Command::Evaluate(args) => cmd_evaluate(args, &mut settings, cli.manifest),
        Command::Predict(args) => cmd_predict(args, &mut settings, cli.manifest),
        Command::Report(args) => cmd_report(args),
    }
}

// ---- option resolution ----------------------------------------------------

fn parse_fill(raw: &str) -> Result<FillMode, Box<dyn Error>> {
    Ok(raw.parse::<FillMode>()?)
}

fn parse_output_mode(raw: &str) -> Result<OutputMode, Box<dyn Error>> {
    match raw.to_ascii_lowercase().as_str() {
        "graded" => Ok(OutputMode::Graded),
        "binary" => Ok(OutputMode::Binary),
        other => Err(format!("unknown output mode {other:?} (expected graded|binary)").into()),
    }
}

fn parse_similarity(raw: &str) -> Result<Similarity, Box<dyn Error>> {
    match raw.to_ascii_lowercase().as_str() {
        "smooth" => Ok(Similarity::Smooth),
        "hard" => Ok(Similarity::Hard),
        other => Err(format!("unknown similarity {other:?} (expected smooth|hard)").into()),
    }
}

fn resolve_geometry(
    settings: &mut Settings,
    opts: GeometryOpts,
) -> Result<MotifGeometry, Box<dyn Error>> {
    let size = settings.get("size", opts.size, 200u32)?;
    let fill = parse_fill(&settings.get("fill", opts.fill, "rings".to_string())?)?;
    Ok(MotifGeometry::square(size, fill)?)
}

/// Canvas fixed by a checkpoint: only the fill order is tunable.
fn resolve_fill_geometry(
    settings: &mut Settings,
    fill: Option<String>,
    size: u32,
) -> Result<MotifGeometry, Box<dyn Error>> {
    let fill = parse_fill(&settings.get("fill", fill, "rings".to_string())?)?;
    Ok(MotifGeometry::square(size, fill)?)
}

fn resolve_susan(settings: &mut Settings, opts: SusanOpts) -> Result<SusanParams, Box<dyn Error>> {
    let params = SusanParams {
        brightness_threshold: settings.get("threshold", opts.threshold, 27.0)?,
        output_mode: parse_output_mode(&settings.get("mode", opts.mode, "graded".to_string())?)?,
        similarity: parse_similarity(&settings.get(
            "similarity",
            opts.similarity,
            "smooth".to_string(),
        )?)?,
        ..SusanParams::default()
    };
    params.validate()?;
    Ok(params)
}

fn resolve_quality(
    settings: &mut Settings,
    opts: QualityOpts,
) -> Result<QualityConfig, Box<dyn Error>> {
    let min_length = settings.get("min_length", opts.min_length, 29_000usize)?;
    let max_ambiguous = settings.get("max_ambiguous", opts.max_ambiguous, 0.05)?;
    Ok(QualityConfig::new(min_length, max_ambiguous)?)
}

// ---- shared I/O helpers ----------------------------------------------------

fn read_fasta_file(path: &Path) -> Result<Vec<SequenceRecord>, Box<dyn Error>> {
    let records = parse_fasta(BufReader::new(File::open(path)?))?;
    if records.is_empty() {
        return Err(format!("{}: no FASTA records", path.display()).into());
    }
    Ok(records)
}

/// Writes the run manifest for a command that produced `artifacts` from
/// `inputs`. The path is `override_path`, else `<primary>.run.json`, else
/// (no primary output) the manifest is skipped entirely.
fn write_run_manifest(
    command: &str,
    settings: &Settings,
    inputs: &[&Path],
    artifacts: &[&Path],
    primary: Option<&Path>,
    override_path: Option<PathBuf>,
) -> CliResult {
    let Some(path) = override_path.or_else(|| primary.map(default_manifest_path)) else {
        return Ok(());
    };
    let mut run = RunManifest::new(command, settings.resolved());
    for input in inputs {
        run.add_input(input)?;
    }
    for artifact in artifacts {
        run.add_artifact(artifact);
    }
    run.write(&path)?;
    log::info!("run manifest: {}", path.display());
    Ok(())
}

/// `<path>` with `suffix` appended to the file name.
fn derived_path(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

// ---- commands ---------------------------------------------------------------

fn cmd_ingest(args: IngestArgs, settings: &mut Settings, manifest: Option<PathBuf>) -> CliResult {
    let quality = resolve_quality(settings, args.quality)?;
    let records = read_fasta_file(&args.fasta)?;
    let metadata = parse_metadata(File::open(&args.metadata)?)?;

    let mut kept = Vec::new();
    let (mut unlabeled, mut short, mut ambiguous) = (0usize, 0usize, 0usize);
    for record in records.iter() {
        if !metadata.contains_key(&record.accession) {
            log::warn!("{}: no metadata entry, dropped", record.accession);
            unlabeled += 1;
            continue;
        }
        match quality_filter(record, &quality) {
            QualityVerdict::Accept => kept.push(record.clone()),
            QualityVerdict::Reject(RejectReason::TooShort { length, min }) => {
                log::info!("{}: too short ({length} < {min})", record.accession);
                short += 1;
            }
            QualityVerdict::Reject(RejectReason::TooAmbiguous { fraction, max }) => {
                log::info!("{}: too ambiguous ({fraction:.4} >= {max})", record.accession);
                ambiguous += 1;
            }
        }
    }

    let mut writer = BufWriter::new(File::create(&args.output)?);
    write_fasta(&mut writer, &kept, 0)?;
    writer.flush()?;

    println!(
        "kept {} of {} records ({unlabeled} unlabeled, {short} short, {ambiguous} ambiguous)",
        kept.len(),
        records.len()
    );
    write_run_manifest(
        "ingest",
        settings,
        &[&args.fasta, &args.metadata],
        &[&args.output],
        Some(&args.output),
        manifest,
    )
}

fn cmd_rasterize(
    args: RasterizeArgs,
    settings: &mut Settings,
    manifest: Option<PathBuf>,
) -> CliResult {
    let geometry = resolve_geometry(settings, args.geometry)?;
    let records = read_fasta_file(&args.fasta)?;
    let record = match &args.accession {
        Some(id) => records
            .iter()
            .find(|r| &r.accession == id)
            .ok_or_else(|| format!("{}: accession {id:?} not found", args.fasta.display()))?,
        None => &records[0],
    };

    let motif = rasterize(&record.bases, &geometry, &record.accession);
    write_motif_png(&args.output, &motif.image)?;

    println!(
        "{}: {}x{} motif, {} of {} bases painted",
        record.accession,
        geometry.width,
        geometry.height,
        record.bases.len() - motif.truncated,
        record.bases.len()
    );
    write_run_manifest(
        "rasterize",
        settings,
        &[&args.fasta],
        &[&args.output],
        Some(&args.output),
        manifest,
    )
}

fn cmd_filter(args: FilterArgs, settings: &mut Settings, manifest: Option<PathBuf>) -> CliResult {
    let params = resolve_susan(settings, args.susan)?;
    let decoded = read_png(&args.input)?;
    let name = args
        .input
        .file_stem()
        .map_or_else(|| "input".to_string(), |s| s.to_string_lossy().into_owned());
    let image = MotifImage::from_rgb_bytes(decoded.width, decoded.height, decoded.to_rgb(), &name)
        .ok_or("decoded pixel count disagrees with image dimensions")?;

    let filtered = susan_edges(&to_grayscale(&image), &params);
    write_gray_png(&args.output, filtered.width(), filtered.height(), filtered.pixels())?;

    println!(
        "{}: {}x{} edge response written to {}",
        name,
        filtered.width(),
        filtered.height(),
        args.output.display()
    );
    write_run_manifest(
        "filter",
        settings,
        &[&args.input],
        &[&args.output],
        Some(&args.output),
        manifest,
    )
}

fn cmd_build_dataset(
    args: BuildDatasetArgs,
    settings: &mut Settings,
    manifest: Option<PathBuf>,
) -> CliResult {
    let options = BuildOptions {
        geometry: resolve_geometry(settings, args.geometry)?,
        susan: resolve_susan(settings, args.susan)?,
        quality: resolve_quality(settings, args.quality)?,
    };
    let records = read_fasta_file(&args.fasta)?;
    let metadata = parse_metadata(File::open(&args.metadata)?)?;

    let (dataset, stats) = build_dataset(&records, &metadata, &options)?;
    dataset.write_gmd1(&args.output)?;

    let summary = DatasetManifest::new(&dataset, stats);
    let summary_path = args
        .summary
        .unwrap_or_else(|| derived_path(&args.output, ".json"));
    let mut writer = BufWriter::new(File::create(&summary_path)?);
    serde_json::to_writer_pretty(&mut writer, &summary)?;
    writer.write_all(b"\n")?;
    writer.flush()?;

    let regions = summary
        .per_region
        .iter()
        .map(|(code, count)| format!("{code} {count}"))
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "{} samples ({regions}); {} short, {} ambiguous, {} truncated",
        summary.samples, stats.rejected_short, stats.rejected_ambiguous, stats.truncated
    );
    write_run_manifest(
        "build-dataset",
        settings,
        &[&args.fasta, &args.metadata],
        &[&args.output, &summary_path],
        Some(&args.output),
        manifest,
    )
}

fn cmd_train(args: TrainArgs, settings: &mut Settings, manifest: Option<PathBuf>) -> CliResult {
    let cfg = TrainConfig {
        epochs: settings.get("epochs", args.epochs, 10)?,
        batch_size: settings.get("batch_size", args.batch_size, 32)?,
        learning_rate: settings.get("learning_rate", args.learning_rate, 0.001)?,
        seed: settings.get("seed", args.seed, 0)?,
        validation_fraction: settings.get(
            "validation_fraction",
            args.validation_fraction,
            0.2,
        )?,
        checkpoint_path: Some(args.output.clone()),
        snapshot_path: args.snapshot.clone(),
        ..TrainConfig::default()
    };

    let dataset = Dataset::read_gmd1(&args.dataset)?;
    let spec = genomotif_core::nn::NetworkSpec::mini(
        dataset.channels as usize,
        dataset.height as usize,
        dataset.width as usize,
        Region::COUNT,
    );
    log::info!(
        "training on {} samples of {}x{}x{}",
        dataset.len(),
        dataset.channels,
        dataset.height,
        dataset.width
    );

    let outcome = train::<f32>(&dataset, spec, &cfg, args.resume.as_deref())?;

    for row in &outcome.history {
        println!(
            "epoch {}: train loss {:.4} acc {:.4} | val loss {:.4} acc {:.4}",
            row.epoch, row.train_loss, row.train_acc, row.val_loss, row.val_acc
        );
    }
    match outcome.best_epoch {
        Some(epoch) => println!(
            "best validation accuracy {:.4} at epoch {epoch}; checkpoint {}",
            outcome.best_val_acc,
            args.output.display()
        ),
        None => println!("no improvement this run; checkpoint untouched"),
    }

    let history_path = args
        .history
        .unwrap_or_else(|| derived_path(&args.output, ".history.csv"));
    write_history_csv(&history_path, &outcome.history)?;

    let mut inputs: Vec<&Path> = vec![&args.dataset];
    if let Some(resume) = &args.resume {
        inputs.push(resume);
    }
    let mut artifacts: Vec<&Path> = vec![&args.output, &history_path];
    if let Some(snapshot) = &args.snapshot {
        artifacts.push(snapshot);
    }
    write_run_manifest(
        "train",
        settings,
        &inputs,
        &artifacts,
        Some(&args.output),
        manifest,
    )
}

fn cmd_evaluate(
    args: EvaluateArgs,
    settings: &mut Settings,
    manifest: Option<PathBuf>,
) -> CliResult {
    let batch_size = settings.get("batch_size", args.batch_size, 32)?;
    let dataset = Dataset::read_gmd1(&args.dataset)?;
    let (mut net, meta) = load_checkpoint::<f32>(&args.checkpoint)?;
    log::info!(
        "checkpoint after {} epochs, best validation accuracy {:.4}",
        meta.epochs_completed,
        meta.best_val_acc
    );

    let evaluation = evaluate(&mut net, &dataset, batch_size)?;

    let metrics_path = args
        .metrics
        .unwrap_or_else(|| derived_path(&args.dataset, ".metrics.json"));
    let roc_path = args
        .roc
        .unwrap_or_else(|| derived_path(&args.dataset, ".roc.csv"));
    write_metrics_json(&metrics_path, &evaluation.report)?;
    write_roc_csv(&roc_path, &evaluation.curves)?;

    print!("{}", render_report(&evaluation.report));
    write_run_manifest(
        "evaluate",
        settings,
        &[&args.dataset, &args.checkpoint],
        &[&metrics_path, &roc_path],
        Some(&metrics_path),
        manifest,
    )
}

fn cmd_predict(args: PredictArgs, settings: &mut Settings, manifest: Option<PathBuf>) -> CliResult {
    let (mut net, meta) = load_checkpoint::<f32>(&args.checkpoint)?;
    if meta.spec.input_height != meta.spec.input_width {
        return Err(format!(
            "checkpoint expects a {}x{} input; prediction only paints square motifs",
            meta.spec.input_height, meta.spec.input_width
        )
        .into());
    }
    let options = BuildOptions {
        geometry: resolve_fill_geometry(settings, args.fill, meta.spec.input_height as u32)?,
        susan: resolve_susan(settings, args.susan)?,
        quality: resolve_quality(settings, args.quality)?,
    };

    let records = read_fasta_file(&args.fasta)?;
    for record in &records {
        let report = predict_one(&mut net, record, &options)?;
        println!("{}\t{}", report.accession, report.format_line());
    }

    write_run_manifest(
        "predict",
        settings,
        &[&args.fasta, &args.checkpoint],
        &[],
        None,
        manifest,
    )
}

fn cmd_report(args: ReportArgs) -> CliResult {
    let report: MetricsReport = serde_json::from_reader(BufReader::new(File::open(&args.metrics)?))?;
    print!("{}", render_report(&report));
    Ok(())
}
