//! Thin command-line wrapper around the library. Exit codes: 0 success,
//! 2 invalid input (scene manifest, config, scene spec, annotation file),
//! 3 database problem, 4 when every object in a scan failed to annotate.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scanfit::cad::{load_database, CadError};
use scanfit::config::ConfigError;
use scanfit::evaluate::{evaluate_annotations, write_report, EvaluateError};
use scanfit::geometry::Axis;
use scanfit::overlays::{render_overlays, OverlayError, OverlayOptions};
use scanfit::pipeline::{annotate_scene, PipelineError, SceneAnnotations};
use scanfit::scene::{load_scan, SceneError};
use scanfit::synth::{write_scene, SynthError, SyntheticSceneSpec};
use scanfit::EngineConfig;

#[derive(Parser)]
#[command(name = "scanfit", version, about = "CAD model retrieval and 9-DoF alignment for RGB-D scans")]
struct Cli {
    /// Engine configuration file (JSON); built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Objective weight preset: `scannet` or `arkitscenes`.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Worker thread count. Outputs are identical for every count; this only
    /// controls resource use.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the sampling seed from the config or scene spec.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a CAD model and 9-DoF pose to every annotated object in a scan.
    Annotate {
        /// Scan manifest (JSON).
        #[arg(long)]
        scene: PathBuf,
        /// CAD database manifest (JSON).
        #[arg(long)]
        db: PathBuf,
    },
    /// Generate a synthetic scan (mesh, depth frames, manifest, ground
    /// truth) from a scene spec.
    Synth {
        /// Scene spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// CAD database manifest (JSON).
        #[arg(long)]
        db: PathBuf,
    },
    /// Compare two annotation documents and write a deviation report with
    /// histograms.
    Evaluate {
        /// Predicted annotations (JSON).
        #[arg(long)]
        pred: PathBuf,
        /// Reference annotations (JSON).
        #[arg(long = "ref")]
        reference: PathBuf,
        /// CAD database manifest (JSON).
        #[arg(long)]
        db: PathBuf,
    },
    /// Render per-frame overlay PNGs (sensor depth, composed depth with
    /// fitted models, silhouette outlines) for an annotated scan.
    RenderOverlays {
        /// Scan manifest (JSON).
        #[arg(long)]
        scene: PathBuf,
        /// Annotation document produced by `annotate`.
        #[arg(long)]
        annotations: PathBuf,
        /// CAD database manifest (JSON).
        #[arg(long)]
        db: PathBuf,
        /// Render every `stride`-th frame.
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Database(String),
    #[error("all {0} objects failed to annotate; per-object reasons are in the output document")]
    AllObjectsFailed(usize),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Database(_) => 3,
            CliError::AllObjectsFailed(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CadError> for CliError {
    fn from(e: CadError) -> Self {
        CliError::Database(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Cad(c) => CliError::Database(c.to_string()),
            PipelineError::NoObjects
            | PipelineError::Config(_)
            | PipelineError::Scene(_)
            | PipelineError::DocumentRead { .. } => CliError::Input(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Cad(c) => CliError::Database(c.to_string()),
            SynthError::Invalid(_) | SynthError::SpecRead { .. } | SynthError::SpecParse { .. } => {
                CliError::Input(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<EvaluateError> for CliError {
    fn from(e: EvaluateError) -> Self {
        match e {
            EvaluateError::Cad(c) => CliError::Database(c.to_string()),
            EvaluateError::NoOverlap => CliError::Input(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<OverlayError> for CliError {
    fn from(e: OverlayError) -> Self {
        match e {
            OverlayError::Cad(c) => CliError::Database(c.to_string()),
            OverlayError::Scene(s) => CliError::Input(s.to_string()),
            OverlayError::UnknownObject { .. } => CliError::Input(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

/// Config assembled from `--config`, `--preset`, and `--seed`.
fn engine_config(cli: &Cli) -> Result<EngineConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => EngineConfig::load(path)?,
        None => EngineConfig::default(),
    };
    if let Some(preset) = &cli.preset {
        config = config.with_preset(preset)?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_annotate(cli: &Cli, scene: &PathBuf, db: &PathBuf) -> Result<(), CliError> {
    let config = engine_config(cli)?;
    let scan = load_scan(scene)?;
    let database = load_database(db, scan.gravity)?;
    let mut doc = annotate_scene(&scan, &database, &config)?;
    doc.preset = cli.preset.clone();
    for failure in &doc.failures {
        log::warn!("object '{}' failed: {}", failure.object_id, failure.error);
    }
    let path = cli.out.join("annotations.json");
    doc.save(&path)?;
    println!(
        "annotated {} of {} objects ({} clusters) -> {}",
        doc.objects.len(),
        doc.objects.len() + doc.failures.len(),
        doc.clusters.len(),
        path.display()
    );
    if doc.objects.is_empty() {
        return Err(CliError::AllObjectsFailed(doc.failures.len()));
    }
    Ok(())
}

fn cmd_synth(cli: &Cli, spec: &PathBuf, db: &PathBuf) -> Result<(), CliError> {
    let database = load_database(db, Axis::Y)?;
    let mut spec = SyntheticSceneSpec::load(spec)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let manifest = write_scene(&spec, &database, &cli.out)?;
    println!(
        "synthesized scene '{}' ({} frames, {} objects) -> {}",
        spec.scene_id,
        spec.cameras.count,
        spec.objects.len(),
        manifest.display()
    );
    Ok(())
}

fn cmd_evaluate(cli: &Cli, pred: &PathBuf, reference: &PathBuf, db: &PathBuf) -> Result<(), CliError> {
    let config = engine_config(cli)?;
    let pred = SceneAnnotations::load(pred)?;
    let reference = SceneAnnotations::load(reference)?;
    let database = load_database(db, Axis::Y)?;
    let report = evaluate_annotations(&pred, &reference, &database, config.n_samples, config.seed)?;
    let written = write_report(&report, &cli.out)?;
    for (name, stats) in &report.summary {
        println!("{name}: mean {:.6}, median {:.6}, max {:.6}", stats.mean, stats.median, stats.max);
    }
    println!(
        "compared {} objects ({} unmatched) -> {}",
        report.objects.len(),
        report.unmatched_pred.len() + report.unmatched_ref.len(),
        written[0].display()
    );
    Ok(())
}

fn cmd_render_overlays(
    cli: &Cli,
    scene: &PathBuf,
    annotations: &PathBuf,
    db: &PathBuf,
    stride: usize,
) -> Result<(), CliError> {
    let config = engine_config(cli)?;
    let scan = load_scan(scene)?;
    let doc = SceneAnnotations::load(annotations)?;
    let database = load_database(db, scan.gravity)?;
    let options = OverlayOptions {
        stride,
        segmentation_margin: config.segmentation_margin,
        ..OverlayOptions::default()
    };
    let written = render_overlays(&scan, &doc, &database, &cli.out, &options)?;
    println!("wrote {} overlay images to {}", written.len(), cli.out.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Annotate { scene, db } => cmd_annotate(cli, scene, db),
        Command::Synth { spec, db } => cmd_synth(cli, spec, db),
        Command::Evaluate { pred, reference, db } => cmd_evaluate(cli, pred, reference, db),
        Command::RenderOverlays { scene, annotations, db, stride } => {
            cmd_render_overlays(cli, scene, annotations, db, *stride)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = cli.threads;
    scanfit::ops::run_with_threads(threads, move || match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    })
}
