//! The `leap` command line.

mod settings;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{LeapError, Result};
use crate::eval::{self, EvalOptions, EvalVariant, ManifestEntry, VariantTag, DEFAULT_DARKEN_DIVISOR};
use crate::histeq::{equalize, ColorMode, HistEqConfig, TimingMode};
use crate::inference::{Backend, BrightSquareDetector, MockBackend, MockConfig, QuadrantClassifier};
use crate::scheduler::{
    self, predict_times_grouped, CollectSink, DirSink, DirSource, FrameSink, FrameSource, Mode, QueueSpec,
    RunOptions, StageGrouping, StageTimes, SyntheticSource,
};
use crate::vep::{chain, Pipeline};
use crate::video::ppm;

pub use settings::{Settings, KEYS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "leap", version, about = "Video enhancement and inference scheduling toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat key=value settings file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Where to write the JSON report.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// async, sync or pipelined
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Items per pipelined queue [default: 4]
    #[arg(long, global = true)]
    queue_depth: Option<usize>,
    /// Darkening divisor [default: 8]
    #[arg(long, global = true)]
    darken: Option<u32>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Histogram-equalize one PPM image.
    Enhance(EnhanceArgs),
    /// Stream frames through enhancement and inference.
    Run(RunArgs),
    /// Score a backend on original, dark and enhanced images.
    Eval(EvalArgs),
    /// Predict synchronous and pipelined frame times from stage times.
    #[command(allow_negative_numbers = true)]
    Predict(PredictArgs),
    /// Write a seeded synthetic image set with both manifests.
    GenDataset(GenArgs),
}

#[derive(Debug, Args)]
struct EnhanceArgs {
    input: PathBuf,
    output: PathBuf,
    /// luma_gain or per_channel
    #[arg(long)]
    color_mode: Option<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// `synthetic` or a frame-sequence directory
    #[arg(long)]
    source: Option<String>,
    /// `none` or an output directory
    #[arg(long)]
    sink: Option<String>,
    /// mock, quadrant or square
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    frames: Option<u64>,
    #[arg(long)]
    fps: Option<f64>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    #[arg(long)]
    read_ms: Option<f64>,
    #[arg(long)]
    preprocess_ms: Option<f64>,
    #[arg(long)]
    infer_ms: Option<f64>,
    #[arg(long)]
    postprocess_ms: Option<f64>,
    #[arg(long)]
    overlay_ms: Option<f64>,
    #[arg(long)]
    write_ms: Option<f64>,
    #[arg(long)]
    jitter_ms: Option<f64>,
    #[arg(long)]
    emit_class: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    /// `histeq` or `none`
    #[arg(long)]
    enhance: Option<String>,
    #[arg(long)]
    rows: Option<u32>,
    #[arg(long)]
    cols: Option<u32>,
    #[arg(long)]
    color_mode: Option<String>,
    #[arg(long)]
    timing_mode: Option<String>,
    /// Worker groups, e.g. read+preprocess|infer|postprocess+overlay|write
    #[arg(long)]
    groups: Option<String>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Comma-separated subset of original,dark,dark_histeq
    #[arg(long)]
    variants: Option<String>,
    /// quadrant or square; chosen from the manifest when omitted
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    color_mode: Option<String>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    read_ms: Option<f64>,
    #[arg(long)]
    preprocess_ms: Option<f64>,
    #[arg(long)]
    infer_ms: Option<f64>,
    #[arg(long)]
    postprocess_ms: Option<f64>,
    #[arg(long)]
    overlay_ms: Option<f64>,
    #[arg(long)]
    write_ms: Option<f64>,
    #[arg(long)]
    groups: Option<String>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    size: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

const DEFAULT_THRESHOLD: f64 = 30.0;
const DEFAULT_K: f64 = 30.0;

fn settings_for(common: &Common) -> Result<Settings> {
    let mut s = match &common.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    s.set("seed", common.seed);
    s.set("report", common.report.as_ref().map(|p| p.display()));
    s.set("mode", common.mode.as_ref());
    s.set("queue_depth", common.queue_depth);
    s.set("darken", common.darken);
    Ok(s)
}

fn write_report(s: &Settings, json: &str) -> Result<()> {
    if let Some(path) = s.get::<PathBuf>("report")? {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, json)?;
    }
    Ok(())
}

fn cmd_enhance(args: EnhanceArgs, mut s: Settings) -> Result<()> {
    s.set("color_mode", args.color_mode);
    let color_mode: ColorMode = s.get_or("color_mode", ColorMode::default())?;
    let frame = ppm::load(&args.input)?;
    let cfg = HistEqConfig {
        color_mode,
        ..HistEqConfig::for_frame(&frame)
    };
    ppm::save(&equalize(&frame, &cfg)?, &args.output)?;
    Ok(())
}

fn build_backend(s: &Settings, name: &str) -> Result<Box<dyn Backend>> {
    match name {
        "mock" => {
            let mut cfg = MockConfig::timed(
                s.get_or("preprocess_ms", 0.0)?,
                s.get_or("infer_ms", 0.0)?,
                s.get_or("postprocess_ms", 0.0)?,
            );
            if let Some(c) = s.get::<usize>("emit_class")? {
                cfg = cfg.with_emit_class(c);
            }
            cfg.jitter_ms = s.get_or("jitter_ms", 0.0)?;
            cfg.seed = s.get_or("seed", 0)?;
            Ok(Box::new(MockBackend::new(cfg)?))
        }
        "quadrant" => Ok(Box::new(QuadrantClassifier::new(s.get_or("threshold", DEFAULT_THRESHOLD)?))),
        "square" => Ok(Box::new(BrightSquareDetector::new(s.get_or("k", DEFAULT_K)?))),
        other => Err(LeapError::Configuration(format!("unknown backend `{other}`"))),
    }
}

fn non_negative(s: &Settings, key: &str) -> Result<f64> {
    let v: f64 = s.get_or(key, 0.0)?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(LeapError::Range(format!("{key} must be a non-negative number, got {v}")));
    }
    Ok(v)
}

fn cmd_run(args: RunArgs, mut s: Settings) -> Result<()> {
    s.set("source", args.source);
    s.set("sink", args.sink);
    s.set("backend", args.backend);
    s.set("frames", args.frames);
    s.set("fps", args.fps);
    s.set("width", args.width);
    s.set("height", args.height);
    s.set("read_ms", args.read_ms);
    s.set("preprocess_ms", args.preprocess_ms);
    s.set("infer_ms", args.infer_ms);
    s.set("postprocess_ms", args.postprocess_ms);
    s.set("overlay_ms", args.overlay_ms);
    s.set("write_ms", args.write_ms);
    s.set("jitter_ms", args.jitter_ms);
    s.set("emit_class", args.emit_class);
    s.set("threshold", args.threshold);
    s.set("k", args.k);
    s.set("enhance", args.enhance);
    s.set("rows", args.rows);
    s.set("cols", args.cols);
    s.set("color_mode", args.color_mode);
    s.set("timing_mode", args.timing_mode);
    s.set("groups", args.groups);

    // everything is validated before the first frame is read
    let mode: Mode = s.get_or("mode", Mode::Sync)?;
    let frames: u64 = s.get_or("frames", 100)?;
    let read_ms = non_negative(&s, "read_ms")?;
    let write_ms = non_negative(&s, "write_ms")?;
    let overlay_ms = non_negative(&s, "overlay_ms")?;
    let grouping: StageGrouping = s.get_or("groups", StageGrouping::default())?;
    let queue = QueueSpec::for_grouping(s.get_or("queue_depth", 4)?, &grouping)?;
    let backend = build_backend(&s, s.raw("backend").unwrap_or("mock"))?;

    let mut source: Box<dyn FrameSource> = match s.raw("source").unwrap_or("synthetic") {
        "synthetic" => Box::new(
            SyntheticSource::new(s.get_or("width", 64)?, s.get_or("height", 64)?, s.get_or("fps", 30.0)?)?
                .with_read_ms(read_ms),
        ),
        dir => Box::new(
            DirSource::open(dir)
                .map_err(|e| LeapError::Configuration(format!("source {dir}: {e}")))?
                .with_read_ms(read_ms),
        ),
    };
    let (width, height) = source.resolution();
    let mut vep = match s.raw("enhance").unwrap_or("histeq") {
        "histeq" => Pipeline::histeq(HistEqConfig::new(
            s.get_or("rows", height)?,
            s.get_or("cols", width)?,
            s.get_or("color_mode", ColorMode::default())?,
            s.get_or("timing_mode", TimingMode::default())?,
        )?)?,
        "none" => chain(vec![]),
        other => return Err(LeapError::Configuration(format!("unknown enhancement `{other}`"))),
    };
    if let Some((rows, cols)) = vep.dimensions() {
        if (cols, rows) != (width, height) {
            return Err(LeapError::Configuration(format!(
                "rows/cols {rows}x{cols} do not match the {width}x{height} source"
            )));
        }
    }
    let mut sink: Box<dyn FrameSink> = match s.raw("sink").unwrap_or("none") {
        "none" => Box::new(CollectSink::new(write_ms)),
        dir => {
            let fps = source.fps().round().max(1.0) as u32;
            Box::new(DirSink::create(dir, fps)?.with_write_ms(write_ms))
        }
    };
    let opts = RunOptions { overlay_ms, grouping };

    let report = scheduler::run(mode, source.as_mut(), &mut vep, backend.as_ref(), sink.as_mut(), frames, queue, &opts)?;
    write_report(&s, &report.to_json()?)?;
    println!(
        "mode={} frames={} fps={:.3} mean_total_ms={:.3} mean_period_ms={:.3} dropped_frames={}",
        report.mode, report.frames, report.fps, report.mean_total_ms, report.mean_period_ms, report.dropped_frames
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs, mut s: Settings) -> Result<()> {
    s.set("manifest", args.manifest.as_ref().map(|p| p.display()));
    s.set("variants", args.variants);
    s.set("backend", args.backend);
    s.set("threshold", args.threshold);
    s.set("k", args.k);
    s.set("color_mode", args.color_mode);

    let manifest: PathBuf = s.require("manifest")?;
    let darken: u32 = s.get_or("darken", DEFAULT_DARKEN_DIVISOR)?;
    let variants = s
        .raw("variants")
        .unwrap_or("original,dark,dark_histeq")
        .split(',')
        .map(|t| EvalVariant::new(t.trim().parse::<VariantTag>()?, darken))
        .collect::<Result<Vec<_>>>()?;
    let opts = EvalOptions {
        color_mode: s.get_or("color_mode", ColorMode::default())?,
    };
    let entries = eval::read_manifest(&manifest)?;
    let default_backend = match entries.first() {
        Some(ManifestEntry::Detection { .. }) => "square",
        _ => "quadrant",
    };
    let backend = build_backend(&s, s.raw("backend").unwrap_or(default_backend))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let report = eval::run_eval(&entries, base, &variants, backend.as_ref(), &opts)?;
    write_report(&s, &report.to_json()?)?;
    match &report {
        eval::EvalReport::Accuracy(r) => {
            for v in &r.variants {
                println!("{} top1={:.4} top5={:.4}", v.tag.as_str(), v.top1, v.top5);
            }
        }
        eval::EvalReport::Map(r) => {
            for v in &r.variants {
                println!("{} map={:.4}", v.tag.as_str(), v.map);
            }
        }
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs, mut s: Settings) -> Result<()> {
    s.set("read_ms", args.read_ms);
    s.set("preprocess_ms", args.preprocess_ms);
    s.set("infer_ms", args.infer_ms);
    s.set("postprocess_ms", args.postprocess_ms);
    s.set("overlay_ms", args.overlay_ms);
    s.set("write_ms", args.write_ms);
    s.set("groups", args.groups);
    let t = StageTimes::new(
        s.get_or("read_ms", 0.0)?,
        s.get_or("preprocess_ms", 0.0)?,
        s.get_or("infer_ms", 0.0)?,
        s.get_or("postprocess_ms", 0.0)?,
        s.get_or("overlay_ms", 0.0)?,
        s.get_or("write_ms", 0.0)?,
    );
    t.validate()?;
    let grouping: StageGrouping = s.get_or("groups", StageGrouping::default())?;
    let p = predict_times_grouped(&t, &grouping);
    write_report(&s, &(serde_json::to_string_pretty(&p)? + "\n"))?;
    println!("si_ms={}", p.si_ms);
    println!("psi_lower_bound_ms={}", p.psi_lower_bound_ms);
    println!("si_fps={}", p.si_fps);
    println!("psi_max_fps={}", p.psi_max_fps);
    Ok(())
}

fn cmd_gen_dataset(args: GenArgs, mut s: Settings) -> Result<()> {
    s.set("n", args.n);
    s.set("size", args.size);
    s.set("out", args.out.as_ref().map(|p| p.display()));
    let out: PathBuf = s.require("out")?;
    let files = eval::gen_synthetic_dataset(s.get_or("n", 200)?, s.get_or("seed", 42)?, s.get_or("size", 64)?, &out)?;
    println!("wrote {} images to {}", files.images.len(), out.display());
    Ok(())
}

/// Maps an error to its exit status: configuration and range problems are
/// usage errors, everything else is a runtime failure.
pub fn exit_code(err: &LeapError) -> i32 {
    match err {
        LeapError::Configuration(_) | LeapError::Range(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Diagnostics go to stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = settings_for(&cli.common).and_then(|s| match cli.command {
        Command::Enhance(a) => cmd_enhance(a, s),
        Command::Run(a) => cmd_run(a, s),
        Command::Eval(a) => cmd_eval(a, s),
        Command::Predict(a) => cmd_predict(a, s),
        Command::GenDataset(a) => cmd_gen_dataset(a, s),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("leap: {e}");
            exit_code(&e)
        }
    }
}
