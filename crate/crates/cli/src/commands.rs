use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};
use sigmil::evaluation::{format_boxes, per_frame_csv, report, Metric, MetricReport, ResultTable, TrackResult};
use sigmil::imaging::load_frame;
use sigmil::synth::{generate, SynthConfig};
use sigmil::{BoundingBox, Error, Tracker, TrackerConfig};

use crate::config::Overrides;
use crate::error::{CliError, CliResult};
use crate::sequence::{find_sequences, read_ground_truth, SequenceSpec, FRAME_DIR, GROUND_TRUTH};

pub const BOXES_FILE: &str = "boxes.csv";
pub const FRAMES_FILE: &str = "frames.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SIGNIFICANCE_FILE: &str = "significance.csv";

pub const METHOD: &str = "sigmil";
pub const BASELINE: &str = "baseline";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub mean_frame_ms: f64,
    pub fps: f64,
}

/// Everything needed to reproduce and audit one tracking run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub sequence: String,
    pub seed: u64,
    pub config: TrackerConfig,
    pub boxes: Vec<BoundingBox>,
    pub timing: Timing,
    pub mean_cle: f64,
    pub mean_vor: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

/// Output of tracking one sequence in memory.
#[derive(Debug, Clone)]
pub struct TrackRun {
    pub boxes: Vec<BoundingBox>,
    /// `(frame, instance, r)` rows when significance was recorded.
    pub significance: Vec<(usize, usize, f64)>,
    pub seconds: f64,
}

fn load(spec: &SequenceSpec, index: usize) -> CliResult<sigmil::GrayFrame> {
    load_frame(&spec.frames[index]).map_err(at_frame(index))
}

fn at_frame(index: usize) -> impl Fn(Error) -> CliError {
    move |e| {
        Error::AtFrame {
            index,
            source: Box::new(e),
        }
        .into()
    }
}

/// Runs the tracker over every frame of `spec`, starting from `first`.
pub fn track_sequence(
    spec: &SequenceSpec,
    first: BoundingBox,
    cfg: &TrackerConfig,
    record: bool,
) -> CliResult<TrackRun> {
    let start = Instant::now();
    let mut significance = Vec::new();
    let mut note = |frame: usize, tracker: &Tracker| {
        if record {
            if let Some(est) = tracker.significance() {
                significance.extend(est.instance.iter().enumerate().map(|(j, &r)| (frame, j, r)));
            }
        }
    };
    let mut tracker = Tracker::init(&load(spec, 0)?, first, cfg.clone()).map_err(at_frame(0))?;
    note(0, &tracker);
    let mut boxes = vec![first];
    for i in 1..spec.frames.len() {
        let frame = load(spec, i)?;
        boxes.push(tracker.step(&frame).map_err(at_frame(i))?);
        note(i, &tracker);
    }
    Ok(TrackRun {
        boxes,
        significance,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).map_err(CliError::io(path))
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(CliError::io(path))
}

#[derive(Debug, Clone, Args)]
pub struct TrackArgs {
    /// Sequence directory (frames, or `img/` plus `groundtruth.txt`).
    #[arg(long)]
    pub seq: PathBuf,
    /// Ground-truth file; the first line is the initial box.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Re-run with the configuration of an earlier manifest and check that
    /// the boxes come out the same.
    #[arg(long, value_name = "MANIFEST")]
    pub replay: Option<PathBuf>,
    /// Also write per-frame instance significance (frame,instance,r).
    #[arg(long)]
    pub debug_significance: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

pub fn cmd_track(args: &TrackArgs) -> CliResult<RunManifest> {
    let spec = SequenceSpec::open(&args.seq, args.gt.as_deref())?;
    let (first, ground_truth) = spec.load_ground_truth()?;
    let replayed = args.replay.as_deref().map(RunManifest::load).transpose()?;
    let cfg = match &replayed {
        Some(m) => {
            m.config.validate()?;
            m.config.clone()
        }
        None => args.overrides.resolve()?,
    };
    create_dir(&args.out)?;

    let run = track_sequence(&spec, first, &cfg, args.debug_significance)?;
    let result = TrackResult {
        name: spec.name.clone(),
        boxes: run.boxes,
        ground_truth,
    };
    let metrics = report(&result)?;

    write(&args.out.join(BOXES_FILE), format_boxes(&result.boxes))?;
    write(&args.out.join(FRAMES_FILE), per_frame_csv(&result, &metrics))?;
    if args.debug_significance {
        let mut csv = String::from("frame,instance,r\n");
        for (f, j, r) in &run.significance {
            let _ = writeln!(csv, "{f},{j},{r}");
        }
        write(&args.out.join(SIGNIFICANCE_FILE), csv)?;
    }

    let n = result.boxes.len() as f64;
    let manifest = RunManifest {
        version: sigmil::VERSION.to_string(),
        sequence: spec.name,
        seed: cfg.seed,
        config: cfg,
        boxes: result.boxes,
        timing: Timing {
            total_seconds: run.seconds,
            mean_frame_ms: 1000.0 * run.seconds / n,
            fps: if run.seconds > 0.0 {
                n / run.seconds
            } else {
                f64::INFINITY
            },
        },
        mean_cle: metrics.mean_cle,
        mean_vor: metrics.mean_vor,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Input(e.to_string()))?;
    write(&args.out.join(MANIFEST_FILE), json + "\n")?;

    if let Some(old) = replayed {
        let diverged =
            (0..old.boxes.len().max(manifest.boxes.len())).find(|&i| old.boxes.get(i) != manifest.boxes.get(i));
        if let Some(i) = diverged {
            return Err(CliError::ReplayMismatch(i));
        }
    }
    Ok(manifest)
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Box files to score, one per sequence (x,y,w,h per line).
    #[arg(long, required = true, num_args = 1..)]
    pub results: Vec<PathBuf>,
    /// Ground-truth files, paired with `--results` in order.
    #[arg(long, required = true, num_args = 1..)]
    pub gt: Vec<PathBuf>,
    /// Column label for the scored method.
    #[arg(long, default_value = METHOD)]
    pub method: String,
    /// Directory for the CSV and text tables.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Row label for a ground-truth file: its directory name, else its stem.
fn sequence_name(gt: &Path, index: usize) -> String {
    let from = |p: Option<&std::ffi::OsStr>| p.map(|s| s.to_string_lossy().into_owned());
    let parent = gt
        .canonicalize()
        .ok()
        .and_then(|p| from(p.parent().and_then(Path::file_name)));
    match gt.file_name().and_then(|n| n.to_str()) {
        Some(GROUND_TRUTH) => parent,
        _ => from(gt.file_stem()),
    }
    .unwrap_or_else(|| format!("seq{}", index + 1))
}

/// Scores one results file against its ground truth.
pub fn evaluate_files(results: &Path, gt: &Path, name: &str) -> CliResult<(TrackResult, MetricReport)> {
    let rows = read_ground_truth(results)?;
    if rows.is_empty() {
        return Err(CliError::Input(format!("{} is empty", results.display())));
    }
    if let Some(bad) = rows.iter().position(Option::is_none) {
        return Err(CliError::Input(format!(
            "{}: line {} is not a box",
            results.display(),
            bad + 1
        )));
    }
    let ground_truth = read_ground_truth(gt)?;
    if ground_truth.len() != rows.len() {
        return Err(CliError::Input(format!(
            "{} has {} rows but {} has {}",
            results.display(),
            rows.len(),
            gt.display(),
            ground_truth.len()
        )));
    }
    let result = TrackResult {
        name: name.to_string(),
        boxes: rows.into_iter().flatten().collect(),
        ground_truth,
    };
    let metrics = report(&result)?;
    Ok((result, metrics))
}

pub fn write_tables(table: &ResultTable, out: &Path) -> CliResult<()> {
    create_dir(out)?;
    for (metric, stem) in [(Metric::Cle, "cle"), (Metric::Vor, "vor")] {
        write(&out.join(format!("{stem}.csv")), table.to_csv(metric))?;
        write(&out.join(format!("{stem}.txt")), table.to_text(metric))?;
    }
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<ResultTable> {
    if args.results.len() != args.gt.len() {
        return Err(CliError::Input(format!(
            "{} results files but {} ground-truth files",
            args.results.len(),
            args.gt.len()
        )));
    }
    let mut table = ResultTable::new(vec![args.method.clone()]);
    let mut per_frame = Vec::new();
    for (i, (results, gt)) in args.results.iter().zip(&args.gt).enumerate() {
        let name = sequence_name(gt, i);
        let (result, metrics) = evaluate_files(results, gt, &name)?;
        table.push(name.clone(), vec![(metrics.mean_cle, metrics.mean_vor)])?;
        per_frame.push((name, per_frame_csv(&result, &metrics)));
    }
    if let Some(out) = &args.out {
        write_tables(&table, out)?;
        for (name, csv) in per_frame {
            write(&out.join(format!("{name}.{FRAMES_FILE}")), csv)?;
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Output directory; frames go to `img/`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub frames: usize,
    /// Pixel noise standard deviation in 8-bit gray levels.
    #[arg(long, default_value_t = 5.0)]
    pub sigma: f64,
    /// Largest per-frame displacement in pixels.
    #[arg(long, default_value_t = 5.0)]
    pub step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SynthArgs {
    pub fn config(&self) -> SynthConfig {
        SynthConfig {
            frames: self.frames,
            walk_step: self.step,
            noise_sigma: self.sigma / 255.0,
            seed: self.seed,
            ..SynthConfig::default()
        }
    }
}

/// Writes numbered PNG frames and `groundtruth.txt`; returns the frame count.
pub fn cmd_synth(args: &SynthArgs) -> CliResult<usize> {
    if !(args.sigma >= 0.0 && args.step >= 0.0) {
        return Err(CliError::Input("sigma and step must be non-negative".into()));
    }
    let seq = generate(&args.config())?;
    let img = args.out.join(FRAME_DIR);
    create_dir(&img)?;
    let digits = seq.frames.len().to_string().len().max(4);
    for (i, frame) in seq.frames.iter().enumerate() {
        let path = img.join(format!("{:0digits$}.png", i + 1));
        frame
            .save(&path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    write(&args.out.join(GROUND_TRUTH), format_boxes(&seq.ground_truth))?;
    Ok(seq.frames.len())
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory whose subdirectories each hold `img/` and `groundtruth.txt`.
    #[arg(long)]
    pub root: PathBuf,
    /// Where to write the tables (defaults to the root).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add a column for the same tracker with alpha_pos = 1 and one learner.
    #[arg(long)]
    pub baseline: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// The configuration with significance weighting switched off.
pub fn baseline_config(cfg: &TrackerConfig) -> TrackerConfig {
    let mut base = cfg.clone();
    base.alpha.alpha_pos = 1.0;
    base.ensemble_size = 1;
    base
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<ResultTable> {
    let cfg = args.overrides.resolve()?;
    let mut methods = vec![(METHOD.to_string(), cfg.clone())];
    if args.baseline {
        methods.push((BASELINE.to_string(), baseline_config(&cfg)));
    }
    let dirs = find_sequences(&args.root)?;
    if dirs.is_empty() {
        return Err(CliError::Input(format!(
            "no sequences (img/ plus {GROUND_TRUTH}) under {}",
            args.root.display()
        )));
    }
    let mut table = ResultTable::new(methods.iter().map(|(m, _)| m.clone()).collect());
    for dir in dirs {
        let spec = SequenceSpec::open(&dir, None)?;
        let (first, ground_truth) = spec.load_ground_truth()?;
        let mut cells = Vec::with_capacity(methods.len());
        for (_, cfg) in &methods {
            let run = track_sequence(&spec, first, cfg, false)?;
            let metrics = report(&TrackResult {
                name: spec.name.clone(),
                boxes: run.boxes,
                ground_truth: ground_truth.clone(),
            })?;
            cells.push((metrics.mean_cle, metrics.mean_vor));
        }
        table.push(spec.name, cells)?;
    }
    write_tables(&table, args.out.as_deref().unwrap_or(&args.root))?;
    Ok(table)
}
