//! Batch experiments: build or load a mosaic, run one or more pipelines on it,
//! score against ground truth and write a JSON report plus PNG maps.
//!
//! Relative paths in an experiment file resolve against the file's directory.

use crate::affinity::{AffinityConfig, AffinityError, AffinityModel};
use crate::autoseed::{auto_segment, AutoseedConfig, AutoseedError};
use crate::eval::{
    encode_rgb_png, match_labels, palette, render_connectedness, weighted_dice, EvalError, LabelMatch, ObjectScore,
};
use crate::image::{compose_mosaic, load_image, load_layout, GrayImage, ImageError, LabelMap, Spel};
use crate::mofs::{segment_image, MofsError, SeedSpec, SeedsFile, Semisegmentation, TieRule};
use crate::synth;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid experiment file: {0}")]
    Invalid(String),
    #[error(transparent)]
    Image(ImageError),
    #[error(transparent)]
    Affinity(#[from] AffinityError),
    #[error(transparent)]
    Mofs(MofsError),
    #[error(transparent)]
    Autoseed(#[from] AutoseedError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<ImageError> for BenchError {
    fn from(e: ImageError) -> Self {
        match e {
            ImageError::Io { path, source } => BenchError::Io { path, source },
            other => BenchError::Image(other),
        }
    }
}

impl From<MofsError> for BenchError {
    fn from(e: MofsError) -> Self {
        match e {
            MofsError::Io { path, source } => BenchError::Io { path: path.into(), source },
            MofsError::Image(i) => i.into(),
            other => BenchError::Mofs(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub experiments: Vec<Experiment>,
}

/// One input image with ground truth, taken from exactly one of
/// `mosaic-layout`, `image` + `ground-truth`, or `synthetic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Experiment {
    pub name: String,
    #[serde(default)]
    pub mosaic_layout: Option<PathBuf>,
    #[serde(default)]
    pub image: Option<PathBuf>,
    #[serde(default)]
    pub ground_truth: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticPreset>,
    /// Clicked seeds for manual pipelines. Synthetic presets bring their own.
    #[serde(default)]
    pub seeds: Option<PathBuf>,
    pub pipelines: Vec<PipelineConfig>,
    /// Drives synthetic generation and overrides `autoseed.rng-seed`.
    #[serde(default)]
    pub rng_seed: u64,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SyntheticPreset {
    TwoScale {
        #[serde(default = "default_two_scale_size")]
        size: usize,
    },
    TwoTexture,
    FiveTexture,
}

fn default_two_scale_size() -> usize {
    256
}

impl SyntheticPreset {
    pub fn generate(self, seed: u64) -> synth::SyntheticMosaic {
        match self {
            SyntheticPreset::TwoScale { size } => synth::two_scale_mosaic(size, seed),
            SyntheticPreset::TwoTexture => synth::two_texture_mosaic(seed),
            SyntheticPreset::FiveTexture => synth::five_texture_mosaic(seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Manual,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PipelineConfig {
    pub name: String,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub affinity: AffinityConfig,
    #[serde(default)]
    pub autoseed: AutoseedConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub pipeline: String,
    pub mode: Mode,
    pub affinity: AffinityConfig,
    pub autoseed: Option<AutoseedConfig>,
    pub weighted_dice: f64,
    pub objects: Vec<ObjectScore>,
    /// Predicted-to-truth correspondence; absent in manual mode, where seed
    /// order fixes the ids.
    pub label_match: Option<LabelMatch>,
    pub unlabeled_pixels: usize,
    pub scales: Vec<usize>,
    pub seeds: Vec<Vec<(usize, usize)>>,
    /// Fitting and segmentation only; excludes image I/O and scoring.
    pub seconds: f64,
    pub labels_png: PathBuf,
    pub render_png: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub ground_truth_objects: usize,
    pub runs: Vec<ScoreReport>,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let file: ExperimentFile = serde_json::from_str(text).map_err(|e| BenchError::Invalid(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Invalid(m));
        if self.experiments.is_empty() {
            return bad("no experiments".into());
        }
        let mut names = BTreeSet::new();
        for e in &self.experiments {
            if !safe_name(&e.name) {
                return bad(format!("experiment name '{}' must be non-empty [A-Za-z0-9._-]", e.name));
            }
            if !names.insert(&e.name) {
                return bad(format!("duplicate experiment name '{}'", e.name));
            }
            let sources =
                [e.mosaic_layout.is_some(), e.image.is_some(), e.synthetic.is_some()].iter().filter(|&&b| b).count();
            if sources != 1 {
                return bad(format!("'{}': give exactly one of mosaic-layout, image, synthetic", e.name));
            }
            if e.image.is_some() != e.ground_truth.is_some() {
                return bad(format!("'{}': image and ground-truth go together", e.name));
            }
            if e.pipelines.is_empty() {
                return bad(format!("'{}': no pipelines", e.name));
            }
            let mut pipes = BTreeSet::new();
            for p in &e.pipelines {
                if !safe_name(&p.name) {
                    return bad(format!("'{}': pipeline name '{}' must be non-empty [A-Za-z0-9._-]", e.name, p.name));
                }
                if !pipes.insert(&p.name) {
                    return bad(format!("'{}': duplicate pipeline name '{}'", e.name, p.name));
                }
                p.affinity.validate()?;
                if p.mode == Mode::Auto {
                    p.autoseed.validate()?;
                }
                if p.mode == Mode::Manual && e.seeds.is_none() && e.synthetic.is_none() {
                    return bad(format!("'{}': manual pipeline '{}' needs a seeds file", e.name, p.name));
                }
            }
        }
        Ok(())
    }
}

fn safe_name(s: &str) -> bool {
    !s.is_empty() && s != "." && s != ".." && s.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

struct Prepared {
    image: GrayImage,
    ground_truth: LabelMap,
    clicks: Option<Vec<Vec<Spel>>>,
    output_dir: PathBuf,
}

fn prepare(e: &Experiment, base: &Path) -> Result<Prepared, BenchError> {
    let (image, ground_truth, mut clicks) = if let Some(layout) = &e.mosaic_layout {
        let (tiles, places) = load_layout(resolve(base, layout))?;
        let (img, gt) = compose_mosaic(&tiles, &places)?;
        (img, gt, None)
    } else if let (Some(img), Some(gt)) = (&e.image, &e.ground_truth) {
        (load_image(resolve(base, img))?, LabelMap::load_png(resolve(base, gt))?, None)
    } else {
        let preset = e.synthetic.expect("validated source");
        let m = preset.generate(e.rng_seed);
        let clicks = m.clicks.iter().map(|pts| pts.iter().map(|&(x, y)| Spel::new(x, y)).collect()).collect();
        (m.image, m.ground_truth, Some(clicks))
    };
    if (image.width(), image.height()) != (ground_truth.width(), ground_truth.height()) {
        return Err(EvalError::DimensionMismatch {
            left: (image.width(), image.height()),
            right: (ground_truth.width(), ground_truth.height()),
        }
        .into());
    }
    if let Some(seeds) = &e.seeds {
        clicks = Some(SeedsFile::load(resolve(base, seeds))?.clicks(image.width(), image.height())?);
    }
    Ok(Prepared { image, ground_truth, clicks, output_dir: resolve(base, &e.output_dir) })
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    let io = |source| BenchError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

struct Run {
    segmentation: Semisegmentation,
    scales: Vec<usize>,
    seeds: Vec<Vec<(usize, usize)>>,
    autoseed: Option<AutoseedConfig>,
    seconds: f64,
}

fn run_pipeline(p: &PipelineConfig, prep: &Prepared, rng_seed: u64) -> Result<Run, BenchError> {
    let img = &prep.image;
    match p.mode {
        Mode::Manual => {
            let clicks = prep.clicks.as_ref().expect("validated manual seeds");
            let seeds = SeedSpec::from_clicks(clicks, img.width(), img.height());
            seeds.validate(img.width(), img.height())?;
            let start = Instant::now();
            let model = AffinityModel::fit(img, &seeds.objects, &p.affinity)?;
            let segmentation = segment_image(img, &seeds, &model)?;
            let seconds = start.elapsed().as_secs_f64();
            Ok(Run {
                segmentation,
                scales: model.scales(),
                seeds: clicks.iter().map(|v| v.iter().map(|s| (s.x, s.y)).collect()).collect(),
                autoseed: None,
                seconds,
            })
        }
        Mode::Auto => {
            let config = AutoseedConfig { rng_seed, ..p.autoseed.clone() };
            let start = Instant::now();
            let r = auto_segment(img, &config, &p.affinity)?;
            let seconds = start.elapsed().as_secs_f64();
            Ok(Run {
                segmentation: r.segmentation,
                scales: r.diagnostics.scales,
                seeds: r.diagnostics.seeds,
                autoseed: Some(config),
                seconds,
            })
        }
    }
}

fn run_experiment(e: &Experiment, prep: &Prepared) -> Result<ExperimentReport, BenchError> {
    let map_dir = prep.output_dir.join(&e.name);
    let mut runs = Vec::with_capacity(e.pipelines.len());
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    for p in &e.pipelines {
        let run = run_pipeline(p, prep, e.rng_seed)?;
        let crisp = run.segmentation.crisp_labels_lenient(TieRule::LowestId);
        let unlabeled_pixels = crisp.count(0);
        let (pred, label_match) = match p.mode {
            Mode::Manual => (crisp, None),
            Mode::Auto => {
                let m = match_labels(&crisp, &prep.ground_truth)?;
                (m.apply(&crisp), Some(m))
            }
        };
        let (score, objects) = weighted_dice(&pred, &prep.ground_truth)?;
        let render = render_connectedness(&run.segmentation, &palette(run.segmentation.objects()))?;
        let labels_png = PathBuf::from(&e.name).join(format!("{}-labels.png", p.name));
        let render_png = PathBuf::from(&e.name).join(format!("{}-render.png", p.name));
        files.push((map_dir.join(format!("{}-labels.png", p.name)), pred.encode_png()));
        files.push((map_dir.join(format!("{}-render.png", p.name)), encode_rgb_png(&render)));
        runs.push(ScoreReport {
            pipeline: p.name.clone(),
            mode: p.mode,
            affinity: p.affinity,
            autoseed: run.autoseed,
            weighted_dice: score,
            objects,
            label_match,
            unlabeled_pixels,
            scales: run.scales,
            seeds: run.seeds,
            seconds: run.seconds,
            labels_png,
            render_png,
        });
    }
    let report = ExperimentReport {
        name: e.name.clone(),
        width: prep.image.width(),
        height: prep.image.height(),
        ground_truth_objects: prep.ground_truth.objects().len(),
        runs,
    };
    for (path, bytes) in &files {
        write_atomic(path, bytes)?;
    }
    let json = serde_json::to_vec_pretty(&report).expect("report serializes");
    write_atomic(&prep.output_dir.join(format!("{}.json", e.name)), &json)?;
    Ok(report)
}

/// Validated experiments with every input already loaded.
///
/// Loading happens up front so that an unreadable tile or seeds file fails the
/// batch before any report is written.
pub struct Batch {
    experiments: Vec<Experiment>,
    prepared: Vec<Prepared>,
}

impl Batch {
    pub fn prepare(file: &ExperimentFile, base: &Path) -> Result<Self, BenchError> {
        file.validate()?;
        let prepared = file.experiments.iter().map(|e| prepare(e, base)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { experiments: file.experiments.clone(), prepared })
    }

    /// Reads an experiment file; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let file = ExperimentFile::load(path)?;
        Self::prepare(&file, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn len(&self) -> usize {
        self.experiments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experiments.is_empty()
    }

    /// Runs up to `jobs` experiments at a time (0 means one per core). Reports
    /// go to `<output-dir>/<name>.json`, maps to `<output-dir>/<name>/`.
    pub fn run(&self, jobs: usize) -> Result<Vec<ExperimentReport>, BenchError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| BenchError::Invalid(format!("thread pool: {e}")))?;
        let results: Vec<Result<ExperimentReport, BenchError>> = pool.install(|| {
            self.experiments.par_iter().zip(self.prepared.par_iter()).map(|(e, p)| run_experiment(e, p)).collect()
        });
        results.into_iter().collect()
    }
}

/// Loads and runs an experiment file.
pub fn run_benchmark(path: impl AsRef<Path>, jobs: usize) -> Result<Vec<ExperimentReport>, BenchError> {
    Batch::load(path)?.run(jobs)
}

/// One row per experiment; a Dice and a time column per pipeline name.
pub fn format_table(reports: &[ExperimentReport]) -> String {
    let mut pipelines: Vec<&str> = Vec::new();
    for r in reports {
        for run in &r.runs {
            if !pipelines.contains(&run.pipeline.as_str()) {
                pipelines.push(&run.pipeline);
            }
        }
    }
    let name_w = reports.iter().map(|r| r.name.len()).max().unwrap_or(0).max("experiment".len());
    let col_w: Vec<usize> = pipelines.iter().map(|p| (p.len() + 5).max(8)).collect();
    let mut out = format!("{:<name_w$}", "experiment");
    for (p, &w) in pipelines.iter().zip(&col_w) {
        out += &format!("  {:>w$}  {:>8}", format!("{p} Dice"), "time (s)");
    }
    out.push('\n');
    for r in reports {
        out += &format!("{:<name_w$}", r.name);
        for (p, &w) in pipelines.iter().zip(&col_w) {
            match r.runs.iter().find(|run| run.pipeline == *p) {
                Some(run) => out += &format!("  {:>w$.3}  {:>8.2}", run.weighted_dice, run.seconds),
                None => out += &format!("  {:>w$}  {:>8}", "-", "-"),
            }
        }
        out.push('\n');
    }
    out
}
