use fuzzyseg::affinity::{AffinityConfig, AffinityModel};
use fuzzyseg::eval::{encode_rgb_png, palette, render_connectedness};
use fuzzyseg::image::GrayImage;
use fuzzyseg::mofs::{segment_image, SeedSpec, SeedsFile, TieRule};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use crate::ServiceConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentRequest {
    pub seeds: SeedsFile,
    #[serde(default)]
    pub affinity: AffinityConfig,
}

/// Everything the UI needs to show one finished revision. PNGs are base64.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub rev: usize,
    pub seeds: SeedsFile,
    pub affinity: AffinityConfig,
    pub width: usize,
    pub height: usize,
    pub objects: usize,
    pub scales: Vec<usize>,
    pub labels_png: String,
    pub render_png: String,
    /// Connectedness map of object `m` at index `m - 1`.
    pub connectedness_png: Vec<String>,
    pub unlabeled_pixels: usize,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub fit_seconds: f64,
    pub segment_seconds: f64,
}

#[derive(Debug, Clone)]
pub(crate) enum Status {
    Running,
    Done(Arc<ResultBundle>),
    Failed(String),
}

impl Status {
    pub(crate) fn name(&self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Done(_) => "done",
            Status::Failed(_) => "failed",
        }
    }
}

#[derive(Debug)]
pub(crate) struct Revision {
    pub request: Arc<SegmentRequest>,
    pub status: Status,
}

#[derive(Debug)]
pub(crate) struct Session {
    pub image: Arc<GrayImage>,
    pub revisions: Vec<Revision>,
}

impl Session {
    pub(crate) fn running(&self) -> bool {
        self.revisions.last().is_some_and(|r| matches!(r.status, Status::Running))
    }

    pub(crate) fn status(&self) -> &'static str {
        self.revisions.last().map_or("idle", |r| r.status.name())
    }
}

pub(crate) type SessionHandle = Arc<Mutex<Session>>;

pub(crate) struct AppState {
    pub(crate) config: ServiceConfig,
    pub(crate) sessions: Mutex<HashMap<String, SessionHandle>>,
}

impl AppState {
    pub(crate) fn new(config: ServiceConfig) -> Self {
        Self { config, sessions: Mutex::new(HashMap::new()) }
    }

    pub(crate) fn session(&self, id: &str) -> Option<SessionHandle> {
        self.sessions.lock().expect("session map lock").get(id).cloned()
    }
}

fn b64(bytes: &[u8]) -> String {
    use base64::Engine;
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

/// Fits the affinities and segments; runs on a blocking thread.
pub(crate) fn run_job(
    image: &GrayImage,
    seeds: &SeedSpec,
    request: &SegmentRequest,
    rev: usize,
) -> Result<ResultBundle, String> {
    let start = Instant::now();
    let model = AffinityModel::fit(image, &seeds.objects, &request.affinity).map_err(|e| e.to_string())?;
    let fit_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let seg = segment_image(image, seeds, &model).map_err(|e| e.to_string())?;
    let segment_seconds = start.elapsed().as_secs_f64();
    let labels = seg.crisp_labels_lenient(TieRule::LowestId);
    let render = render_connectedness(&seg, &palette(seg.objects())).map_err(|e| e.to_string())?;
    let connectedness_png = (1..=seg.objects())
        .map(|m| seg.object_png(m).map(|png| b64(&png)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(ResultBundle {
        rev,
        seeds: request.seeds.clone(),
        affinity: request.affinity,
        width: image.width(),
        height: image.height(),
        objects: seg.objects(),
        scales: model.scales(),
        labels_png: b64(&labels.encode_png()),
        render_png: b64(&encode_rgb_png(&render)),
        connectedness_png,
        unlabeled_pixels: labels.count(0),
        timing: Timing { fit_seconds, segment_seconds },
    })
}
