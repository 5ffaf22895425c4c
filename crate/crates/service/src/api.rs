use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fuzzyseg::autoseed::{auto_seeds, AutoseedConfig, AutoseedError};
use fuzzyseg::image::decode_image;
use fuzzyseg::mofs::SeedsFile;
use serde::Deserialize;
use serde_json::{json, Value};
use std::collections::hash_map::Entry;
use std::sync::{Arc, Mutex};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::session::{run_job, AppState, Revision, SegmentRequest, Session, Status};
use crate::ServiceConfig;

/// Raw upload cap; the pixel cap is enforced after decoding.
const BODY_LIMIT: usize = 256 * 1024 * 1024;

struct ApiError(StatusCode, Value);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn fail(code: StatusCode, msg: impl std::fmt::Display) -> ApiError {
    ApiError(code, json!({ "error": msg.to_string() }))
}

fn not_found(id: &str) -> ApiError {
    fail(StatusCode::NOT_FOUND, format!("no session '{id}'"))
}

fn busy(rev: usize) -> ApiError {
    ApiError(StatusCode::CONFLICT, json!({ "status": "running", "rev": rev, "error": "a job is running" }))
}

type ApiResult = Result<Response, ApiError>;

/// Routes, CORS and the optional static UI directory. Panics if
/// `allow_origin` is not a valid header value.
pub fn router(config: ServiceConfig) -> Router {
    let origin = match &config.allow_origin {
        Some(o) => AllowOrigin::exact(o.parse().expect("allow-origin is a valid header value")),
        None => AllowOrigin::from(Any),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    let static_dir = config.static_dir.clone();
    let state = Arc::new(AppState::new(config));
    let mut app = Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_status))
        .route("/sessions/{id}/segment", post(segment))
        .route("/sessions/{id}/result", get(result))
        .route("/sessions/{id}/autoseed", post(autoseed))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state);
    if let Some(dir) = static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app.layer(cors)
}

async fn healthz() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Deserialize)]
struct CreateParams {
    id: Option<String>,
}

fn valid_id(id: &str) -> bool {
    (1..=64).contains(&id.len()) && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Query(params): Query<CreateParams>,
    body: Bytes,
) -> ApiResult {
    let id = match params.id {
        Some(id) if !valid_id(&id) => {
            return Err(fail(StatusCode::BAD_REQUEST, "session id must be 1-64 characters of [A-Za-z0-9_-]"))
        }
        Some(id) => id,
        None => uuid::Uuid::new_v4().simple().to_string(),
    };
    if state.session(&id).is_some() {
        return Err(fail(StatusCode::CONFLICT, format!("session '{id}' already exists")));
    }
    let image = decode_image(&body).map_err(|e| fail(StatusCode::BAD_REQUEST, e))?;
    if image.len() > state.config.max_pixels {
        return Err(fail(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("{} pixels exceeds the limit of {}", image.len(), state.config.max_pixels),
        ));
    }
    let (width, height) = (image.width(), image.height());
    let session = Session { image: Arc::new(image), revisions: Vec::new() };
    match state.sessions.lock().expect("session map lock").entry(id.clone()) {
        Entry::Occupied(_) => return Err(fail(StatusCode::CONFLICT, format!("session '{id}' already exists"))),
        Entry::Vacant(v) => {
            v.insert(Arc::new(Mutex::new(session)));
        }
    }
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "width": width, "height": height })))
        .into_response())
}

async fn session_status(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let handle = state.session(&id).ok_or_else(|| not_found(&id))?;
    let s = handle.lock().expect("session lock");
    let revisions: Vec<Value> = s
        .revisions
        .iter()
        .enumerate()
        .map(|(rev, r)| json!({ "rev": rev, "status": r.status.name(), "seeds": r.request.seeds, "affinity": r.request.affinity }))
        .collect();
    Ok(Json(json!({
        "id": id,
        "width": s.image.width(),
        "height": s.image.height(),
        "status": s.status(),
        "revisions": revisions,
    }))
    .into_response())
}

async fn segment(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(request): Json<SegmentRequest>,
) -> ApiResult {
    let handle = state.session(&id).ok_or_else(|| not_found(&id))?;
    let (image, seeds, rev, request) = {
        let mut s = handle.lock().expect("session lock");
        if s.running() {
            return Err(busy(s.revisions.len() - 1));
        }
        let seeds = request
            .seeds
            .seed_spec(s.image.width(), s.image.height())
            .map_err(|e| fail(StatusCode::UNPROCESSABLE_ENTITY, e))?;
        request.affinity.validate().map_err(|e| fail(StatusCode::UNPROCESSABLE_ENTITY, e))?;
        let request = Arc::new(request);
        s.revisions.push(Revision { request: request.clone(), status: Status::Running });
        (s.image.clone(), seeds, s.revisions.len() - 1, request)
    };
    let job_handle = handle.clone();
    tokio::task::spawn_blocking(move || {
        let status = match run_job(&image, &seeds, &request, rev) {
            Ok(bundle) => Status::Done(Arc::new(bundle)),
            Err(e) => Status::Failed(e),
        };
        job_handle.lock().expect("session lock").revisions[rev].status = status;
    });
    Ok((StatusCode::ACCEPTED, Json(json!({ "rev": rev, "status": "running" }))).into_response())
}

#[derive(Deserialize)]
struct ResultParams {
    rev: Option<usize>,
}

async fn result(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(params): Query<ResultParams>,
) -> ApiResult {
    let handle = state.session(&id).ok_or_else(|| not_found(&id))?;
    let s = handle.lock().expect("session lock");
    let rev = match params.rev {
        Some(r) => r,
        None => s.revisions.len().checked_sub(1).ok_or_else(|| fail(StatusCode::NOT_FOUND, "no revisions yet"))?,
    };
    let r = s.revisions.get(rev).ok_or_else(|| fail(StatusCode::NOT_FOUND, format!("no revision {rev}")))?;
    match &r.status {
        Status::Running => Err(busy(rev)),
        Status::Failed(e) => Err(ApiError(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({ "status": "failed", "rev": rev, "error": e }),
        )),
        Status::Done(bundle) => Ok(Json(bundle.as_ref()).into_response()),
    }
}

async fn autoseed(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(config): Json<AutoseedConfig>,
) -> ApiResult {
    let handle = state.session(&id).ok_or_else(|| not_found(&id))?;
    let image = {
        let s = handle.lock().expect("session lock");
        if s.running() {
            return Err(busy(s.revisions.len() - 1));
        }
        s.image.clone()
    };
    let outcome = tokio::task::spawn_blocking(move || auto_seeds(&image, &config))
        .await
        .map_err(|e| fail(StatusCode::INTERNAL_SERVER_ERROR, e))?;
    match outcome {
        Ok(found) => Ok(Json(json!({
            "seeds": SeedsFile::from_clicks(&found.clicks),
            "diagnostics": found.diagnostics,
        }))
        .into_response()),
        Err(
            e @ (AutoseedError::BadK { .. }
            | AutoseedError::InvalidConfig(_)
            | AutoseedError::Image(_)
            | AutoseedError::EmptyClass { .. }
            | AutoseedError::SamplingExhausted { .. }),
        ) => Err(fail(StatusCode::UNPROCESSABLE_ENTITY, e)),
        Err(e) => Err(fail(StatusCode::INTERNAL_SERVER_ERROR, e)),
    }
}
