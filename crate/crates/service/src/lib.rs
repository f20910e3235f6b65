//! REST + server-sent-events front end for stroke restoration jobs.
//!
//! | route | |
//! |---|---|
//! | `POST /images` | raw PNG/PGM bytes → `{"id"}` (SHA-256 of the bytes) |
//! | `POST /jobs` | `{"image_id", "points", "params"}` → `{"job_id"}` |
//! | `GET /jobs/{id}` | job record with every snapshot so far |
//! | `GET /jobs/{id}/events` | SSE: `iteration` events, then one `status` event |
//! | `GET /jobs/{id}/mask.png`, `spline.json`, `trace.csv` | results of a done job |
//! | `GET /healthz` | liveness |

mod store;

use std::convert::Infallible;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::Deserialize;
use serde_json::json;
use strokeforge::pipeline::SamplePoint;

pub use store::{Job, JobParams, JobRecord, JobResults, JobStatus, Snapshot, Store, SubmitError};

/// Largest accepted image upload.
pub const MAX_IMAGE_BYTES: usize = 32 * 1024 * 1024;
pub const DEFAULT_ADDR: &str = "127.0.0.1:8787";

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
}

impl AppState {
    pub fn new(store: Store) -> Self {
        Self { store: Arc::new(store) }
    }
}

/// Service settings from `STROKEFORGE_ADDR` and `STROKEFORGE_DATA_DIR`.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub addr: SocketAddr,
    pub data_dir: Option<PathBuf>,
}

impl Settings {
    pub fn from_env() -> Result<Self, String> {
        let addr = std::env::var("STROKEFORGE_ADDR").unwrap_or_else(|_| DEFAULT_ADDR.into());
        let addr = addr
            .parse()
            .map_err(|e| format!("STROKEFORGE_ADDR {addr:?}: {e}"))?;
        let data_dir = std::env::var_os("STROKEFORGE_DATA_DIR").map(PathBuf::from);
        Ok(Self { addr, data_dir })
    }
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn not_found(what: &str, id: &str) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, format!("unknown {what} {id}"))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route(
            "/images",
            post(upload_image).layer(DefaultBodyLimit::max(MAX_IMAGE_BYTES)),
        )
        .route("/jobs", post(submit_job))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/events", get(job_events))
        .route("/jobs/{id}/mask.png", get(job_mask))
        .route("/jobs/{id}/spline.json", get(job_spline))
        .route("/jobs/{id}/trace.csv", get(job_trace))
        .with_state(state)
}

/// Binds and serves until the process is stopped.
pub async fn serve(settings: Settings) -> std::io::Result<()> {
    let store = match &settings.data_dir {
        Some(dir) => Store::open(dir)?,
        None => Store::in_memory(),
    };
    let listener = tokio::net::TcpListener::bind(settings.addr).await?;
    axum::serve(listener, router(AppState::new(store))).await
}

async fn upload_image(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let store = state.store.clone();
    let id = tokio::task::spawn_blocking(move || store.add_image(&body))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| {
            use strokeforge::Error::*;
            let code = match e {
                NotGrayscale(_) | UnsupportedFormat(_) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
                Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
                _ => StatusCode::BAD_REQUEST,
            };
            ApiError(code, e.to_string())
        })?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

#[derive(Deserialize)]
struct JobRequest {
    image_id: String,
    points: Vec<SamplePoint>,
    #[serde(default)]
    params: JobParams,
}

async fn submit_job(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: JobRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.to_string()))?;
    let job = state
        .store
        .submit(&req.image_id, req.points, req.params)
        .map_err(|e| match e {
            SubmitError::UnknownImage(id) => not_found("image", &id),
            SubmitError::Invalid(e) => ApiError(StatusCode::BAD_REQUEST, e.to_string()),
        })?;
    let id = job.record().id;
    let store = state.store.clone();
    tokio::task::spawn_blocking(move || store.run(&job));
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": id }))))
}

fn find_job(state: &AppState, id: &str) -> Result<Arc<Job>, ApiError> {
    state.store.job(id).ok_or_else(|| not_found("job", id))
}

async fn get_job(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<JobRecord>, ApiError> {
    Ok(Json(find_job(&state, &id)?.record()))
}

fn iteration_event(snap: &Snapshot) -> Event {
    Event::default()
        .event("iteration")
        .id(snap.iteration.to_string())
        .json_data(snap)
        .expect("snapshot serializes")
}

fn status_event(status: JobStatus, error: Option<String>) -> Event {
    Event::default()
        .event("status")
        .json_data(json!({ "status": status, "error": error }))
        .expect("status serializes")
}

/// Replays stored snapshots, then follows new ones until the job ends.
fn progress_stream(job: Arc<Job>) -> impl Stream<Item = Result<Event, Infallible>> {
    // Subscribe before the first read so no update is missed.
    let rx = job.subscribe();
    stream::unfold((job, rx, 0usize, false), |(job, mut rx, cursor, closed)| async move {
        if closed {
            return None;
        }
        loop {
            match job.snapshot_or_status(cursor) {
                Ok(snap) => return Some((Ok(iteration_event(&snap)), (job, rx, cursor + 1, false))),
                Err((status, error)) if status.is_terminal() => {
                    return Some((Ok(status_event(status, error)), (job, rx, cursor, true)));
                }
                Err(_) => {
                    if rx.changed().await.is_err() {
                        return None;
                    }
                }
            }
        }
    })
}

async fn job_events(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let job = find_job(&state, &id)?;
    Ok(Sse::new(progress_stream(job)).keep_alive(KeepAlive::default()))
}

fn finished(state: &AppState, id: &str) -> Result<Arc<JobResults>, ApiError> {
    let job = find_job(state, id)?;
    job.results().ok_or_else(|| {
        let rec = job.record();
        ApiError(
            StatusCode::CONFLICT,
            format!("job {id} is {:?}, results exist only once it is done", rec.status).to_lowercase(),
        )
    })
}

async fn job_mask(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let r = finished(&state, &id)?;
    Ok(([(header::CONTENT_TYPE, "image/png")], r.mask_png.clone()).into_response())
}

async fn job_spline(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let r = finished(&state, &id)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], r.spline_json.clone()).into_response())
}

async fn job_trace(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let r = finished(&state, &id)?;
    Ok(([(header::CONTENT_TYPE, "text/csv")], r.trace_csv.clone()).into_response())
}
