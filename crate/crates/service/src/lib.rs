//! Local HTTP API over a coded corpus.
//!
//! Reads are served from the last committed [`Snapshot`]; annotation writes
//! go through a single writer and bump the revision. Every response carries
//! the revision it was computed at, in the `X-Revision` header and in the
//! body. Analysis views are rendered by [`Project::view_json`], so they match
//! the command line output byte for byte.

mod state;

use std::net::{Ipv4Addr, SocketAddr};
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tsd_core::annotation::Annotation;
use tsd_core::corpus::{Document, TextType, Topic};
use tsd_core::{Project, TextMetrics, View};

pub use state::{AppState, MutationError, Snapshot};

pub const REVISION_HEADER: &str = "x-revision";
pub const DEFAULT_PORT: u16 = 7878;

pub fn default_addr(port: u16) -> SocketAddr {
    SocketAddr::from((Ipv4Addr::LOCALHOST, port))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/documents", get(list_documents))
        .route("/documents/{id}", get(get_document))
        .route("/documents/{id}/annotations", get(document_annotations))
        .route("/documents/{id}/metrics", get(document_metrics))
        .route("/annotations", post(create_annotation))
        .route("/annotations/{key}", delete(delete_annotation))
        .route("/analysis/{view}", get(analysis_view))
        .route("/scheme", get(get_scheme))
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[derive(Debug, Serialize)]
struct DocumentSummary<'a> {
    id: &'a str,
    author: &'a str,
    title: &'a str,
    date: NaiveDate,
    text_type: TextType,
    topic: Topic,
    word_count: usize,
    char_len: usize,
}

impl<'a> From<&'a Document> for DocumentSummary<'a> {
    fn from(d: &'a Document) -> Self {
        Self {
            id: &d.id,
            author: &d.author,
            title: &d.title,
            date: d.date,
            text_type: d.text_type,
            topic: d.topic,
            word_count: d.word_count,
            char_len: d.char_len(),
        }
    }
}

#[derive(Debug, Serialize)]
struct KeyedAnnotation<'a> {
    key: String,
    #[serde(flatten)]
    annotation: &'a Annotation,
}

impl<'a> From<&'a Annotation> for KeyedAnnotation<'a> {
    fn from(a: &'a Annotation) -> Self {
        Self {
            key: a.key(),
            annotation: a,
        }
    }
}

/// Body of `POST /annotations`. `created_at` defaults to the server clock.
#[derive(Debug, Deserialize)]
pub struct NewAnnotation {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub code: String,
    pub annotator: String,
    #[serde(default)]
    pub note: Option<String>,
    #[serde(default)]
    pub created_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Serialize)]
struct Violation {
    kind: &'static str,
    message: String,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    revision: u64,
    error: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    violations: Vec<Violation>,
}

fn with_revision(mut resp: Response, revision: u64) -> Response {
    resp.headers_mut()
        .insert(REVISION_HEADER, HeaderValue::from(revision));
    resp
}

fn ok<T: Serialize>(revision: u64, body: T) -> Response {
    with_revision(Json(body).into_response(), revision)
}

fn error(status: StatusCode, revision: u64, error: &'static str, message: String) -> Response {
    error_with(status, revision, error, message, Vec::new())
}

fn error_with(
    status: StatusCode,
    revision: u64,
    error: &'static str,
    message: String,
    violations: Vec<Violation>,
) -> Response {
    let body = ErrorBody {
        revision,
        error,
        message,
        violations,
    };
    with_revision((status, Json(body)).into_response(), revision)
}

fn unknown_document(revision: u64, id: &str) -> Response {
    error(
        StatusCode::NOT_FOUND,
        revision,
        "unknown document",
        format!("unknown document: {id}"),
    )
}

fn metrics_for(project: &Project, doc_id: &str) -> Result<TextMetrics, String> {
    project.document_metrics(doc_id).map_err(|e| e.to_string())
}

async fn list_documents(State(state): State<Arc<AppState>>) -> Response {
    #[derive(Serialize)]
    struct Body<'a> {
        revision: u64,
        documents: Vec<DocumentSummary<'a>>,
    }
    let snap = state.snapshot();
    ok(
        snap.revision,
        Body {
            revision: snap.revision,
            documents: snap.project.corpus.documents().map(Into::into).collect(),
        },
    )
}

async fn get_document(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    #[derive(Serialize)]
    struct Body<'a> {
        revision: u64,
        document: &'a Document,
    }
    let snap = state.snapshot();
    match snap.project.corpus.document(&id) {
        Some(document) => ok(
            snap.revision,
            Body {
                revision: snap.revision,
                document,
            },
        ),
        None => unknown_document(snap.revision, &id),
    }
}

async fn document_annotations(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Response {
    #[derive(Serialize)]
    struct Body<'a> {
        revision: u64,
        doc_id: &'a str,
        annotations: Vec<KeyedAnnotation<'a>>,
    }
    let snap = state.snapshot();
    if snap.project.corpus.document(&id).is_none() {
        return unknown_document(snap.revision, &id);
    }
    ok(
        snap.revision,
        Body {
            revision: snap.revision,
            doc_id: &id,
            annotations: snap.project.annotations.for_document(&id).map(Into::into).collect(),
        },
    )
}

#[derive(Serialize)]
struct MetricsBody {
    revision: u64,
    metrics: TextMetrics,
}

async fn document_metrics(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    let snap = state.snapshot();
    if snap.project.corpus.document(&id).is_none() {
        return unknown_document(snap.revision, &id);
    }
    match metrics_for(&snap.project, &id) {
        Ok(metrics) => ok(
            snap.revision,
            MetricsBody {
                revision: snap.revision,
                metrics,
            },
        ),
        Err(message) => error(StatusCode::INTERNAL_SERVER_ERROR, snap.revision, "metrics", message),
    }
}

#[derive(Serialize)]
struct MutationBody<'a> {
    revision: u64,
    key: String,
    annotation: &'a Annotation,
    metrics: TextMetrics,
}

fn mutation_response(snap: &Snapshot, annotation: &Annotation) -> Response {
    match metrics_for(&snap.project, &annotation.doc_id) {
        Ok(metrics) => ok(
            snap.revision,
            MutationBody {
                revision: snap.revision,
                key: annotation.key(),
                annotation,
                metrics,
            },
        ),
        Err(message) => error(StatusCode::INTERNAL_SERVER_ERROR, snap.revision, "metrics", message),
    }
}

fn mutation_error(state: &AppState, e: MutationError) -> Response {
    let revision = state.snapshot().revision;
    let message = e.to_string();
    match e {
        MutationError::UnknownDocument(id) => unknown_document(revision, &id),
        MutationError::Invalid(problems) => {
            let violations = problems
                .iter()
                .map(|p| Violation {
                    kind: p.kind().map_or("invalid", |k| k.as_str()),
                    message: p.to_string(),
                })
                .collect();
            error_with(StatusCode::BAD_REQUEST, revision, "validation", message, violations)
        }
        MutationError::Duplicate(_) => error(StatusCode::CONFLICT, revision, "duplicate", message),
        MutationError::UnknownKey(_) => {
            error(StatusCode::NOT_FOUND, revision, "unknown annotation", message)
        }
        MutationError::Persist { .. } => {
            error(StatusCode::INTERNAL_SERVER_ERROR, revision, "persist", message)
        }
    }
}

async fn create_annotation(
    State(state): State<Arc<AppState>>,
    payload: Result<Json<NewAnnotation>, JsonRejection>,
) -> Response {
    let Json(req) = match payload {
        Ok(p) => p,
        Err(rejection) => {
            return error(
                StatusCode::BAD_REQUEST,
                state.snapshot().revision,
                "malformed request",
                rejection.body_text(),
            )
        }
    };
    let ann = Annotation {
        doc_id: req.doc_id,
        start: req.start,
        end: req.end,
        code_id: req.code,
        annotator: req.annotator,
        created_at: req.created_at.unwrap_or_else(Utc::now),
        note: req.note,
    };
    let stored = ann.clone();
    match state.add_annotation(ann).await {
        Ok(snap) => mutation_response(&snap, &stored),
        Err(e) => mutation_error(&state, e),
    }
}

async fn delete_annotation(
    State(state): State<Arc<AppState>>,
    Path(key): Path<String>,
) -> Response {
    match state.remove_annotation(&key).await {
        Ok((removed, snap)) => mutation_response(&snap, &removed),
        Err(e) => mutation_error(&state, e),
    }
}

async fn analysis_view(State(state): State<Arc<AppState>>, Path(view): Path<String>) -> Response {
    let snap = state.snapshot();
    let Ok(view) = view.parse::<View>() else {
        return error(
            StatusCode::NOT_FOUND,
            snap.revision,
            "unknown view",
            format!("unknown view: {view}"),
        );
    };
    match snap.project.view_json(view, snap.revision) {
        Ok(body) => with_revision(
            ([(header::CONTENT_TYPE, "application/json")], body).into_response(),
            snap.revision,
        ),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, snap.revision, "analysis", e.to_string()),
    }
}

/// The scheme file itself, so a client palette mirrors it exactly.
async fn get_scheme(State(state): State<Arc<AppState>>) -> Response {
    let snap = state.snapshot();
    with_revision(
        (
            [(header::CONTENT_TYPE, "application/json")],
            snap.project.scheme.to_json(),
        )
            .into_response(),
        snap.revision,
    )
}
