//! JSON query API over a [`SeriesStore`].
//!
//! | route | response |
//! |---|---|
//! | `GET /health` | `{"status":"ok"}` |
//! | `GET /series` | array of series keys |
//! | `GET /series/{key}/range?start=&end=` | array of `{"t":..,"v":..}` |
//! | `GET /stats` | ingestion counters |
//!
//! Keys travel percent-encoded in the path (`/` as `%2F`).

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;

use crate::ingest::IngestStats;
use crate::store::{SeriesKey, SeriesStore, StoreError};

#[derive(Clone)]
struct AppState {
    store: Arc<SeriesStore>,
    stats: Arc<IngestStats>,
}

pub fn router(store: Arc<SeriesStore>, stats: Arc<IngestStats>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/series", get(list_series))
        .route("/series/{key}/range", get(range))
        .route("/stats", get(ingest_stats))
        .with_state(AppState { store, stats })
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn list_series(State(app): State<AppState>) -> Json<Vec<SeriesKey>> {
    Json(app.store.keys())
}

async fn ingest_stats(State(app): State<AppState>) -> impl IntoResponse {
    Json(app.stats.snapshot())
}

#[derive(Debug, Deserialize)]
struct RangeParams {
    start: Option<f64>,
    end: Option<f64>,
}

fn error(status: StatusCode, msg: String) -> Response {
    (status, Json(serde_json::json!({ "error": msg }))).into_response()
}

async fn range(State(app): State<AppState>, Path(key): Path<String>, Query(q): Query<RangeParams>) -> Response {
    let Ok(key) = SeriesKey::new(&key) else {
        return error(StatusCode::NOT_FOUND, format!("unknown series {key}"));
    };
    let start = q.start.unwrap_or(f64::NEG_INFINITY);
    let end = q.end.unwrap_or(f64::INFINITY);
    match app.store.query_range(&key, start, end) {
        // Serialized exactly like a direct serde_json::to_vec of the query.
        Ok(points) => match serde_json::to_vec(&points) {
            Ok(body) => ([(header::CONTENT_TYPE, "application/json")], body).into_response(),
            Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        },
        Err(e @ StoreError::UnknownSeries(_)) => error(StatusCode::NOT_FOUND, e.to_string()),
        Err(e @ StoreError::BadRange { .. }) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}
