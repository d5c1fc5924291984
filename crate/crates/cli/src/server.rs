//! JSON API for the human prediction study.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::study::{Study, StudyError};

pub struct ApiError(StudyError);

impl From<StudyError> for ApiError {
    fn from(e: StudyError) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            StudyError::UnknownSession(_) | StudyError::UnknownGroup(_) => StatusCode::NOT_FOUND,
            StudyError::AlreadyAnswered(_) => StatusCode::CONFLICT,
            StudyError::NotATask { .. } | StudyError::BadOption { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            StudyError::Log { .. } | StudyError::Io(_) => {
                tracing::error!(error = %self.0, "study storage failure");
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        (status, Json(json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Deserialize)]
pub struct PredictionBody {
    pub group_id: String,
    pub option_index: usize,
}

async fn create_session(State(study): State<Arc<Study>>) -> ApiResult<impl IntoResponse> {
    let view = study.create_session()?;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "session_id": view.session_id, "tasks": view.tasks })),
    ))
}

async fn get_session(State(study): State<Arc<Study>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(study.session_view(&id)?))
}

async fn get_group(State(study): State<Arc<Study>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let view = study.group_view(&id)?;
    Ok(Json(json!({ "members": view.members, "options": view.options })))
}

async fn post_prediction(
    State(study): State<Arc<Study>>,
    Path(id): Path<String>,
    Json(body): Json<PredictionBody>,
) -> ApiResult<impl IntoResponse> {
    let done = study.submit(&id, &body.group_id, body.option_index)?;
    Ok((StatusCode::CREATED, Json(done)))
}

async fn get_summary(State(study): State<Arc<Study>>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(study.summary(&id)?))
}

pub fn router(study: Arc<Study>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/predictions", post(post_prediction))
        .route("/api/sessions/{id}/summary", get(get_summary))
        .route("/api/groups/{id}", get(get_group))
        .with_state(study);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(study: Arc<Study>, static_dir: Option<PathBuf>, addr: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "study server listening");
    axum::serve(listener, router(study, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
