//! `ApiError` responses and extractors whose rejections are `ApiError`s too,
//! so no non-2xx response leaves the server without one.

use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Request};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use omhc_core::api::{ApiError, ErrorCode};
use omhc_core::explorer::ExplorerError;
use omhc_core::llm::{BoardError, LlmError, MindMapError};
use omhc_core::notes::NotesError;
use omhc_core::session::SessionError;
use serde::de::DeserializeOwned;

#[derive(Debug)]
pub struct Failure(pub ApiError);

pub type ApiResult<T> = Result<Json<T>, Failure>;

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.code.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.0)).into_response()
    }
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Failure {
        Failure(e)
    }
}

impl Failure {
    pub fn internal(message: impl Into<String>) -> Failure {
        Failure(ApiError::new(ErrorCode::Internal, message))
    }
}

impl From<NotesError> for Failure {
    fn from(e: NotesError) -> Failure {
        let code = match e {
            NotesError::NotFound(_) => ErrorCode::NotFound,
            _ => ErrorCode::BadRequest,
        };
        Failure(ApiError::new(code, e.to_string()))
    }
}

impl From<ExplorerError> for Failure {
    fn from(e: ExplorerError) -> Failure {
        let code = match &e {
            ExplorerError::StalePath(_) => ErrorCode::StaleView,
            ExplorerError::FilterDirection { .. } => ErrorCode::BadRequest,
            ExplorerError::UnknownPost(_) | ExplorerError::MissingAssignment(_) => ErrorCode::Internal,
        };
        Failure(ApiError::new(code, e.to_string()))
    }
}

impl From<BoardError> for Failure {
    fn from(e: BoardError) -> Failure {
        let code = match e {
            BoardError::NodeNotFound(_) => ErrorCode::NotFound,
            _ => ErrorCode::BadRequest,
        };
        Failure(ApiError::new(code, e.to_string()))
    }
}

impl From<MindMapError> for Failure {
    fn from(e: MindMapError) -> Failure {
        let code = match e {
            MindMapError::NoSuchNode(_) => ErrorCode::NotFound,
            MindMapError::EmptyLabel => ErrorCode::BadRequest,
        };
        Failure(ApiError::new(code, e.to_string()))
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Failure {
        Failure(ApiError::bad_request(e.to_string()))
    }
}

pub fn llm_error(e: &LlmError) -> ApiError {
    match e {
        LlmError::Invalid(m) => ApiError::bad_request(m.clone()),
        other => ApiError::new(ErrorCode::UpstreamLlm, other.to_string()),
    }
}

pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = Failure;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(e) => Err(json_rejection(e)),
        }
    }
}

fn json_rejection(e: JsonRejection) -> Failure {
    Failure(ApiError::bad_request(e.body_text()))
}

pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = Failure;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| ApiQuery(q.0))
            .map_err(|e: QueryRejection| Failure(ApiError::bad_request(e.body_text())))
    }
}

pub struct ApiPath<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned + Send> FromRequestParts<S> for ApiPath<T> {
    type Rejection = Failure;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        axum::extract::Path::<T>::from_request_parts(parts, state)
            .await
            .map(|p| ApiPath(p.0))
            .map_err(|e: PathRejection| Failure(ApiError::bad_request(e.body_text())))
    }
}
