use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use crate::annotator::PatternConfigError;
use crate::ontology::OntologyError;
use crate::rdf::RdfError;
use crate::recommender::ProfileError;
use crate::search::SearchError;

use super::ingest::IngestError;

/// An error as reported to clients: status, stable machine code, message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(serialize_with = "status_code")]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

fn status_code<S: serde::Serializer>(status: &StatusCode, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u16(status.as_u16())
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BAD_REQUEST", message)
    }

    pub fn unknown_parameter(name: &str) -> Self {
        Self::new(
            StatusCode::BAD_REQUEST,
            "UNKNOWN_PARAMETER",
            format!("unknown query parameter '{name}'"),
        )
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", message)
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        let (status, code) = match &e {
            SearchError::UnknownConcept(_) => (StatusCode::NOT_FOUND, "UNKNOWN_CONCEPT"),
            SearchError::UnresolvedLabel(_) => (StatusCode::NOT_FOUND, "UNRESOLVED_LABEL"),
            SearchError::UnknownDocument(_) => (StatusCode::NOT_FOUND, "UNKNOWN_DOCUMENT"),
            SearchError::PatternParse(_) => (StatusCode::BAD_REQUEST, "PATTERN_PARSE_ERROR"),
            SearchError::StaleHit(_) => (StatusCode::CONFLICT, "STALE_HIT"),
            SearchError::EmptyCriteria => (StatusCode::BAD_REQUEST, "EMPTY_CRITERIA"),
            SearchError::EmptyQuery => (StatusCode::BAD_REQUEST, "EMPTY_QUERY"),
            SearchError::DuplicateDocId(_) => (StatusCode::INTERNAL_SERVER_ERROR, "DUPLICATE_DOC_ID"),
            SearchError::Snapshot(_) => (StatusCode::INTERNAL_SERVER_ERROR, "SNAPSHOT_ERROR"),
            SearchError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "IO_ERROR"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<ProfileError> for ApiError {
    fn from(e: ProfileError) -> Self {
        let (status, code) = match &e {
            ProfileError::Unknown(_) => (StatusCode::NOT_FOUND, "UNKNOWN_PROFILE"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "PROFILE_CONFIG_ERROR"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<RdfError> for ApiError {
    fn from(e: RdfError) -> Self {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "INVALID_BASE_IRI",
            e.to_string(),
        )
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Index(e) => e.into(),
            e => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INGEST_FAILED", e.to_string()),
        }
    }
}

impl From<OntologyError> for ApiError {
    fn from(e: OntologyError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "ONTOLOGY_ERROR", e.to_string())
    }
}

impl From<PatternConfigError> for ApiError {
    fn from(e: PatternConfigError) -> Self {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "PATTERN_CONFIG_ERROR",
            e.to_string(),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}
