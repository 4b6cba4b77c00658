use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use thiserror::Error;

use arena_core::api::ErrorBody;
use arena_core::board::Position;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("illegal move at ({}, {})", .position.row, .position.col)]
    IllegalMove { position: Position, valid_moves: Vec<Position> },
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::IllegalMove { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let valid_moves = match &self {
            ApiError::IllegalMove { valid_moves, .. } => Some(valid_moves.clone()),
            _ => None,
        };
        (status, Json(ErrorBody { error: self.to_string(), valid_moves })).into_response()
    }
}
