//! Thin async client for the arena HTTP service.

use reqwest::{Method, RequestBuilder, Response, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use arena_core::api::{
    CreateSessionRequest, ErrorBody, LeaderboardResponse, MoveResponse, ReplaySummary, SessionView, StageSummary,
    ValidMovesResponse,
};
use arena_core::board::Position;
use arena_core::log::{from_structured, GameLog, LogError};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("server returned {status}: {}", .body.error)]
    Api { status: StatusCode, body: ErrorBody },
    #[error("bad game log from server: {0}")]
    Log(#[from] LogError),
    #[error("server returned no game")]
    EmptyLog,
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Api { status, .. } => Some(*status),
            ClientError::Http(e) => e.status(),
            ClientError::Log(_) | ClientError::EmptyLog => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct ArenaClient {
    base: String,
    http: reqwest::Client,
}

impl ArenaClient {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        let base = base.into().trim_end_matches('/').to_string();
        ArenaClient { base, http: reqwest::Client::new() }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}/api/{path}", self.base))
    }

    async fn checked(resp: Response) -> Result<Response> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let text = resp.text().await?;
        let body = serde_json::from_str(&text).unwrap_or(ErrorBody { error: text, valid_moves: None });
        Err(ClientError::Api { status, body })
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T> {
        let resp = Self::checked(self.request(Method::GET, path).send().await?).await?;
        Ok(resp.json().await?)
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let resp = Self::checked(self.request(Method::POST, path).json(body).send().await?).await?;
        Ok(resp.json().await?)
    }

    async fn get_log(&self, path: &str) -> Result<GameLog> {
        let resp = Self::checked(self.request(Method::GET, path).send().await?).await?;
        from_structured(&resp.text().await?)?.into_iter().next().ok_or(ClientError::EmptyLog)
    }

    pub async fn stages(&self) -> Result<Vec<StageSummary>> {
        self.get("stages").await
    }

    pub async fn create_session(&self, request: &CreateSessionRequest) -> Result<SessionView> {
        self.post("sessions", request).await
    }

    pub async fn session(&self, id: &str) -> Result<SessionView> {
        self.get(&format!("sessions/{id}")).await
    }

    pub async fn post_move(&self, id: &str, position: Position) -> Result<MoveResponse> {
        self.post(&format!("sessions/{id}/moves"), &position).await
    }

    pub async fn valid_moves(&self, id: &str) -> Result<ValidMovesResponse> {
        self.get(&format!("sessions/{id}/valid-moves")).await
    }

    /// Log of a finished session.
    pub async fn session_log(&self, id: &str) -> Result<GameLog> {
        self.get_log(&format!("sessions/{id}/log")).await
    }

    pub async fn replays(&self) -> Result<Vec<ReplaySummary>> {
        self.get("replays").await
    }

    pub async fn replay(&self, id: &str) -> Result<GameLog> {
        self.get_log(&format!("replays/{id}")).await
    }

    pub async fn leaderboards(&self) -> Result<Vec<String>> {
        self.get("leaderboards").await
    }

    pub async fn leaderboard(&self, id: &str) -> Result<LeaderboardResponse> {
        self.get(&format!("leaderboards/{id}")).await
    }
}
