//! Wire types of the session service, shared with its client.
//!
//! Bodies use the structured-log vocabulary: cells and players as codes (0 empty,
//! 1 black, 2 white, 3 blocked), positions as `{row, col}`. No type here carries a
//! rule set.

use serde::{Deserialize, Serialize};

use crate::board::{Board, Player, Position};
use crate::game::{GameOutcome, MoveRecord, Winner};
use crate::log::GameLog;
use crate::stage::{public_view, CatalogEntry, Visibility};
use crate::tournament::{LeaderboardRow, SystemScore, TournamentReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageSummary {
    pub id: String,
    pub name: String,
    pub board_size: usize,
    pub visibility: Visibility,
    pub initial_board: Board,
    pub start_player: Player,
}

impl From<&CatalogEntry> for StageSummary {
    fn from(entry: &CatalogEntry) -> Self {
        let view = public_view(&entry.stage);
        StageSummary {
            id: view.id,
            name: view.name,
            board_size: view.board_size,
            visibility: entry.visibility,
            initial_board: view.initial_board,
            start_player: view.start_player,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CreateSessionRequest {
    pub stage_id: String,
    pub human_color: Player,
    pub opponent_id: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SessionStatus {
    AwaitingHuman,
    AwaitingAi,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub id: String,
    pub stage_id: String,
    pub stage_name: String,
    pub board_size: usize,
    pub human_color: Player,
    pub opponent_id: String,
    pub opponent_name: String,
    pub status: SessionStatus,
    pub board: Board,
    /// Side to act; `None` once finished.
    pub current_player: Option<Player>,
    /// Legal targets for the human; empty unless awaiting the human.
    pub valid_moves: Vec<Position>,
    pub black_score: usize,
    pub white_score: usize,
    pub move_count: usize,
    /// Sequence number of the latest event.
    pub seq: u64,
    pub outcome: Option<GameOutcome>,
}

/// Pushed on the session's event stream and returned from move posts, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum SessionEvent {
    #[serde(rename_all = "camelCase")]
    Move {
        seq: u64,
        #[serde(rename = "move")]
        record: MoveRecord,
        /// Whether the move came from the AI opponent.
        by_ai: bool,
    },
    #[serde(rename_all = "camelCase")]
    GameOver { seq: u64, outcome: GameOutcome },
}

impl SessionEvent {
    pub fn seq(&self) -> u64 {
        match self {
            SessionEvent::Move { seq, .. } | SessionEvent::GameOver { seq, .. } => *seq,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SessionEvent::Move { .. } => "move",
            SessionEvent::GameOver { .. } => "gameOver",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MoveResponse {
    pub session: SessionView,
    /// The human move followed by every AI reply, each with its board.
    pub events: Vec<SessionEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidMovesResponse {
    pub status: SessionStatus,
    pub valid_moves: Vec<Position>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReplaySummary {
    pub id: String,
    pub stage_id: String,
    pub stage_name: String,
    pub black_strategy: String,
    pub white_strategy: String,
    pub black_score: usize,
    pub white_score: usize,
    pub winner: Winner,
    pub game_length: usize,
}

impl ReplaySummary {
    pub fn of(id: String, log: &GameLog) -> Self {
        let m = &log.metadata;
        ReplaySummary {
            id,
            stage_id: m.stage_id.clone(),
            stage_name: m.stage_name.clone(),
            black_strategy: m.black_strategy.clone(),
            white_strategy: m.white_strategy.clone(),
            black_score: m.black_score,
            white_score: m.white_score,
            winner: m.winner,
            game_length: m.game_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageLeaderboard {
    pub stage_id: String,
    pub stage_name: String,
    pub visibility: Visibility,
    pub rows: Vec<LeaderboardRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LeaderboardResponse {
    pub report_id: String,
    pub stages: Vec<StageLeaderboard>,
    pub scores: Vec<SystemScore>,
}

impl From<&TournamentReport> for LeaderboardResponse {
    fn from(r: &TournamentReport) -> Self {
        LeaderboardResponse {
            report_id: r.id.clone(),
            stages: r
                .stages
                .iter()
                .map(|s| StageLeaderboard {
                    stage_id: s.stage_id.clone(),
                    stage_name: s.stage_name.clone(),
                    visibility: s.visibility,
                    rows: s.leaderboard.clone(),
                })
                .collect(),
            scores: r.scores.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorBody {
    pub error: String,
    /// Present when a move was rejected: the moves that were legal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_moves: Option<Vec<Position>>,
}
