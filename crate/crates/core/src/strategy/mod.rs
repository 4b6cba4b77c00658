//! Move-decision procedures and the built-in opponents.

mod baselines;
mod search;
pub mod weights;

use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, Player, Position};
use crate::env::EnvHandle;

pub use baselines::{Corners, Greedy, Positional, RandomMover};
pub use search::{alphabeta_search, AlphaBeta, SearchOutcome, SmartSlow};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("no valid moves to choose from")]
    NoMoves,
    #[error("unknown strategy id {0:?}")]
    Unknown(String),
}

/// Everything a strategy may look at when choosing a move.
pub struct MoveContext<'a> {
    pub board: &'a Board,
    pub player: Player,
    /// Legal moves for `player`, row-major. Never empty when a decision is requested.
    pub valid_moves: &'a [Position],
    pub env: &'a EnvHandle,
    pub rng: &'a mut ChaCha8Rng,
    /// What is left of this player's cumulative game budget.
    pub remaining_budget: Duration,
}

impl MoveContext<'_> {
    pub fn elapsed(&self) -> Duration {
        self.env.clock().now()
    }
}

pub trait Strategy: Send + Sync {
    /// Stable identifier, e.g. `greedy`.
    fn id(&self) -> &str;

    /// Name used in logs, e.g. `Greedy`.
    fn display_name(&self) -> &str;

    fn decide(&self, ctx: &mut MoveContext<'_>) -> Result<Position, StrategyError>;
}

impl fmt::Debug for dyn Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Strategy({})", self.id())
    }
}

/// Identifier of an entrant: a built-in name or any custom id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyId(pub String);

impl StrategyId {
    pub fn new(id: impl Into<String>) -> Self {
        StrategyId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub const BUILTIN_IDS: [&str; 7] =
    ["random", "greedy", "corners", "positional", "smart-lv1", "smart-lv2", "smart-lv3-slow"];

pub fn builtin(id: &str) -> Result<Arc<dyn Strategy>, StrategyError> {
    Ok(match id {
        "random" => Arc::new(RandomMover),
        "greedy" => Arc::new(Greedy),
        "corners" => Arc::new(Corners),
        "positional" => Arc::new(Positional),
        "smart-lv1" => Arc::new(AlphaBeta::lv1()),
        "smart-lv2" => Arc::new(AlphaBeta::lv2()),
        "smart-lv3-slow" => Arc::new(SmartSlow::default()),
        other => return Err(StrategyError::Unknown(other.to_string())),
    })
}
