//! Learned artifacts and the synthesized stage strategy.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::behaviors::ObservedBehaviors;
use super::selfplay::{PositionStats, SimulationGameLog};
use crate::board::{Board, Cell, Player, Position};
use crate::game::Winner;
use crate::rules::count_discs;
use crate::strategy::weights::static_weights;
use crate::strategy::{MoveContext, Strategy, StrategyError};

pub const MIN_PLAYS: u32 = 3;
pub const BOOK_MIN_GAMES: u32 = 2;
pub const BOOK_MIN_RATE: f64 = 0.6;
pub const BOOK_SIZE: usize = 3;
pub const BOOK_PLIES: usize = 6;
pub const BOOK_DISC_LIMIT: usize = 12;
pub const DEFAULT_CAPTURE_BONUS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PositionValueMatrix(pub Vec<Vec<i32>>);

impl PositionValueMatrix {
    pub fn get(&self, pos: Position) -> i32 {
        self.0[pos.row][pos.col]
    }

    /// Zeroes every cell that is blocked on `board`.
    pub fn mask_blocked(&mut self, board: &Board) {
        for p in board.blocked() {
            self.0[p.row][p.col] = 0;
        }
    }
}

/// Blends the static base weight of each well-sampled cell with its self-play win rate:
/// `round(base * 0.7 + adjustment * 0.3)` where
/// `adjustment = (wins / plays - 0.5) * 100 * min(1, plays / 10)`.
///
/// Evaluated as an exact fraction so that halves round away from zero reliably.
pub fn blend_cell(base: i32, plays: u32, wins: u32) -> i32 {
    if plays < MIN_PLAYS {
        return base;
    }
    let (p, w, b) = (plays as i64, wins as i64, base as i64);
    let num = 7 * b * p + 15 * (2 * w - p) * p.min(10);
    let den = 10 * p;
    let magnitude = (2 * num.abs() + den) / (2 * den);
    (num.signum() * magnitude) as i32
}

pub fn build_value_matrix(stats: &PositionStats, size: usize, behaviors: &ObservedBehaviors) -> PositionValueMatrix {
    let base = static_weights(size);
    let values = (0..size)
        .map(|r| {
            (0..size)
                .map(|c| {
                    let s = stats.get(Position::new(r, c));
                    let v = blend_cell(base[r][c], s.plays, s.wins);
                    if behaviors.win_condition_reversed_observed {
                        -v
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    PositionValueMatrix(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BookMove {
    pub player: Player,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OpeningBookEntry {
    pub sequence: Vec<BookMove>,
    pub win_rate: f64,
    pub games: u32,
}

/// Aggregates games by their first six moves and keeps the three best-scoring openings
/// with at least two games and a win rate above 0.6. Wins are counted for Black.
pub fn build_opening_book(logs: &[SimulationGameLog]) -> Vec<OpeningBookEntry> {
    let mut openings: IndexMap<Vec<BookMove>, (u32, u32)> = IndexMap::new();
    for log in logs {
        if log.moves.len() < 4 {
            continue;
        }
        let key: Vec<BookMove> =
            log.moves.iter().take(BOOK_PLIES).map(|m| BookMove { player: m.player, position: m.position }).collect();
        let entry = openings.entry(key).or_default();
        entry.0 += 1;
        if log.winner == Winner::Black {
            entry.1 += 1;
        }
    }
    select_openings(openings.into_iter().map(|(sequence, (games, wins))| (sequence, games, wins)))
}

/// Threshold, sort and truncate aggregates given as `(sequence, games, wins)`.
pub fn select_openings(aggregates: impl IntoIterator<Item = (Vec<BookMove>, u32, u32)>) -> Vec<OpeningBookEntry> {
    let mut kept: Vec<OpeningBookEntry> = aggregates
        .into_iter()
        .filter(|&(_, games, wins)| games >= BOOK_MIN_GAMES && wins as f64 / games as f64 > BOOK_MIN_RATE)
        .map(|(sequence, games, wins)| OpeningBookEntry { sequence, win_rate: wins as f64 / games as f64, games })
        .collect();
    kept.sort_by(|a, b| b.win_rate.total_cmp(&a.win_rate));
    kept.truncate(BOOK_SIZE);
    kept
}

/// The stage-tailored decision procedure produced by analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GeneratedStrategy {
    pub matrix: PositionValueMatrix,
    pub book: Vec<OpeningBookEntry>,
    pub behaviors: ObservedBehaviors,
    pub capture_bonus: f64,
}

impl GeneratedStrategy {
    pub fn new(matrix: PositionValueMatrix, book: Vec<OpeningBookEntry>, behaviors: ObservedBehaviors) -> Self {
        GeneratedStrategy { matrix, book, behaviors, capture_bonus: DEFAULT_CAPTURE_BONUS }
    }

    pub fn with_capture_bonus(mut self, bonus: f64) -> Self {
        self.capture_bonus = bonus;
        self
    }

    fn book_move(&self, board: &Board, player: Player, valid: &[Position]) -> Option<Position> {
        if count_discs(board).discs() >= BOOK_DISC_LIMIT {
            return None;
        }
        self.book
            .iter()
            .flat_map(|entry| &entry.sequence)
            .find(|m| m.player == player && valid.contains(&m.position))
            .map(|m| m.position)
    }

    /// Score of playing `m`, or `None` if the environment rejects the move.
    pub fn score_move(&self, ctx: &MoveContext<'_>, m: Position) -> Option<f64> {
        let env = ctx.env;
        let result = env.simulate_move(ctx.board, ctx.player, m.row, m.col);
        if !result.valid {
            return None;
        }
        let mut score = self.matrix.get(m) as f64 + self.capture_bonus * result.captured_count as f64;
        let mobility = env.evaluate_board(&result.resulting_board, ctx.player).mobility_score as f64;
        score += if self.behaviors.win_condition_reversed_observed { -5.0 * mobility } else { 10.0 * mobility };
        let opponent = ctx.player.opponent();
        let replies = env.get_valid_moves(&result.resulting_board, opponent).unwrap_or_default();
        if replies.is_empty() {
            score += 100.0;
        } else {
            let worst = replies
                .iter()
                .filter_map(|r| {
                    let after = env.simulate_move(&result.resulting_board, opponent, r.row, r.col);
                    after.valid.then(|| env.evaluate_board(&after.resulting_board, ctx.player).total_score)
                })
                .min();
            if let Some(worst) = worst {
                score += -0.5 * worst as f64;
            }
        }
        Some(score)
    }

    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("strategy serializes")
    }

    pub fn from_document(doc: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(doc)
    }

    /// Board size the matrix was built for.
    pub fn size(&self) -> usize {
        self.matrix.0.len()
    }
}

impl Strategy for GeneratedStrategy {
    fn id(&self) -> &str {
        "meta-learner"
    }

    fn display_name(&self) -> &str {
        "MetaLearner"
    }

    fn decide(&self, ctx: &mut MoveContext<'_>) -> Result<Position, StrategyError> {
        if ctx.valid_moves.is_empty() {
            return Err(StrategyError::NoMoves);
        }
        if let Some(m) = self.book_move(ctx.board, ctx.player, ctx.valid_moves) {
            return Ok(m);
        }
        let mut best: Option<(Position, f64)> = None;
        for &m in ctx.valid_moves {
            if let Some(s) = self.score_move(ctx, m) {
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((m, s));
                }
            }
        }
        Ok(best.map_or(ctx.valid_moves[0], |(m, _)| m))
    }
}

/// Cells that are blocked in `board`; used to sanity-check masked matrices.
pub fn blocked_cells_zero(matrix: &PositionValueMatrix, board: &Board) -> bool {
    board.positions().filter(|&p| board.get(p) == Cell::Blocked).all(|p| matrix.get(p) == 0)
}
