//! Rule inference from observed behavior.

use serde::{Deserialize, Serialize};

use super::selfplay::SimulationGameLog;
use crate::board::{Board, Cell, Player, Position};
use crate::env::EnvHandle;
use crate::game::Winner;
use crate::stage::SanitizedStageConfig;

pub const CONSECUTIVE_TURN_THRESHOLD: f64 = 0.05;
pub const BIAS_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlayerBias {
    pub black: f64,
    pub white: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObservedBehaviors {
    pub consecutive_turn_observed: bool,
    pub consecutive_turn_frequency: f64,
    pub consecutive_turn_player_bias: PlayerBias,
    pub capture_through_blocked_cells_observed: bool,
    pub win_condition_reversed_observed: bool,
}

/// Turn statistics and win-condition evidence from self-play logs. The capture flag is
/// left false; see [`occlusion_probe`].
pub fn behaviors_from_logs(logs: &[SimulationGameLog]) -> ObservedBehaviors {
    let mut out = ObservedBehaviors::default();
    let (mut total, mut same, mut black, mut white) = (0usize, 0usize, 0usize, 0usize);
    for log in logs {
        for t in &log.turn_transitions {
            total += 1;
            if t.from == t.to {
                same += 1;
                match t.from {
                    Player::Black => black += 1,
                    Player::White => white += 1,
                }
            }
        }
        let s = log.final_scores;
        if (s.black > s.white && log.winner == Winner::White) || (s.white > s.black && log.winner == Winner::Black) {
            out.win_condition_reversed_observed = true;
        }
    }
    if total > 0 {
        out.consecutive_turn_frequency = same as f64 / total as f64;
        if out.consecutive_turn_frequency > CONSECUTIVE_TURN_THRESHOLD {
            out.consecutive_turn_observed = true;
            if black as f64 > white as f64 * BIAS_RATIO {
                out.consecutive_turn_player_bias.black = black as f64 / same as f64;
            } else if white as f64 > black as f64 * BIAS_RATIO {
                out.consecutive_turn_player_bias.white = white as f64 / same as f64;
            }
        }
    }
    out
}

pub fn infer_behaviors(logs: &[SimulationGameLog], env: &EnvHandle, view: &SanitizedStageConfig) -> ObservedBehaviors {
    ObservedBehaviors {
        capture_through_blocked_cells_observed: occlusion_probe(env, view),
        ..behaviors_from_logs(logs)
    }
}

/// The crafted probe: an empty board whose first row reads
/// `[., place, White, Blocked, Black]` (shifted left by one on boards too narrow for it).
/// Black placing there can only capture by reaching across the blocked cell.
pub fn probe_board(size: usize) -> (Board, Position) {
    let mut b = Board::empty(size).expect("supported size");
    let start = if size >= 5 { 1 } else { 0 };
    b.set(Position::new(0, start + 1), Cell::White);
    b.set(Position::new(0, start + 2), Cell::Blocked);
    b.set(Position::new(0, start + 3), Cell::Black);
    (b, Position::new(0, start))
}

/// Whether captures pass through blocked cells. Stages without blocked cells are
/// answered without any environment call.
pub fn occlusion_probe(env: &EnvHandle, view: &SanitizedStageConfig) -> bool {
    if view.initial_board.blocked().is_empty() {
        return false;
    }
    let (board, at) = probe_board(view.board_size);
    let r = env.simulate_move(&board, Player::Black, at.row, at.col);
    r.valid && r.captured_count > 0
}
