//! Game state transitions and outcome determination.

use std::time::Duration;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::board::{Board, Player, Position};
use crate::error::CoreError;
use crate::rules::{count_discs, determine_next_player, place, RuleSet};

/// One placed piece as it appears in histories and logs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MoveRecord {
    pub player: Player,
    pub position: Position,
    pub captured_count: usize,
    /// Decision time of the mover in milliseconds; harness overhead is excluded.
    pub time_spent: u64,
    pub board_after: Board,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub board: Board,
    pub current_player: Player,
    pub consecutive_passes: u8,
    pub history: Vec<MoveRecord>,
    pub time_used: [Duration; 2],
}

fn slot(player: Player) -> usize {
    match player {
        Player::Black => 0,
        Player::White => 1,
    }
}

impl GameState {
    /// Fresh state; if `start` cannot move the turn passes, and if neither side can the
    /// state starts terminal.
    pub fn new(board: Board, start: Player, rules: &RuleSet) -> GameState {
        let mut state = GameState {
            board,
            current_player: start,
            consecutive_passes: 0,
            history: Vec::new(),
            time_used: [Duration::ZERO; 2],
        };
        if !crate::rules::has_valid_move(&state.board, start, rules) {
            if crate::rules::has_valid_move(&state.board, start.opponent(), rules) {
                state.current_player = start.opponent();
                state.consecutive_passes = 1;
            } else {
                state.consecutive_passes = 2;
            }
        }
        state
    }

    pub fn is_terminal(&self) -> bool {
        self.consecutive_passes >= 2
    }

    pub fn time_used_by(&self, player: Player) -> Duration {
        self.time_used[slot(player)]
    }

    pub fn add_time(&mut self, player: Player, spent: Duration) {
        self.time_used[slot(player)] += spent;
    }

    pub fn valid_moves(&self, rules: &RuleSet) -> Vec<Position> {
        if self.is_terminal() {
            return Vec::new();
        }
        crate::rules::get_valid_moves(&self.board, self.current_player, rules)
    }
}

/// Plays `pos` for the side to move and resolves whose turn follows.
///
/// If the next side is the mover because the opponent had no reply, the pass is
/// recorded as `consecutive_passes = 1`; when nobody can move the result is terminal.
pub fn apply_move(state: &GameState, pos: Position, rules: &RuleSet) -> Result<GameState, CoreError> {
    if state.is_terminal() {
        return Err(CoreError::GameOver);
    }
    let mover = state.current_player;
    let mut board = state.board.clone();
    let flips = place(&mut board, mover, pos, rules).ok_or(CoreError::IllegalMove { pos, player: mover.name() })?;
    let mut next = state.clone();
    next.history.push(MoveRecord {
        player: mover,
        position: pos,
        captured_count: flips.len(),
        time_spent: 0,
        board_after: board.clone(),
    });
    next.board = board;
    next.consecutive_passes = 0;
    match determine_next_player(&next.board, mover, rules) {
        Some(p) => {
            let opponent_passed = p == mover && !crate::rules::has_valid_move(&next.board, mover.opponent(), rules);
            if opponent_passed {
                next.consecutive_passes = 1;
            }
            next.current_player = p;
        }
        None => {
            next.consecutive_passes = 2;
            next.current_player = mover.opponent();
        }
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    Tie,
    Black,
    White,
}

impl Winner {
    pub fn code(self) -> u8 {
        match self {
            Winner::Tie => 0,
            Winner::Black => 1,
            Winner::White => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Winner> {
        match code {
            0 => Some(Winner::Tie),
            1 => Some(Winner::Black),
            2 => Some(Winner::White),
            _ => None,
        }
    }

    pub fn of(player: Player) -> Winner {
        match player {
            Player::Black => Winner::Black,
            Player::White => Winner::White,
        }
    }

    pub fn player(self) -> Option<Player> {
        match self {
            Winner::Tie => None,
            Winner::Black => Some(Player::Black),
            Winner::White => Some(Player::White),
        }
    }
}

impl Serialize for Winner {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.code())
    }
}

impl<'de> Deserialize<'de> for Winner {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let code = u8::deserialize(d)?;
        Winner::from_code(code).ok_or_else(|| de::Error::custom(format!("invalid winner {code}, expected 0, 1 or 2")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EndReason {
    Normal,
    TimeForfeit,
    IllegalMove,
}

/// How a game stopped; forfeits name the offending side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameEnd {
    Normal,
    TimeForfeit(Player),
    IllegalMove(Player),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameOutcome {
    pub winner: Winner,
    pub black_score: usize,
    pub white_score: usize,
    pub reason: EndReason,
}

/// Winner by disc count under the stage's win condition, ignoring terminality.
pub fn score_winner(black: usize, white: usize, rules: &RuleSet) -> Winner {
    use std::cmp::Ordering::*;
    match (black.cmp(&white), rules.reverse_win) {
        (Equal, _) => Winner::Tie,
        (Greater, false) | (Less, true) => Winner::Black,
        (Less, false) | (Greater, true) => Winner::White,
    }
}

pub fn game_outcome(state: &GameState, rules: &RuleSet, end: GameEnd) -> Result<GameOutcome, CoreError> {
    let counts = count_discs(&state.board);
    let (winner, reason) = match end {
        GameEnd::Normal => {
            if !state.is_terminal() {
                return Err(CoreError::NotTerminal);
            }
            (score_winner(counts.black, counts.white, rules), EndReason::Normal)
        }
        GameEnd::TimeForfeit(offender) => (Winner::of(offender.opponent()), EndReason::TimeForfeit),
        GameEnd::IllegalMove(offender) => (Winner::of(offender.opponent()), EndReason::IllegalMove),
    };
    Ok(GameOutcome { winner, black_score: counts.black, white_score: counts.white, reason })
}
