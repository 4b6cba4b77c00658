//! The sealed environment: the only channel through which strategies and intelligent
//! systems observe a stage's rules.
//!
//! Besides the three probing calls (`get_valid_moves`, `simulate_move`,
//! `evaluate_board`) the handle answers two game-flow questions, `next_player` and
//! `declare_winner`, which a referee would otherwise answer during play. Neither reveals
//! a flag directly; both only report what the hidden rules decide for a given board.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, Cell, Player, Position};
use crate::clock::Clock;
use crate::game::{score_winner, Winner};
use crate::rules::{self, count_discs};
use crate::stage::{public_view, SanitizedStageConfig, StageConfig};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("board is {got}x{got}, stage expects {expected}x{expected}")]
    SizeMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationResult {
    pub valid: bool,
    pub resulting_board: Board,
    pub captured_count: usize,
}

/// Heuristic evaluation from `player`'s perspective.
///
/// `total_score = piece_score + 2 * mobility_score + corner_score`, with corners
/// weighted 25 each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoardEvaluation {
    pub piece_score: i32,
    pub mobility_score: i32,
    pub corner_score: i32,
    pub total_score: i32,
}

pub const CORNER_WEIGHT: i32 = 25;
pub const MOBILITY_WEIGHT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ApiUsage {
    pub valid_moves_calls: u64,
    pub simulate_calls: u64,
    pub evaluate_calls: u64,
    pub next_player_calls: u64,
    pub declare_winner_calls: u64,
    /// Time spent inside environment calls.
    #[serde(with = "duration_ms")]
    pub elapsed: Duration,
}

impl ApiUsage {
    pub fn total_calls(&self) -> u64 {
        self.valid_moves_calls
            + self.simulate_calls
            + self.evaluate_calls
            + self.next_player_calls
            + self.declare_winner_calls
    }
}

pub(crate) mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

#[derive(Debug, Default)]
struct Counters {
    valid_moves: AtomicU64,
    simulate: AtomicU64,
    evaluate: AtomicU64,
    next_player: AtomicU64,
    declare_winner: AtomicU64,
    elapsed_nanos: AtomicU64,
}

const NO_CUTOFF: u64 = u64::MAX;

/// A stage bound behind the environment API, with usage accounting.
///
/// Once the clock passes the optional cutoff every call degrades to an empty answer
/// (no moves, invalid simulation, zero evaluation, game over). Searches that ignore
/// their own budget therefore unwind quickly after the referee has already ruled.
#[derive(Debug)]
pub struct EnvHandle {
    stage: StageConfig,
    clock: Arc<Clock>,
    counters: Counters,
    cutoff_nanos: AtomicU64,
}

impl EnvHandle {
    pub fn new(stage: StageConfig, clock: Arc<Clock>) -> EnvHandle {
        EnvHandle { stage, clock, counters: Counters::default(), cutoff_nanos: AtomicU64::new(NO_CUTOFF) }
    }

    /// Rule-free description of the bound stage.
    pub fn stage_view(&self) -> SanitizedStageConfig {
        public_view(&self.stage)
    }

    pub fn board_size(&self) -> usize {
        self.stage.board_size
    }

    pub fn clock(&self) -> &Arc<Clock> {
        &self.clock
    }

    pub fn set_cutoff(&self, at: Option<Duration>) {
        let nanos = at.map_or(NO_CUTOFF, |d| d.as_nanos().min(NO_CUTOFF as u128 - 1) as u64);
        self.cutoff_nanos.store(nanos, Ordering::Relaxed);
    }

    pub fn is_cut_off(&self) -> bool {
        let cutoff = self.cutoff_nanos.load(Ordering::Relaxed);
        cutoff != NO_CUTOFF && self.clock.now().as_nanos() as u64 > cutoff
    }

    pub fn usage(&self) -> ApiUsage {
        let c = &self.counters;
        ApiUsage {
            valid_moves_calls: c.valid_moves.load(Ordering::Relaxed),
            simulate_calls: c.simulate.load(Ordering::Relaxed),
            evaluate_calls: c.evaluate.load(Ordering::Relaxed),
            next_player_calls: c.next_player.load(Ordering::Relaxed),
            declare_winner_calls: c.declare_winner.load(Ordering::Relaxed),
            elapsed: Duration::from_nanos(c.elapsed_nanos.load(Ordering::Relaxed)),
        }
    }

    fn metered<T>(&self, counter: &AtomicU64, f: impl FnOnce() -> T) -> T {
        counter.fetch_add(1, Ordering::Relaxed);
        let spent = match self.clock.unit_cost() {
            Some(cost) => {
                self.clock.charge(1);
                let out = f();
                self.counters.elapsed_nanos.fetch_add(cost.as_nanos() as u64, Ordering::Relaxed);
                return out;
            }
            None => Instant::now(),
        };
        let out = f();
        self.counters.elapsed_nanos.fetch_add(spent.elapsed().as_nanos() as u64, Ordering::Relaxed);
        out
    }

    fn check_size(&self, board: &Board) -> Result<(), EnvError> {
        if board.size() != self.stage.board_size {
            return Err(EnvError::SizeMismatch { got: board.size(), expected: self.stage.board_size });
        }
        Ok(())
    }

    pub fn get_valid_moves(&self, board: &Board, player: Player) -> Result<Vec<Position>, EnvError> {
        self.check_size(board)?;
        if self.is_cut_off() {
            return Ok(Vec::new());
        }
        Ok(self.metered(&self.counters.valid_moves, || rules::get_valid_moves(board, player, &self.stage.rules)))
    }

    pub fn simulate_move(&self, board: &Board, player: Player, row: usize, col: usize) -> SimulationResult {
        let invalid = || SimulationResult { valid: false, resulting_board: board.clone(), captured_count: 0 };
        if board.size() != self.stage.board_size || self.is_cut_off() {
            return invalid();
        }
        self.metered(&self.counters.simulate, || {
            let mut next = board.clone();
            match rules::place(&mut next, player, Position::new(row, col), &self.stage.rules) {
                Some(flips) => SimulationResult { valid: true, resulting_board: next, captured_count: flips.len() },
                None => invalid(),
            }
        })
    }

    pub fn evaluate_board(&self, board: &Board, player: Player) -> BoardEvaluation {
        if board.size() != self.stage.board_size || self.is_cut_off() {
            return BoardEvaluation::default();
        }
        self.metered(&self.counters.evaluate, || evaluate(board, player, &self.stage.rules))
    }

    /// Side to act after `mover` moved on `board`, or `None` when the game is over.
    pub fn next_player(&self, board: &Board, mover: Player) -> Option<Player> {
        if board.size() != self.stage.board_size || self.is_cut_off() {
            return None;
        }
        self.metered(&self.counters.next_player, || rules::determine_next_player(board, mover, &self.stage.rules))
    }

    /// Who would win if the game ended on `board`.
    pub fn declare_winner(&self, board: &Board) -> Winner {
        if board.size() != self.stage.board_size || self.is_cut_off() {
            return Winner::Tie;
        }
        self.metered(&self.counters.declare_winner, || {
            let counts = count_discs(board);
            score_winner(counts.black, counts.white, &self.stage.rules)
        })
    }
}

fn evaluate(board: &Board, player: Player, rules: &rules::RuleSet) -> BoardEvaluation {
    let counts = count_discs(board);
    let piece_score = counts.of(player) as i32 - counts.of(player.opponent()) as i32;
    let own_moves = rules::get_valid_moves(board, player, rules).len() as i32;
    let opp_moves = rules::get_valid_moves(board, player.opponent(), rules).len() as i32;
    let mobility_score = own_moves - opp_moves;
    let (own, opp) = (player.cell(), player.opponent().cell());
    let corners = board.corners();
    let held = |c: Cell| corners.iter().filter(|&&p| board.get(p) == c).count() as i32;
    let corner_score = CORNER_WEIGHT * (held(own) - held(opp));
    BoardEvaluation {
        piece_score,
        mobility_score,
        corner_score,
        total_score: piece_score + MOBILITY_WEIGHT * mobility_score + corner_score,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stage::{find_builtin, C_SQUARES_ID, OCCLUSION_ID, STANDARD_ID};

    fn env(id: &str) -> EnvHandle {
        EnvHandle::new(find_builtin(id).unwrap().stage, Arc::new(Clock::wall()))
    }

    fn figure_board() -> Board {
        let mut b = Board::empty(8).unwrap();
        b.set(Position::new(0, 0), Cell::Black);
        b.set(Position::new(0, 1), Cell::Blocked);
        b.set(Position::new(0, 2), Cell::White);
        b.set(Position::new(0, 3), Cell::White);
        b
    }

    #[test]
    fn valid_moves_through_env() {
        let e = env(STANDARD_ID);
        let b = e.stage_view().initial_board;
        assert_eq!(e.get_valid_moves(&b, Player::Black).unwrap().len(), 4);
        assert!(e.get_valid_moves(&figure_board(), Player::Black).unwrap().is_empty());
        assert!(env(OCCLUSION_ID)
            .get_valid_moves(&figure_board(), Player::Black)
            .unwrap()
            .contains(&Position::new(0, 4)));
        assert!(!env(C_SQUARES_ID)
            .get_valid_moves(&figure_board(), Player::Black)
            .unwrap()
            .contains(&Position::new(0, 4)));
        let small = Board::empty(6).unwrap();
        assert!(matches!(e.get_valid_moves(&small, Player::Black), Err(EnvError::SizeMismatch { .. })));
    }

    #[test]
    fn simulate_examples() {
        let e = env(STANDARD_ID);
        let b = e.stage_view().initial_board;
        let r = e.simulate_move(&b, Player::Black, 2, 3);
        assert!(r.valid);
        assert_eq!(r.captured_count, 1);
        let r = e.simulate_move(&b, Player::Black, 0, 0);
        assert!(!r.valid);
        assert_eq!(r.resulting_board, b);
        assert_eq!(r.captured_count, 0);
        let r = env(OCCLUSION_ID).simulate_move(&figure_board(), Player::Black, 0, 4);
        assert!(r.valid);
        assert_eq!(r.captured_count, 2);
    }

    #[test]
    fn evaluation_examples() {
        let e = env(STANDARD_ID);
        let b = e.stage_view().initial_board;
        assert_eq!(e.evaluate_board(&b, Player::Black), BoardEvaluation::default());

        let mut b = b.clone();
        b.set(Position::new(0, 0), Cell::Black);
        b.set(Position::new(7, 7), Cell::White);
        b.set(Position::new(0, 7), Cell::Black);
        let ev = e.evaluate_board(&b, Player::Black);
        assert_eq!(ev.corner_score, 25);
    }

    #[test]
    fn usage_counts_every_call() {
        let e = env(STANDARD_ID);
        let b = e.stage_view().initial_board;
        for _ in 0..3 {
            e.get_valid_moves(&b, Player::White).unwrap();
        }
        e.simulate_move(&b, Player::Black, 2, 3);
        e.evaluate_board(&b, Player::Black);
        e.evaluate_board(&b, Player::White);
        e.next_player(&b, Player::Black);
        let u = e.usage();
        assert_eq!((u.valid_moves_calls, u.simulate_calls, u.evaluate_calls, u.next_player_calls), (3, 1, 2, 1));
        assert_eq!(u.total_calls(), 7);
    }

    #[test]
    fn cutoff_degrades_answers() {
        let clock = Arc::new(Clock::virtual_with(Duration::from_millis(1)));
        let e = EnvHandle::new(find_builtin(STANDARD_ID).unwrap().stage, clock.clone());
        let b = e.stage_view().initial_board;
        e.set_cutoff(Some(Duration::from_millis(2)));
        assert_eq!(e.get_valid_moves(&b, Player::Black).unwrap().len(), 4);
        clock.charge(5);
        assert!(e.is_cut_off());
        assert!(e.get_valid_moves(&b, Player::Black).unwrap().is_empty());
        assert!(!e.simulate_move(&b, Player::Black, 2, 3).valid);
        assert_eq!(e.next_player(&b, Player::Black), None);
        e.set_cutoff(None);
        assert!(!e.is_cut_off());
    }
}
