//! Budgeted self-play through the environment API.

use std::time::Duration;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::board::{Board, Player, Position};
use crate::env::EnvHandle;
use crate::game::Winner;
use crate::rules::{count_discs, DiscCount};
use crate::stage::SanitizedStageConfig;
use crate::strategy::weights::static_weights;

pub const MAX_SIM_GAMES: usize = 3000;
pub const MAX_MOVES_PER_GAME: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimMove {
    pub player: Player,
    pub position: Position,
    pub captured_count: usize,
}

/// `pass` marks a turn handed over because the side to act had no legal move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnTransition {
    pub from: Player,
    pub to: Player,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationGameLog {
    pub moves: Vec<SimMove>,
    pub final_scores: DiscCount,
    /// As declared by the environment, not recomputed from the disc counts.
    pub winner: Winner,
    pub turn_transitions: Vec<TurnTransition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CellStats {
    pub plays: u32,
    pub wins: u32,
    pub black_plays: u32,
    pub black_wins: u32,
    pub white_plays: u32,
    pub white_wins: u32,
}

/// Per-cell play and win tallies. Every move the eventual winner made on a cell
/// credits that cell with a win.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionStats {
    size: usize,
    cells: Vec<CellStats>,
}

impl PositionStats {
    pub fn new(size: usize) -> Self {
        PositionStats { size, cells: vec![CellStats::default(); size * size] }
    }

    pub fn from_logs(size: usize, logs: &[SimulationGameLog]) -> Self {
        let mut stats = PositionStats::new(size);
        for log in logs {
            stats.record(log);
        }
        stats
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, pos: Position) -> CellStats {
        self.cells[pos.row * self.size + pos.col]
    }

    pub fn get_mut(&mut self, pos: Position) -> &mut CellStats {
        &mut self.cells[pos.row * self.size + pos.col]
    }

    pub fn record(&mut self, log: &SimulationGameLog) {
        for m in &log.moves {
            let won = log.winner == Winner::of(m.player);
            let cell = self.get_mut(m.position);
            cell.plays += 1;
            cell.wins += u32::from(won);
            match m.player {
                Player::Black => {
                    cell.black_plays += 1;
                    cell.black_wins += u32::from(won);
                }
                Player::White => {
                    cell.white_plays += 1;
                    cell.white_wins += u32::from(won);
                }
            }
        }
    }
}

/// Rule-agnostic movers used to generate self-play data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMover {
    Random,
    Greedy,
    BasicPositional,
}

impl SimMover {
    pub const ALL: [SimMover; 3] = [SimMover::Random, SimMover::Greedy, SimMover::BasicPositional];

    pub fn choose(
        self,
        env: &EnvHandle,
        board: &Board,
        player: Player,
        moves: &[Position],
        weights: &[Vec<i32>],
        rng: &mut ChaCha8Rng,
    ) -> Position {
        match self {
            SimMover::Random => moves[rng.gen_range(0..moves.len())],
            SimMover::Greedy => {
                let mut best = (moves[0], -1i64);
                for &m in moves {
                    let r = env.simulate_move(board, player, m.row, m.col);
                    if r.valid && r.captured_count as i64 > best.1 {
                        best = (m, r.captured_count as i64);
                    }
                }
                best.0
            }
            SimMover::BasicPositional => {
                let mut best = moves[0];
                for &m in &moves[1..] {
                    if weights[m.row][m.col] > weights[best.row][best.col] {
                        best = m;
                    }
                }
                best
            }
        }
    }
}

fn past(env: &EnvHandle, deadline: Duration) -> bool {
    env.clock().now() >= deadline
}

/// One self-play game, or `None` if the deadline interrupted it.
fn play_one(
    env: &EnvHandle,
    view: &SanitizedStageConfig,
    deadline: Duration,
    movers: [SimMover; 2],
    weights: &[Vec<i32>],
    rng: &mut ChaCha8Rng,
) -> Option<SimulationGameLog> {
    let mut board = view.initial_board.clone();
    let mut current = view.start_player;
    let mut log = SimulationGameLog {
        moves: Vec::new(),
        final_scores: DiscCount::default(),
        winner: Winner::Tie,
        turn_transitions: Vec::new(),
    };
    let mut passes = 0;
    while log.moves.len() < MAX_MOVES_PER_GAME {
        if past(env, deadline) {
            return None;
        }
        let moves = env.get_valid_moves(&board, current).ok()?;
        if moves.is_empty() {
            passes += 1;
            if passes >= 2 {
                break;
            }
            log.turn_transitions.push(TurnTransition { from: current, to: current.opponent(), pass: true });
            current = current.opponent();
            continue;
        }
        passes = 0;
        let mover = movers[usize::from(current == Player::White)];
        let choice = mover.choose(env, &board, current, &moves, weights, rng);
        let sim = env.simulate_move(&board, current, choice.row, choice.col);
        if !sim.valid {
            return None;
        }
        board = sim.resulting_board;
        log.moves.push(SimMove { player: current, position: choice, captured_count: sim.captured_count });
        match env.next_player(&board, current) {
            None => break,
            Some(next) if next == current => {
                // Either the opponent had to pass or the mover genuinely keeps the turn.
                let opponent = current.opponent();
                if env.get_valid_moves(&board, opponent).ok()?.is_empty() {
                    log.turn_transitions.push(TurnTransition { from: current, to: opponent, pass: false });
                    log.turn_transitions.push(TurnTransition { from: opponent, to: current, pass: true });
                } else {
                    log.turn_transitions.push(TurnTransition { from: current, to: current, pass: false });
                }
            }
            Some(next) => {
                log.turn_transitions.push(TurnTransition { from: current, to: next, pass: false });
                current = next;
            }
        }
    }
    if past(env, deadline) {
        return None;
    }
    log.final_scores = count_discs(&board);
    log.winner = env.declare_winner(&board);
    Some(log)
}

/// Plays up to `max_games` games between randomly paired sub-strategies, stopping at
/// `deadline` (an absolute reading of the env clock). Interrupted games are dropped.
pub fn run_self_play(
    env: &EnvHandle,
    view: &SanitizedStageConfig,
    deadline: Duration,
    max_games: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<SimulationGameLog>, PositionStats) {
    let weights = static_weights(view.board_size);
    let mut logs = Vec::new();
    let mut stats = PositionStats::new(view.board_size);
    while logs.len() < max_games && !past(env, deadline) {
        let movers = [*SimMover::ALL.choose(rng).unwrap(), *SimMover::ALL.choose(rng).unwrap()];
        let Some(log) = play_one(env, view, deadline, movers, &weights, rng) else { break };
        stats.record(&log);
        logs.push(log);
    }
    (logs, stats)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::SeedableRng;

    use super::*;
    use crate::clock::Clock;
    use crate::stage::{find_builtin, FEWER_PIECES_ID, REVERSE_ID, STANDARD_ID};

    fn env(id: &str) -> EnvHandle {
        EnvHandle::new(find_builtin(id).unwrap().stage, Arc::new(Clock::virtual_with(Duration::from_micros(1))))
    }

    #[test]
    fn game_count_and_caps() {
        let e = env(STANDARD_ID);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (logs, stats) = run_self_play(&e, &e.stage_view(), Duration::from_secs(3600), 10, &mut rng);
        assert_eq!(logs.len(), 10);
        assert!(logs.iter().all(|l| l.moves.len() <= MAX_MOVES_PER_GAME));
        let plays: u32 = (0..64).map(|i| stats.get(Position::new(i / 8, i % 8)).plays).sum();
        assert_eq!(plays as usize, logs.iter().map(|l| l.moves.len()).sum::<usize>());
        // Standard games only ever alternate or pass.
        assert!(logs.iter().flat_map(|l| &l.turn_transitions).all(|t| t.from != t.to));
        for p in (0..8).flat_map(|r| (0..8).map(move |c| Position::new(r, c))) {
            let s = stats.get(p);
            assert!(s.wins <= s.plays && s.black_wins <= s.black_plays && s.white_wins <= s.white_plays);
        }
    }

    #[test]
    fn immediate_deadline_plays_nothing() {
        let e = env(STANDARD_ID);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (logs, stats) = run_self_play(&e, &e.stage_view(), Duration::ZERO, 10, &mut rng);
        assert!(logs.is_empty());
        assert_eq!(stats, PositionStats::new(8));
    }

    #[test]
    fn winner_comes_from_the_environment() {
        let e = env(REVERSE_ID);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (logs, _) = run_self_play(&e, &e.stage_view(), Duration::from_secs(3600), 20, &mut rng);
        let inverted = logs.iter().any(|l| {
            let s = l.final_scores;
            (s.black > s.white && l.winner == Winner::White) || (s.white > s.black && l.winner == Winner::Black)
        });
        assert!(inverted);
    }

    #[test]
    fn fewer_pieces_produces_continuations() {
        let e = env(FEWER_PIECES_ID);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (logs, _) = run_self_play(&e, &e.stage_view(), Duration::from_secs(3600), 20, &mut rng);
        assert!(logs.iter().flat_map(|l| &l.turn_transitions).any(|t| t.from == t.to));
    }

    #[test]
    fn same_seed_same_games() {
        let run = || {
            let e = env(STANDARD_ID);
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            run_self_play(&e, &e.stage_view(), Duration::from_secs(3600), 15, &mut rng).0
        };
        assert_eq!(run(), run());
    }
}
