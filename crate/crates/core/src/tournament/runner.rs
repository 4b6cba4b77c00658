use std::sync::Arc;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Budgets;
use crate::board::Player;
use crate::clock::{Clock, TimingMode};
use crate::env::EnvHandle;
use crate::game::{apply_move, game_outcome, GameEnd, GameOutcome, GameState};
use crate::log::{format_timestamp, GameLog, GameLogMetadata, EPOCH_TIMESTAMP};
use crate::rules::RuleSet;
use crate::stage::{initial_state, StageConfig};
use crate::strategy::{MoveContext, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchResult {
    pub stage_id: String,
    pub black_id: String,
    pub white_id: String,
    pub seed: u64,
    pub outcome: GameOutcome,
    pub game_length: usize,
    /// Decision time per player in milliseconds, Black first.
    pub per_player_time: [u64; 2],
    /// Black discs minus White discs at the end.
    pub score_difference: i64,
}

/// Who plays one side of a game: the strategy, the id reported in results and the
/// name written to logs.
#[derive(Clone)]
pub struct Seat {
    pub id: String,
    pub name: String,
    pub strategy: Arc<dyn Strategy>,
}

impl Seat {
    pub fn of(strategy: Arc<dyn Strategy>) -> Seat {
        Seat { id: strategy.id().to_string(), name: strategy.display_name().to_string(), strategy }
    }
}

impl std::fmt::Debug for Seat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Seat({})", self.id)
    }
}

fn millis(d: Duration) -> u64 {
    d.as_millis() as u64
}

/// Asks `seat` for the side to move in `state` and applies its move.
///
/// The decision is timed on the environment's clock and added to the mover's total;
/// while it runs the environment is cut off at the moment the mover's `limit` would be
/// used up. Returns the forfeit if the total now exceeds `limit` or the move is not legal.
pub fn take_turn(
    state: &mut GameState,
    rules: &RuleSet,
    seat: &Seat,
    env: &EnvHandle,
    rng: &mut ChaCha8Rng,
    limit: Duration,
) -> Result<(), GameEnd> {
    let player = state.current_player;
    let clock = env.clock();
    let valid = state.valid_moves(rules);
    let used = state.time_used_by(player);
    let remaining = limit.saturating_sub(used);
    let board = state.board.clone();
    let start = clock.now();
    env.set_cutoff(Some(start + remaining));
    clock.charge(1);
    let decision = {
        let mut ctx = MoveContext { board: &board, player, valid_moves: &valid, env, rng, remaining_budget: remaining };
        seat.strategy.decide(&mut ctx)
    };
    let spent = clock.now() - start;
    env.set_cutoff(None);
    state.add_time(player, spent);
    if used + spent > limit {
        return Err(GameEnd::TimeForfeit(player));
    }
    let pos = decision.map_err(|_| GameEnd::IllegalMove(player))?;
    if !valid.contains(&pos) {
        return Err(GameEnd::IllegalMove(player));
    }
    let mut next = apply_move(state, pos, rules).map_err(|_| GameEnd::IllegalMove(player))?;
    if let Some(last) = next.history.last_mut() {
        last.time_spent = millis(spent);
    }
    *state = next;
    Ok(())
}

/// Plays one game under cumulative per-player time budgets.
///
/// Each decision is timed on the game clock. A player whose cumulative decision time
/// exceeds `budgets.game()` forfeits on time at that move; a returned move that is not
/// legal forfeits the game. While a player is deciding, the environment is cut off at
/// the moment its budget runs out, so searches through the API stop early.
pub fn run_game(
    stage: &StageConfig,
    black: &Seat,
    white: &Seat,
    budgets: &Budgets,
    seed: u64,
    mode: TimingMode,
) -> (MatchResult, GameLog) {
    let clock = Arc::new(Clock::new(mode));
    let env = EnvHandle::new(stage.clone(), Arc::clone(&clock));
    let rules = stage.rules;
    let limit = budgets.game();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state: GameState = initial_state(stage);
    let timestamp = match mode {
        TimingMode::Wall => format_timestamp(chrono::Utc::now()),
        TimingMode::Deterministic => EPOCH_TIMESTAMP.to_string(),
    };

    let end = loop {
        if state.is_terminal() {
            break GameEnd::Normal;
        }
        let seat = if state.current_player == Player::Black { black } else { white };
        if let Err(end) = take_turn(&mut state, &rules, seat, &env, &mut rng, limit) {
            break end;
        }
    };

    let outcome = game_outcome(&state, &rules, end).expect("loop ends on a terminal state or a forfeit");
    let result = MatchResult {
        stage_id: stage.id.clone(),
        black_id: black.id.clone(),
        white_id: white.id.clone(),
        seed,
        outcome,
        game_length: state.history.len(),
        per_player_time: [millis(state.time_used[0]), millis(state.time_used[1])],
        score_difference: outcome.black_score as i64 - outcome.white_score as i64,
    };
    let log = GameLog {
        metadata: GameLogMetadata {
            timestamp,
            stage_id: stage.id.clone(),
            stage_name: stage.name.clone(),
            black_strategy: black.name.clone(),
            white_strategy: white.name.clone(),
            black_score: outcome.black_score,
            white_score: outcome.white_score,
            winner: outcome.winner,
            game_length: state.history.len(),
            end_reason: match end {
                GameEnd::Normal => None,
                GameEnd::TimeForfeit(_) => Some(crate::game::EndReason::TimeForfeit),
                GameEnd::IllegalMove(_) => Some(crate::game::EndReason::IllegalMove),
            },
        },
        initial_board: stage.initial_board(),
        moves: state.history,
        analysis_data: None,
    };
    (result, log)
}
