use std::sync::Arc;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use arena_core::api::{SessionEvent, SessionStatus, SessionView};
use arena_core::board::{Player, Position};
use arena_core::clock::{Clock, TimingMode};
use arena_core::env::EnvHandle;
use arena_core::game::{apply_move, game_outcome, EndReason, GameEnd, GameOutcome, GameState};
use arena_core::log::{format_timestamp, GameLog, GameLogMetadata, EPOCH_TIMESTAMP};
use arena_core::rules::count_discs;
use arena_core::stage::{initial_state, StageConfig};
use arena_core::tournament::{take_turn, Budgets, Seat};

/// Display name of the human side in logs.
pub const HUMAN_NAME: &str = "Human";

/// A move the session refused, with the moves that were legal.
#[derive(Debug, Clone, PartialEq)]
pub enum MoveRejection {
    NotYourTurn(SessionStatus),
    Illegal { position: Position, valid_moves: Vec<Position> },
}

/// One human-vs-strategy game. The AI opponent plays under the standard cumulative
/// game budget and can forfeit; the human has no clock.
pub struct Session {
    pub id: String,
    stage: StageConfig,
    human: Player,
    opponent: Seat,
    state: GameState,
    end: Option<GameEnd>,
    env: EnvHandle,
    rng: ChaCha8Rng,
    limit: Duration,
    timestamp: String,
    events: Vec<SessionEvent>,
}

impl Session {
    pub fn new(
        id: String,
        stage: StageConfig,
        human: Player,
        opponent: Seat,
        budgets: &Budgets,
        mode: TimingMode,
        seed: u64,
    ) -> Self {
        let env = EnvHandle::new(stage.clone(), Arc::new(Clock::new(mode)));
        let timestamp = match mode {
            TimingMode::Wall => format_timestamp(chrono::Utc::now()),
            TimingMode::Deterministic => EPOCH_TIMESTAMP.to_string(),
        };
        let state = initial_state(&stage);
        let end = state.is_terminal().then_some(GameEnd::Normal);
        Session {
            id,
            stage,
            human,
            opponent,
            state,
            end,
            env,
            rng: ChaCha8Rng::seed_from_u64(seed),
            limit: budgets.game(),
            timestamp,
            events: Vec::new(),
        }
    }

    pub fn stage_id(&self) -> &str {
        &self.stage.id
    }

    pub fn status(&self) -> SessionStatus {
        if self.end.is_some() {
            SessionStatus::Finished
        } else if self.state.current_player == self.human {
            SessionStatus::AwaitingHuman
        } else {
            SessionStatus::AwaitingAi
        }
    }

    pub fn valid_moves(&self) -> Vec<Position> {
        match self.status() {
            SessionStatus::AwaitingHuman => self.state.valid_moves(&self.stage.rules),
            _ => Vec::new(),
        }
    }

    pub fn outcome(&self) -> Option<GameOutcome> {
        self.end.and_then(|end| game_outcome(&self.state, &self.stage.rules, end).ok())
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn view(&self) -> SessionView {
        let counts = count_discs(&self.state.board);
        SessionView {
            id: self.id.clone(),
            stage_id: self.stage.id.clone(),
            stage_name: self.stage.name.clone(),
            board_size: self.stage.board_size,
            human_color: self.human,
            opponent_id: self.opponent.id.clone(),
            opponent_name: self.opponent.name.clone(),
            status: self.status(),
            board: self.state.board.clone(),
            current_player: self.end.is_none().then_some(self.state.current_player),
            valid_moves: self.valid_moves(),
            black_score: counts.black,
            white_score: counts.white,
            move_count: self.state.history.len(),
            seq: self.events.len() as u64,
            outcome: self.outcome(),
        }
    }

    fn push(&mut self, make: impl FnOnce(u64) -> SessionEvent) -> SessionEvent {
        let event = make(self.events.len() as u64 + 1);
        self.events.push(event.clone());
        event
    }

    fn record_last_move(&mut self, by_ai: bool) -> SessionEvent {
        let record = self.state.history.last().cloned().expect("a move was just applied");
        self.push(|seq| SessionEvent::Move { seq, record, by_ai })
    }

    fn finish(&mut self, end: GameEnd, out: &mut Vec<SessionEvent>) {
        self.end = Some(end);
        if let Some(outcome) = self.outcome() {
            out.push(self.push(|seq| SessionEvent::GameOver { seq, outcome }));
        }
    }

    /// Applies the human's move. AI replies are left to [`Session::run_ai`].
    pub fn human_move(&mut self, position: Position) -> Result<Vec<SessionEvent>, MoveRejection> {
        let status = self.status();
        if status != SessionStatus::AwaitingHuman {
            return Err(MoveRejection::NotYourTurn(status));
        }
        let valid = self.valid_moves();
        if !valid.contains(&position) {
            return Err(MoveRejection::Illegal { position, valid_moves: valid });
        }
        self.state = apply_move(&self.state, position, &self.stage.rules)
            .map_err(|_| MoveRejection::Illegal { position, valid_moves: valid })?;
        let mut out = vec![self.record_last_move(false)];
        if self.state.is_terminal() {
            self.finish(GameEnd::Normal, &mut out);
        }
        Ok(out)
    }

    /// Plays AI moves until it is the human's turn or the game is over. Under a
    /// keep-the-turn rule this can be several moves in a row.
    pub fn run_ai(&mut self) -> Vec<SessionEvent> {
        let mut out = Vec::new();
        while self.status() == SessionStatus::AwaitingAi {
            let rules = self.stage.rules;
            match take_turn(&mut self.state, &rules, &self.opponent, &self.env, &mut self.rng, self.limit) {
                Ok(()) => {
                    out.push(self.record_last_move(true));
                    if self.state.is_terminal() {
                        self.finish(GameEnd::Normal, &mut out);
                    }
                }
                Err(end) => self.finish(end, &mut out),
            }
        }
        out
    }

    /// The game record, once finished.
    pub fn log(&self) -> Option<GameLog> {
        let outcome = self.outcome()?;
        let name = |p: Player| {
            if p == self.human {
                HUMAN_NAME.to_string()
            } else {
                self.opponent.name.clone()
            }
        };
        Some(GameLog {
            metadata: GameLogMetadata {
                timestamp: self.timestamp.clone(),
                stage_id: self.stage.id.clone(),
                stage_name: self.stage.name.clone(),
                black_strategy: name(Player::Black),
                white_strategy: name(Player::White),
                black_score: outcome.black_score,
                white_score: outcome.white_score,
                winner: outcome.winner,
                game_length: self.state.history.len(),
                end_reason: (outcome.reason != EndReason::Normal).then_some(outcome.reason),
            },
            initial_board: self.stage.initial_board(),
            moves: self.state.history.clone(),
            analysis_data: None,
        })
    }
}
