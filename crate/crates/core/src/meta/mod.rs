//! The reference intelligent system and the analysis-phase harness.
//!
//! Within its analysis budget the meta-learner probes the sealed environment, plays
//! self-play games through it, infers behavioral rule signatures, learns a position-value
//! matrix and an opening book, tunes one parameter by self-play and returns a
//! [`GeneratedStrategy`].

pub mod behaviors;
pub mod selfplay;
pub mod synth;
mod system;

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::Player;
use crate::env::EnvHandle;
use crate::game::Winner;
use crate::stage::SanitizedStageConfig;
use crate::strategy::{MoveContext, Strategy};

pub use behaviors::{infer_behaviors, occlusion_probe, ObservedBehaviors};
pub use selfplay::{run_self_play, PositionStats, SimulationGameLog};
pub use synth::{build_opening_book, build_value_matrix, GeneratedStrategy, OpeningBookEntry, PositionValueMatrix};
pub use system::{run_analysis, AnalysisArtifact, AnalysisRun, IntelligentSystem, MetaLearner, StallingSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("analysis did not finish within {0:?}")]
    Timeout(Duration),
    #[error("invalid analysis budget: {0}")]
    BadBudget(String),
    #[error("analysis failed: {0}")]
    Failed(String),
}

/// Split of the analysis window into discovery (alpha), adaptation (beta) and
/// tuning (gamma), after reserving a safety buffer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisBudget {
    #[serde(with = "crate::env::duration_ms")]
    pub total: Duration,
    #[serde(with = "crate::env::duration_ms")]
    pub safety_buffer: Duration,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for AnalysisBudget {
    fn default() -> Self {
        AnalysisBudget::with_total(Duration::from_secs(60))
    }
}

impl AnalysisBudget {
    /// Defaults scaled to `total`: 5 of every 60 seconds are held back.
    pub fn with_total(total: Duration) -> Self {
        AnalysisBudget { total, safety_buffer: total / 12, alpha: 0.2, beta: 0.3, gamma: 0.5 }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let fractions = [self.alpha, self.beta, self.gamma];
        if fractions.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(AnalysisError::BadBudget("phase fractions must be nonnegative".into()));
        }
        if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(AnalysisError::BadBudget("phase fractions must sum to 1".into()));
        }
        if self.total.is_zero() || self.safety_buffer >= self.total {
            return Err(AnalysisError::BadBudget("safety buffer must be shorter than the total".into()));
        }
        Ok(())
    }

    pub fn usable(&self) -> Duration {
        self.total.saturating_sub(self.safety_buffer)
    }

    /// End of each phase as an absolute clock reading, for an analysis started at `start`.
    pub fn phase_deadlines(&self, start: Duration) -> [Duration; 3] {
        let usable = self.usable();
        [start + usable.mul_f64(self.alpha), start + usable.mul_f64(self.alpha + self.beta), start + usable]
    }
}

/// Capture-bonus values tried during the tuning phase, default first.
pub const CAPTURE_BONUS_CANDIDATES: [f64; 3] = [5.0, 2.0, 8.0];

/// What happened during one meta-learner analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisTranscript {
    pub occlusion_probe: bool,
    pub discovery_games: usize,
    pub total_games: usize,
    pub behaviors: ObservedBehaviors,
    pub book_entries: usize,
    pub tuning_games: usize,
    pub tuning_points: Vec<f64>,
    pub capture_bonus: f64,
    #[serde(with = "crate::env::duration_ms")]
    pub elapsed: Duration,
}

impl AnalysisTranscript {
    pub fn lines(&self) -> Vec<String> {
        let b = &self.behaviors;
        vec![
            format!("occlusion probe: {}", self.occlusion_probe),
            format!("self-play games: {} discovery, {} total", self.discovery_games, self.total_games),
            format!(
                "consecutive turns: frequency {:.4}, observed {}, bias black {:.3} white {:.3}",
                b.consecutive_turn_frequency,
                b.consecutive_turn_observed,
                b.consecutive_turn_player_bias.black,
                b.consecutive_turn_player_bias.white
            ),
            format!("capture through blocked cells: {}", b.capture_through_blocked_cells_observed),
            format!("win condition reversed: {}", b.win_condition_reversed_observed),
            format!("opening book entries: {}", self.book_entries),
            format!("tuning games: {}, points {:?}", self.tuning_games, self.tuning_points),
            format!("capture bonus: {}", self.capture_bonus),
            format!("analysis time: {} ms", self.elapsed.as_millis()),
        ]
    }
}

/// Plays one game between two generated strategies through `env`; `None` if the
/// deadline interrupts it.
fn tuning_game(
    env: &EnvHandle,
    view: &SanitizedStageConfig,
    players: [&GeneratedStrategy; 2],
    deadline: Duration,
    rng: &mut ChaCha8Rng,
) -> Option<Winner> {
    let mut board = view.initial_board.clone();
    let mut current = view.start_player;
    let mut passes = 0;
    loop {
        if env.clock().now() >= deadline {
            return None;
        }
        let moves = env.get_valid_moves(&board, current).ok()?;
        if moves.is_empty() {
            passes += 1;
            if passes >= 2 {
                break;
            }
            current = current.opponent();
            continue;
        }
        passes = 0;
        let strategy = players[usize::from(current == Player::White)];
        let mut ctx = MoveContext {
            board: &board,
            player: current,
            valid_moves: &moves,
            env,
            rng: &mut *rng,
            remaining_budget: deadline.saturating_sub(env.clock().now()),
        };
        let m = strategy.decide(&mut ctx).ok()?;
        let sim = env.simulate_move(&board, current, m.row, m.col);
        if !sim.valid {
            return None;
        }
        board = sim.resulting_board;
        match env.next_player(&board, current) {
            Some(next) => current = next,
            None => break,
        }
    }
    if env.clock().now() >= deadline {
        return None;
    }
    Some(env.declare_winner(&board))
}

/// Round robin among capture-bonus variants of `base` until `deadline`. Returns the
/// best bonus (earliest on ties), the points per candidate and the games played.
pub fn tune_capture_bonus(
    env: &EnvHandle,
    view: &SanitizedStageConfig,
    base: &GeneratedStrategy,
    deadline: Duration,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<f64>, usize) {
    let candidates: Vec<GeneratedStrategy> =
        CAPTURE_BONUS_CANDIDATES.iter().map(|&b| base.clone().with_capture_bonus(b)).collect();
    let n = candidates.len();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut points = vec![0.0; n];
    let mut games = 0;
    'rounds: loop {
        for &(i, j) in &pairs {
            let Some(winner) = tuning_game(env, view, [&candidates[i], &candidates[j]], deadline, rng) else {
                break 'rounds;
            };
            games += 1;
            match winner {
                Winner::Black => points[i] += 1.0,
                Winner::White => points[j] += 1.0,
                Winner::Tie => {
                    points[i] += 0.5;
                    points[j] += 0.5;
                }
            }
        }
    }
    let mut best = 0;
    for k in 1..n {
        if points[k] > points[best] {
            best = k;
        }
    }
    (CAPTURE_BONUS_CANDIDATES[best], points, games)
}

/// The meta-learner's analysis: discovery, adaptation and tuning phases within
/// `budget`, measured on the environment's clock from the moment of the call.
pub fn analyze_stage(
    view: &SanitizedStageConfig,
    env: &EnvHandle,
    budget: &AnalysisBudget,
    seed: u64,
) -> Result<(GeneratedStrategy, AnalysisTranscript), AnalysisError> {
    budget.validate()?;
    let start = env.clock().now();
    let [discovery_end, adaptation_end, tuning_end] = budget.phase_deadlines(start);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (mut logs, _) = run_self_play(env, view, discovery_end, selfplay::MAX_SIM_GAMES, &mut rng);
    let discovery = infer_behaviors(&logs, env, view);
    let discovery_games = logs.len();

    let remaining = selfplay::MAX_SIM_GAMES - logs.len();
    let (more, _) = run_self_play(env, view, adaptation_end, remaining, &mut rng);
    logs.extend(more);
    let behaviors = ObservedBehaviors {
        capture_through_blocked_cells_observed: discovery.capture_through_blocked_cells_observed,
        ..behaviors::behaviors_from_logs(&logs)
    };
    let stats = PositionStats::from_logs(view.board_size, &logs);
    let mut matrix = build_value_matrix(&stats, view.board_size, &behaviors);
    matrix.mask_blocked(&view.initial_board);
    let book = build_opening_book(&logs);
    let base = GeneratedStrategy::new(matrix, book, behaviors);

    let (bonus, points, tuning_games) = tune_capture_bonus(env, view, &base, tuning_end, &mut rng);
    let strategy = base.with_capture_bonus(bonus);

    let elapsed = env.clock().now() - start;
    if elapsed > budget.total {
        return Err(AnalysisError::Timeout(budget.total));
    }
    let transcript = AnalysisTranscript {
        occlusion_probe: behaviors.capture_through_blocked_cells_observed,
        discovery_games,
        total_games: logs.len(),
        behaviors,
        book_entries: strategy.book.len(),
        tuning_games,
        tuning_points: points,
        capture_bonus: bonus,
        elapsed,
    };
    Ok((strategy, transcript))
}
