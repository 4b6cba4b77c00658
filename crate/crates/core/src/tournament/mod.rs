//! Analysis phases, round robins with time forfeits, metrics and reports.

mod metrics;
mod runner;

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::TimingMode;
use crate::game::Winner;
use crate::log::{AnalysisData, GameLog, SystemAnalysis};
use crate::meta::{run_analysis, AnalysisBudget, AnalysisError, IntelligentSystem, MetaLearner};
use crate::stage::{CatalogEntry, Visibility};
use crate::strategy::{builtin, Strategy, BUILTIN_IDS};

pub use metrics::{compute_metrics, weighted_score, MetricVector, Weights};
pub use runner::{run_game, take_turn, MatchResult, Seat};

/// Default size of the early-games window behind the A metric.
pub const FIRST_GAMES_WINDOW: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TournamentError {
    #[error("invalid weights {0}: need five nonnegative numbers summing to 1")]
    BadWeights(String),
    #[error("missing stage {0}")]
    MissingStage(String),
    #[error("invalid budgets: {0}")]
    BadBudget(String),
    #[error("need at least 2 entrants, got {0}")]
    TooFewEntrants(usize),
    #[error("duplicate entrant {0}")]
    DuplicateEntrant(String),
    #[error("unknown entrant {0}")]
    UnknownEntrant(String),
    #[error("no seeds given")]
    NoSeeds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Budgets {
    #[serde(rename = "tAnalysisMs", with = "crate::env::duration_ms")]
    pub t_analysis: Duration,
    #[serde(rename = "tGameMs", with = "crate::env::duration_ms")]
    pub t_game: Duration,
    pub scale: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { t_analysis: Duration::from_secs(60), t_game: Duration::from_secs(10), scale: 1.0 }
    }
}

impl Budgets {
    pub fn validate(&self) -> Result<(), TournamentError> {
        if !self.scale.is_finite() || self.scale <= 0.0 {
            return Err(TournamentError::BadBudget(format!("scale must be positive, got {}", self.scale)));
        }
        if self.analysis().is_zero() || self.game().is_zero() {
            return Err(TournamentError::BadBudget("budgets must be positive".into()));
        }
        Ok(())
    }

    /// Analysis budget after scaling.
    pub fn analysis(&self) -> Duration {
        self.t_analysis.mul_f64(self.scale)
    }

    /// Per-player game budget after scaling.
    pub fn game(&self) -> Duration {
        self.t_game.mul_f64(self.scale)
    }
}

/// A tournament participant: a fixed strategy, or a system that must first analyze
/// each stage to obtain one.
#[derive(Clone)]
pub enum Entrant {
    Fixed(Arc<dyn Strategy>),
    System(Arc<dyn IntelligentSystem>),
}

impl Entrant {
    pub fn id(&self) -> &str {
        match self {
            Entrant::Fixed(s) => s.id(),
            Entrant::System(s) => s.id(),
        }
    }

    pub fn display_name(&self) -> &str {
        match self {
            Entrant::Fixed(s) => s.display_name(),
            Entrant::System(s) => s.display_name(),
        }
    }

    /// Resolves a built-in strategy id or the `meta-learner` system.
    pub fn by_id(id: &str) -> Result<Entrant, TournamentError> {
        if id == MetaLearner.id() {
            return Ok(Entrant::System(Arc::new(MetaLearner)));
        }
        builtin(id).map(Entrant::Fixed).map_err(|_| TournamentError::UnknownEntrant(id.to_string()))
    }
}

impl std::fmt::Debug for Entrant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Entrant({})", self.id())
    }
}

/// All ids accepted by [`Entrant::by_id`].
pub fn entrant_ids() -> Vec<&'static str> {
    let mut ids: Vec<&'static str> = BUILTIN_IDS.to_vec();
    ids.push("meta-learner");
    ids
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisRecord {
    pub system_id: String,
    pub elapsed_ms: u64,
    /// `ok`, `timeout` or `failed`.
    pub status: String,
}

/// Outcome of the analysis phase for one system on one stage.
pub enum AnalysisOutcome {
    Entered { seat: Seat, record: AnalysisRecord, data: SystemAnalysis },
    Disqualified { record: AnalysisRecord, error: AnalysisError },
}

/// Runs `system` on the stage under the scaled analysis budget; a timeout or error
/// keeps it out of the stage's round robin.
pub fn run_analysis_phase(
    system: &Arc<dyn IntelligentSystem>,
    entry: &CatalogEntry,
    budgets: &Budgets,
    mode: TimingMode,
    seed: u64,
) -> AnalysisOutcome {
    let budget = AnalysisBudget::with_total(budgets.analysis());
    match run_analysis(Arc::clone(system), &entry.stage, &budget, mode, seed) {
        Ok(run) => {
            let elapsed_ms = run.elapsed.as_millis() as u64;
            AnalysisOutcome::Entered {
                seat: Seat {
                    id: system.id().to_string(),
                    name: system.display_name().to_string(),
                    strategy: run.artifact.strategy,
                },
                record: AnalysisRecord { system_id: system.id().to_string(), elapsed_ms, status: "ok".into() },
                data: SystemAnalysis {
                    analysis_time: elapsed_ms,
                    explored_positions: run.usage.simulate_calls,
                    api_calls: run.usage.total_calls(),
                },
            }
        }
        Err(error) => {
            let status = if matches!(error, AnalysisError::Timeout(_)) { "timeout" } else { "failed" };
            AnalysisOutcome::Disqualified {
                record: AnalysisRecord {
                    system_id: system.id().to_string(),
                    elapsed_ms: budget.total.as_millis() as u64,
                    status: status.into(),
                },
                error,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LeaderboardRow {
    pub id: String,
    pub name: String,
    pub games: usize,
    pub wins: usize,
    pub losses: usize,
    pub draws: usize,
    pub win_rate: f64,
    pub avg_score_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StageReport {
    pub stage_id: String,
    pub stage_name: String,
    pub visibility: Visibility,
    /// Ids of the entrants that played, in entry order.
    pub entrants: Vec<String>,
    pub disqualified: Vec<String>,
    pub analysis: Vec<AnalysisRecord>,
    /// Games in schedule order: per seed, every ordered pair with the first as Black.
    pub games: Vec<MatchResult>,
    pub leaderboard: Vec<LeaderboardRow>,
}

/// Ranks seats by win rate (draws count half), then wins, then id.
pub fn leaderboard(seats: &[(String, String)], games: &[MatchResult]) -> Vec<LeaderboardRow> {
    let mut rows: Vec<LeaderboardRow> = seats
        .iter()
        .map(|(id, name)| {
            let mut row = LeaderboardRow {
                id: id.clone(),
                name: name.clone(),
                games: 0,
                wins: 0,
                losses: 0,
                draws: 0,
                win_rate: 0.0,
                avg_score_difference: 0.0,
            };
            let mut diff = 0i64;
            for g in games {
                let side = if &g.black_id == id {
                    diff += g.score_difference;
                    Winner::Black
                } else if &g.white_id == id {
                    diff -= g.score_difference;
                    Winner::White
                } else {
                    continue;
                };
                row.games += 1;
                match g.outcome.winner {
                    Winner::Tie => row.draws += 1,
                    w if w == side => row.wins += 1,
                    _ => row.losses += 1,
                }
            }
            if row.games > 0 {
                row.win_rate = (row.wins as f64 + 0.5 * row.draws as f64) / row.games as f64;
                row.avg_score_difference = diff as f64 / row.games as f64;
            }
            row
        })
        .collect();
    rows.sort_by(|a, b| b.win_rate.total_cmp(&a.win_rate).then(b.wins.cmp(&a.wins)).then_with(|| a.id.cmp(&b.id)));
    rows
}

/// Per-game seed derived from the run seed and the game's schedule index.
pub fn game_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64)
}

/// Plays every ordered pair of `seats` once per seed. Games run in parallel; results
/// come back in schedule order.
pub fn run_stage_round_robin(
    entry: &CatalogEntry,
    seats: &[Seat],
    budgets: &Budgets,
    seeds: &[u64],
    mode: TimingMode,
) -> Result<(Vec<MatchResult>, Vec<GameLog>), TournamentError> {
    if seats.len() < 2 {
        return Err(TournamentError::TooFewEntrants(seats.len()));
    }
    let mut schedule = Vec::new();
    for &seed in seeds {
        let mut index = 0;
        for b in 0..seats.len() {
            for w in 0..seats.len() {
                if b != w {
                    schedule.push((b, w, game_seed(seed, index)));
                    index += 1;
                }
            }
        }
    }
    let played: Vec<(MatchResult, GameLog)> = schedule
        .par_iter()
        .map(|&(b, w, seed)| run_game(&entry.stage, &seats[b], &seats[w], budgets, seed, mode))
        .collect();
    Ok(played.into_iter().unzip())
}

#[derive(Debug, Clone)]
pub struct TournamentConfig {
    pub stages: Vec<CatalogEntry>,
    pub entrants: Vec<Entrant>,
    pub seeds: Vec<u64>,
    pub budgets: Budgets,
    pub weights: Weights,
    pub mode: TimingMode,
    pub first_games_window: usize,
}

impl TournamentConfig {
    pub fn new(stages: Vec<CatalogEntry>, entrants: Vec<Entrant>, seeds: Vec<u64>) -> TournamentConfig {
        TournamentConfig {
            stages,
            entrants,
            seeds,
            budgets: Budgets::default(),
            weights: Weights::default(),
            mode: TimingMode::Wall,
            first_games_window: FIRST_GAMES_WINDOW,
        }
    }

    pub fn validate(&self) -> Result<(), TournamentError> {
        self.budgets.validate()?;
        self.weights.validate()?;
        if self.seeds.is_empty() {
            return Err(TournamentError::NoSeeds);
        }
        if self.stages.is_empty() {
            return Err(TournamentError::MissingStage("no stages given".into()));
        }
        if self.entrants.len() < 2 {
            return Err(TournamentError::TooFewEntrants(self.entrants.len()));
        }
        let mut seen = HashSet::new();
        for e in &self.entrants {
            if !seen.insert(e.id()) {
                return Err(TournamentError::DuplicateEntrant(e.id().to_string()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SystemScore {
    pub id: String,
    pub name: String,
    pub metrics: MetricVector,
    pub weighted_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TournamentReport {
    pub id: String,
    pub timing: TimingMode,
    pub seeds: Vec<u64>,
    pub budgets: Budgets,
    pub weights: Weights,
    pub first_games_window: usize,
    pub public_stages: Vec<String>,
    pub private_stages: Vec<String>,
    pub stages: Vec<StageReport>,
    /// Entrants ranked by weighted score, then id.
    pub scores: Vec<SystemScore>,
}

impl TournamentReport {
    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_document(document: &str) -> Result<TournamentReport, serde_json::Error> {
        serde_json::from_str(document)
    }

    /// Plain-text leaderboards and scores.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.stages {
            out.push_str(&format!("{} ({}, {})\n", s.stage_id, s.stage_name, s.visibility.as_str()));
            for (rank, r) in s.leaderboard.iter().enumerate() {
                out.push_str(&format!(
                    "  {:>2}. {:<16} {:>6.3}  W{} L{} D{}\n",
                    rank + 1,
                    r.id,
                    r.win_rate,
                    r.wins,
                    r.losses,
                    r.draws
                ));
            }
            for d in &s.disqualified {
                out.push_str(&format!("      {d} disqualified\n"));
            }
        }
        out.push_str("scores\n");
        for s in &self.scores {
            let m = &s.metrics;
            out.push_str(&format!(
                "  {:<16} {:.4}  P={:.3} A={:.3} E={:.3} G={:.3} R={:.3}\n",
                s.id, s.weighted_score, m.p, m.a, m.e, m.g, m.r
            ));
        }
        out
    }
}

/// 64-bit FNV-1a, used for content-derived report ids.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Analyzes every stage with every system entrant, plays the round robins and scores
/// all entrants. Returns the report and each stage's game logs.
pub fn run_tournament(config: &TournamentConfig) -> Result<(TournamentReport, Vec<Vec<GameLog>>), TournamentError> {
    config.validate()?;
    let mut stage_reports = Vec::new();
    let mut stage_logs = Vec::new();
    for entry in &config.stages {
        let mut seats = Vec::new();
        let mut analysis = Vec::new();
        let mut disqualified = Vec::new();
        let mut system_data: Vec<(String, SystemAnalysis)> = Vec::new();
        for e in &config.entrants {
            match e {
                Entrant::Fixed(s) => seats.push(Seat::of(Arc::clone(s))),
                Entrant::System(sys) => {
                    match run_analysis_phase(sys, entry, &config.budgets, config.mode, config.seeds[0]) {
                        AnalysisOutcome::Entered { seat, record, data } => {
                            system_data.push((seat.id.clone(), data));
                            seats.push(seat);
                            analysis.push(record);
                        }
                        AnalysisOutcome::Disqualified { record, .. } => {
                            disqualified.push(record.system_id.clone());
                            analysis.push(record);
                        }
                    }
                }
            }
        }
        let (games, mut logs) = if seats.len() >= 2 {
            run_stage_round_robin(entry, &seats, &config.budgets, &config.seeds, config.mode)?
        } else {
            (Vec::new(), Vec::new())
        };
        for (log, game) in logs.iter_mut().zip(&games) {
            let find = |id: &str| system_data.iter().find(|(s, _)| s == id).map(|(_, d)| *d);
            let (black_system, white_system) = (find(&game.black_id), find(&game.white_id));
            if black_system.is_some() || white_system.is_some() {
                log.analysis_data = Some(AnalysisData { black_system, white_system });
            }
        }
        let names: Vec<(String, String)> = seats.iter().map(|s| (s.id.clone(), s.name.clone())).collect();
        stage_reports.push(StageReport {
            stage_id: entry.stage.id.clone(),
            stage_name: entry.stage.name.clone(),
            visibility: entry.visibility,
            entrants: seats.iter().map(|s| s.id.clone()).collect(),
            disqualified,
            analysis,
            leaderboard: leaderboard(&names, &games),
            games,
        });
        stage_logs.push(logs);
    }

    let ids_with = |v: Visibility| -> Vec<String> {
        config.stages.iter().filter(|e| e.visibility == v).map(|e| e.stage.id.clone()).collect()
    };
    let public_stages = ids_with(Visibility::Public);
    let mut private_stages = ids_with(Visibility::Private);
    // With no private stage in the run, score over the public ones.
    let scored_public = if private_stages.is_empty() {
        private_stages = public_stages.clone();
        Vec::new()
    } else {
        public_stages.clone()
    };
    let mut scores = Vec::new();
    for e in &config.entrants {
        let metrics = compute_metrics(
            e.id(),
            &stage_reports,
            &scored_public,
            &private_stages,
            config.first_games_window,
            &config.budgets,
        )?;
        scores.push(SystemScore {
            id: e.id().to_string(),
            name: e.display_name().to_string(),
            weighted_score: weighted_score(&metrics, &config.weights)?,
            metrics,
        });
    }
    scores.sort_by(|a, b| b.weighted_score.total_cmp(&a.weighted_score).then_with(|| a.id.cmp(&b.id)));

    let mut report = TournamentReport {
        id: String::new(),
        timing: config.mode,
        seeds: config.seeds.clone(),
        budgets: config.budgets,
        weights: config.weights,
        first_games_window: config.first_games_window,
        public_stages: ids_with(Visibility::Public),
        private_stages: ids_with(Visibility::Private),
        stages: stage_reports,
        scores,
    };
    report.id = format!("report-{:016x}", fnv1a(report.to_document().as_bytes()));
    Ok((report, stage_logs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meta::StallingSystem;
    use crate::stage::{find_builtin, STANDARD_ID};

    fn fixed(ids: &[&str]) -> Vec<Entrant> {
        ids.iter().map(|id| Entrant::by_id(id).unwrap()).collect()
    }

    #[test]
    fn two_entrants_swap_colors() {
        let entry = find_builtin(STANDARD_ID).unwrap();
        let seats: Vec<Seat> = ["greedy", "corners"].iter().map(|id| Seat::of(builtin(id).unwrap())).collect();
        let (games, logs) =
            run_stage_round_robin(&entry, &seats, &Budgets::default(), &[3], TimingMode::Deterministic).unwrap();
        assert_eq!(games.len(), 2);
        assert_eq!(logs.len(), 2);
        assert_eq!((games[0].black_id.as_str(), games[0].white_id.as_str()), ("greedy", "corners"));
        assert_eq!((games[1].black_id.as_str(), games[1].white_id.as_str()), ("corners", "greedy"));
        assert!(
            run_stage_round_robin(&entry, &seats[..1], &Budgets::default(), &[3], TimingMode::Deterministic).is_err()
        );
    }

    #[test]
    fn leaderboard_order() {
        let entry = find_builtin(STANDARD_ID).unwrap();
        let mut config =
            TournamentConfig::new(vec![entry], fixed(&["random", "greedy", "corners", "positional"]), vec![1]);
        config.mode = TimingMode::Deterministic;
        let (report, logs) = run_tournament(&config).unwrap();
        let board = &report.stages[0].leaderboard;
        assert_eq!(board.len(), 4);
        assert_eq!(report.stages[0].games.len(), 12);
        assert_eq!(logs[0].len(), 12);
        for pair in board.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert!(
                a.win_rate > b.win_rate
                    || (a.win_rate == b.win_rate && (a.wins > b.wins || (a.wins == b.wins && a.id < b.id)))
            );
        }
        assert_eq!(board.iter().map(|r| r.games).sum::<usize>(), 24);
        let back = TournamentReport::from_document(&report.to_document()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn stalling_system_is_disqualified() {
        let entry = find_builtin(STANDARD_ID).unwrap();
        let sys: Arc<dyn IntelligentSystem> = Arc::new(StallingSystem { extra: Duration::from_millis(100) });
        let budgets = Budgets { scale: 0.005, ..Budgets::default() };
        let outcome = run_analysis_phase(&sys, &entry, &budgets, TimingMode::Wall, 0);
        let AnalysisOutcome::Disqualified { record, error } = outcome else { panic!("stalling system entered") };
        assert_eq!(record.status, "timeout");
        assert!(matches!(error, AnalysisError::Timeout(_)));

        let mut entrants = fixed(&["greedy", "corners"]);
        entrants.push(Entrant::System(sys));
        let mut config = TournamentConfig::new(vec![find_builtin(STANDARD_ID).unwrap()], entrants, vec![1]);
        config.budgets = budgets;
        let (report, _) = run_tournament(&config).unwrap();
        assert_eq!(report.stages[0].disqualified, vec!["stalling".to_string()]);
        assert_eq!(report.stages[0].games.len(), 2);
        let stalling = report.scores.iter().find(|s| s.id == "stalling").unwrap();
        assert_eq!(stalling.metrics.e, 0.0);
        assert_eq!(stalling.metrics.p, 0.0);
    }

    #[test]
    fn config_validation() {
        let entry = find_builtin(STANDARD_ID).unwrap();
        let mut config = TournamentConfig::new(vec![entry], fixed(&["greedy", "greedy"]), vec![1]);
        assert_eq!(run_tournament(&config).unwrap_err(), TournamentError::DuplicateEntrant("greedy".into()));
        config.entrants = fixed(&["greedy"]);
        assert_eq!(run_tournament(&config).unwrap_err(), TournamentError::TooFewEntrants(1));
        config.entrants = fixed(&["greedy", "corners"]);
        config.seeds.clear();
        assert_eq!(run_tournament(&config).unwrap_err(), TournamentError::NoSeeds);
        config.seeds = vec![1];
        config.budgets.scale = 0.0;
        assert!(matches!(run_tournament(&config).unwrap_err(), TournamentError::BadBudget(_)));
        assert!(Entrant::by_id("nobody").is_err());
        assert_eq!(Entrant::by_id("meta-learner").unwrap().id(), "meta-learner");
    }
}
