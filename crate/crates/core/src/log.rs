//! Game records: the line-oriented text transcript, the structured JSON document,
//! replay by re-simulation and log verification.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{notation_to_position, position_to_notation, Board, Player, Position, MAX_BOARD_SIZE};
use crate::game::{score_winner, EndReason, MoveRecord, Winner};
use crate::rules::{count_discs, determine_next_player, has_valid_move, place, RuleSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogError {
    #[error("invalid log document at {path}: {message}")]
    Document { path: String, message: String },
    #[error("text log line {line}: {message}")]
    Text { line: usize, message: String },
    #[error("move index {k} out of range (log has {len} moves)")]
    OutOfRange { k: usize, len: usize },
    #[error("move {index} is not legal on the reconstructed board")]
    IllegalMove { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GameLogMetadata {
    /// ISO-8601 UTC with millisecond precision.
    pub timestamp: String,
    pub stage_id: String,
    pub stage_name: String,
    pub black_strategy: String,
    pub white_strategy: String,
    pub black_score: usize,
    pub white_score: usize,
    pub winner: Winner,
    pub game_length: usize,
    /// Present only when the game ended by forfeit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_reason: Option<EndReason>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SystemAnalysis {
    /// Milliseconds.
    pub analysis_time: u64,
    pub explored_positions: u64,
    #[serde(default)]
    pub api_calls: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AnalysisData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub black_system: Option<SystemAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub white_system: Option<SystemAnalysis>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GameLog {
    pub metadata: GameLogMetadata,
    pub initial_board: Board,
    pub moves: Vec<MoveRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_data: Option<AnalysisData>,
}

/// Timestamp format of log metadata.
pub fn format_timestamp(t: chrono::DateTime<chrono::Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string()
}

/// Fixed timestamp used by deterministic runs.
pub const EPOCH_TIMESTAMP: &str = "1970-01-01T00:00:00.000Z";

fn side_letter(p: Player) -> char {
    match p {
        Player::Black => 'B',
        Player::White => 'W',
    }
}

fn winner_line(w: Winner) -> &'static str {
    match w {
        Winner::Black => "Black wins!",
        Winner::White => "White wins!",
        Winner::Tie => "Tie!",
    }
}

/// The human-readable transcript of one game, numbered `game_number`.
pub fn to_text(log: &GameLog, game_number: usize) -> String {
    let m = &log.metadata;
    let size = log.initial_board.size();
    let name = |p: Player| match p {
        Player::Black => m.black_strategy.as_str(),
        Player::White => m.white_strategy.as_str(),
    };
    let mut out = String::new();
    let _ = writeln!(out, "=== Game {game_number} ===");
    let _ =
        writeln!(out, "Game started: {}(B) vs {}(W) on Stage: {}", m.black_strategy, m.white_strategy, m.stage_name);
    for mv in &log.moves {
        let notation = position_to_notation(mv.position, size).unwrap_or_else(|_| "??".into());
        let _ = writeln!(out, "{}({}): {}", name(mv.player), side_letter(mv.player), notation);
    }
    let _ = writeln!(out, "Game over: Final score {}-{}", m.black_score, m.white_score);
    let _ = writeln!(out, "{}", winner_line(m.winner));
    if let (Some(reason), Some(winner)) = (m.end_reason, m.winner.player()) {
        let offender = name(winner.opponent());
        match reason {
            EndReason::TimeForfeit => {
                let _ = writeln!(out, "{offender} forfeits on time!");
            }
            EndReason::IllegalMove => {
                let _ = writeln!(out, "{offender} forfeits by illegal move!");
            }
            EndReason::Normal => {}
        }
    }
    out
}

/// Several transcripts separated by blank lines, numbered from 1.
pub fn to_text_many(logs: &[GameLog]) -> String {
    logs.iter().enumerate().map(|(i, l)| to_text(l, i + 1)).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextMove {
    pub player: Player,
    pub position: Position,
}

/// One game as recovered from a text transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextGame {
    pub number: usize,
    pub black: String,
    pub white: String,
    pub stage_name: String,
    pub moves: Vec<TextMove>,
    pub black_score: usize,
    pub white_score: usize,
    pub winner: Winner,
    pub forfeit: Option<EndReason>,
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, expected: &str) -> Result<(usize, &'a str), LogError> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or(LogError::Text { line: 0, message: format!("unexpected end of input, expected {expected}") })
    }

    fn peek(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|&(_, l)| l)
    }
}

fn text_err(line: usize, message: impl Into<String>) -> LogError {
    LogError::Text { line, message: message.into() }
}

/// Parses transcripts produced by [`to_text`] (one or more games, optionally separated
/// by blank lines). Every line must match the grammar exactly.
pub fn parse_text(text: &str) -> Result<Vec<TextGame>, LogError> {
    let mut lines = Lines { inner: text.lines().enumerate().peekable() };
    let mut games = Vec::new();
    loop {
        while lines.peek() == Some("") {
            lines.next("")?;
        }
        if lines.peek().is_none() {
            break;
        }
        games.push(parse_game(&mut lines)?);
    }
    if games.is_empty() {
        return Err(text_err(1, "no games found"));
    }
    Ok(games)
}

fn parse_game(lines: &mut Lines<'_>) -> Result<TextGame, LogError> {
    let (n, header) = lines.next("game header")?;
    let number = header
        .strip_prefix("=== Game ")
        .and_then(|s| s.strip_suffix(" ==="))
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| text_err(n, "expected `=== Game N ===`"))?;

    let (n, started) = lines.next("start line")?;
    let rest = started.strip_prefix("Game started: ").ok_or_else(|| text_err(n, "expected `Game started: `"))?;
    let (players, stage_name) =
        rest.split_once(" on Stage: ").ok_or_else(|| text_err(n, "expected ` on Stage: <name>`"))?;
    let (black_part, white_part) = players.split_once(" vs ").ok_or_else(|| text_err(n, "expected `X(B) vs Y(W)`"))?;
    let black = black_part.strip_suffix("(B)").ok_or_else(|| text_err(n, "black entrant must end in (B)"))?;
    let white = white_part.strip_suffix("(W)").ok_or_else(|| text_err(n, "white entrant must end in (W)"))?;
    if black.is_empty() || white.is_empty() || stage_name.is_empty() {
        return Err(text_err(n, "empty entrant or stage name"));
    }

    let mut moves = Vec::new();
    let (black_score, white_score) = loop {
        let (n, line) = lines.next("move or `Game over` line")?;
        if let Some(score) = line.strip_prefix("Game over: Final score ") {
            let (b, w) = score.split_once('-').ok_or_else(|| text_err(n, "expected `B-W` score"))?;
            let parse = |s: &str| s.parse::<usize>().map_err(|_| text_err(n, "score is not a number"));
            break (parse(b)?, parse(w)?);
        }
        let (who, notation) = line.split_once(": ").ok_or_else(|| text_err(n, "expected `<Name>(B|W): <move>`"))?;
        let (player, name) = if let Some(name) = who.strip_suffix("(B)") {
            (Player::Black, name)
        } else if let Some(name) = who.strip_suffix("(W)") {
            (Player::White, name)
        } else {
            return Err(text_err(n, "mover must end in (B) or (W)"));
        };
        let expected = if player == Player::Black { black } else { white };
        if name != expected {
            return Err(text_err(n, format!("mover {name:?} does not match {expected:?}")));
        }
        let position = notation_to_position(notation, MAX_BOARD_SIZE).map_err(|e| text_err(n, e.to_string()))?;
        moves.push(TextMove { player, position });
    };

    let (n, result) = lines.next("result line")?;
    let winner = match result {
        "Black wins!" => Winner::Black,
        "White wins!" => Winner::White,
        "Tie!" => Winner::Tie,
        _ => return Err(text_err(n, "expected `Black wins!`, `White wins!` or `Tie!`")),
    };

    let mut forfeit = None;
    if let Some(line) =
        lines.peek().filter(|l| l.ends_with(" forfeits on time!") || l.ends_with(" forfeits by illegal move!"))
    {
        let (n, _) = lines.next("forfeit line")?;
        let (name, reason) = match line.strip_suffix(" forfeits on time!") {
            Some(name) => (name, EndReason::TimeForfeit),
            None => (line.strip_suffix(" forfeits by illegal move!").unwrap_or_default(), EndReason::IllegalMove),
        };
        let loser = winner.player().map(|w| if w == Player::Black { white } else { black });
        if loser != Some(name) {
            return Err(text_err(n, "forfeiting side must be the loser"));
        }
        forfeit = Some(reason);
    }

    Ok(TextGame {
        number,
        black: black.to_string(),
        white: white.to_string(),
        stage_name: stage_name.to_string(),
        moves,
        black_score,
        white_score,
        winner,
        forfeit,
    })
}

/// Pretty JSON array of games.
pub fn to_structured(logs: &[GameLog]) -> String {
    serde_json::to_string_pretty(logs).expect("game logs serialize")
}

/// Parses a JSON array of games, reporting the path of the first offending field.
pub fn from_structured(document: &str) -> Result<Vec<GameLog>, LogError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    serde_path_to_error::deserialize(de)
        .map_err(|e| LogError::Document { path: e.path().to_string(), message: e.inner().to_string() })
}

/// Board after the first `k` moves, rebuilt from the initial board by re-simulation.
pub fn replay(log: &GameLog, k: usize, rules: &RuleSet) -> Result<Board, LogError> {
    if k > log.moves.len() {
        return Err(LogError::OutOfRange { k, len: log.moves.len() });
    }
    let mut board = log.initial_board.clone();
    for (index, mv) in log.moves[..k].iter().enumerate() {
        place(&mut board, mv.player, mv.position, rules).ok_or(LogError::IllegalMove { index })?;
    }
    Ok(board)
}

/// Re-simulates the whole game under `rules`, checking every recorded move, the turn
/// order and the metadata.
pub fn verify_log(log: &GameLog, rules: &RuleSet) -> bool {
    let mut board = log.initial_board.clone();
    let mut expected: Option<Player> = None;
    for (i, mv) in log.moves.iter().enumerate() {
        match expected {
            Some(p) if p != mv.player => return false,
            None if i > 0 => return false,
            // The start player is not recorded; accept any first mover that can move.
            None if !has_valid_move(&board, mv.player, rules) => return false,
            _ => {}
        }
        let Some(flips) = place(&mut board, mv.player, mv.position, rules) else { return false };
        if flips.len() != mv.captured_count || board != mv.board_after {
            return false;
        }
        expected = determine_next_player(&board, mv.player, rules);
    }
    let m = &log.metadata;
    let counts = count_discs(&board);
    if m.game_length != log.moves.len() || m.black_score != counts.black || m.white_score != counts.white {
        return false;
    }
    let to_move = match (log.moves.is_empty(), expected) {
        (true, _) => [Player::Black, Player::White].into_iter().find(|&p| has_valid_move(&board, p, rules)),
        (false, e) => e,
    };
    match m.end_reason {
        None | Some(EndReason::Normal) => {
            to_move.is_none() && m.winner == score_winner(counts.black, counts.white, rules)
        }
        Some(EndReason::TimeForfeit | EndReason::IllegalMove) => match to_move {
            Some(offender) => m.winner == Winner::of(offender.opponent()),
            None => false,
        },
    }
}
