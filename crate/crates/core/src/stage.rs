//! Stage definitions, the built-in catalog, the stage document format and the
//! rule-free view handed to intelligent systems.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{Board, Cell, Player, Position, MAX_BOARD_SIZE, MIN_BOARD_SIZE};
use crate::game::GameState;
use crate::rules::RuleSet;

#[derive(Debug, Error)]
pub enum StageError {
    #[error("stage document: {0}")]
    Parse(String),
    #[error("stage {id}: board size {size} outside {MIN_BOARD_SIZE}..={MAX_BOARD_SIZE}")]
    BoardSize { id: String, size: usize },
    #[error("stage {id}: {what} at {pos} is outside the {size}x{size} board")]
    OutOfBounds { id: String, what: &'static str, pos: Position, size: usize },
    #[error("stage {id}: {pos} is listed more than once among pieces and blocked cells")]
    Overlap { id: String, pos: Position },
    #[error("stage {id}: initial piece at {pos} must be black (1) or white (2), got {code}")]
    PieceColor { id: String, pos: Position, code: u8 },
    #[error("stage id must not be empty")]
    EmptyId,
    #[error("duplicate stage id {0}")]
    DuplicateId(String),
    #[error("unknown stage id {0}")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialPiece {
    pub position: Position,
    pub cell: Cell,
}

/// Full stage definition, including the hidden rule flags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StageConfig {
    pub id: String,
    pub name: String,
    pub board_size: usize,
    /// Omitted in a document means the standard centre start for the board size.
    #[serde(default)]
    pub initial_pieces: Option<Vec<InitialPiece>>,
    #[serde(default)]
    pub blocked_cells: Vec<Position>,
    #[serde(default)]
    pub rules: RuleSet,
    #[serde(default = "default_start")]
    pub start_player: Player,
}

fn default_start() -> Player {
    Player::Black
}

/// What an intelligent system (or a human player) is allowed to see of a stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SanitizedStageConfig {
    pub id: String,
    pub name: String,
    pub board_size: usize,
    pub initial_board: Board,
    pub start_player: Player,
}

/// The four centre discs of the standard start: White on the main diagonal.
pub fn center_start(size: usize) -> Vec<InitialPiece> {
    let h = size / 2;
    vec![
        InitialPiece { position: Position::new(h - 1, h - 1), cell: Cell::White },
        InitialPiece { position: Position::new(h - 1, h), cell: Cell::Black },
        InitialPiece { position: Position::new(h, h - 1), cell: Cell::Black },
        InitialPiece { position: Position::new(h, h), cell: Cell::White },
    ]
}

/// Standard opening board of the given size.
pub fn standard_board(size: usize) -> Board {
    let mut b = Board::empty(size).expect("supported size");
    for p in center_start(size) {
        b.set(p.position, p.cell);
    }
    b
}

impl StageConfig {
    pub fn new(id: &str, name: &str, board_size: usize, rules: RuleSet) -> StageConfig {
        StageConfig {
            id: id.to_string(),
            name: name.to_string(),
            board_size,
            initial_pieces: None,
            blocked_cells: Vec::new(),
            rules,
            start_player: Player::Black,
        }
    }

    pub fn pieces(&self) -> Vec<InitialPiece> {
        self.initial_pieces.clone().unwrap_or_else(|| center_start(self.board_size))
    }

    pub fn validate(&self) -> Result<(), StageError> {
        let id = || self.id.clone();
        if self.id.is_empty() {
            return Err(StageError::EmptyId);
        }
        let size = self.board_size;
        if !(MIN_BOARD_SIZE..=MAX_BOARD_SIZE).contains(&size) {
            return Err(StageError::BoardSize { id: id(), size });
        }
        let mut seen = HashSet::new();
        let located = self
            .pieces()
            .into_iter()
            .map(|p| ("piece", p.position, Some(p.cell)))
            .chain(self.blocked_cells.iter().map(|&p| ("blocked cell", p, None)));
        for (what, pos, cell) in located {
            if pos.row >= size || pos.col >= size {
                return Err(StageError::OutOfBounds { id: id(), what, pos, size });
            }
            if let Some(cell) = cell {
                if !cell.is_player() {
                    return Err(StageError::PieceColor { id: id(), pos, code: cell.code() });
                }
            }
            if !seen.insert(pos) {
                return Err(StageError::Overlap { id: id(), pos });
            }
        }
        Ok(())
    }

    /// Initial board with pieces and blocked cells placed. Assumes a validated stage.
    pub fn initial_board(&self) -> Board {
        let mut b = Board::empty(self.board_size).expect("validated stage");
        for p in self.pieces() {
            b.set(p.position, p.cell);
        }
        for &p in &self.blocked_cells {
            b.set(p, Cell::Blocked);
        }
        b
    }

    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("stage serializes")
    }
}

pub fn load_stage(document: &str) -> Result<StageConfig, StageError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let stage: StageConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        StageError::Parse(format!("at {path}: {}", e.inner()))
    })?;
    stage.validate()?;
    Ok(stage)
}

pub fn initial_state(stage: &StageConfig) -> GameState {
    GameState::new(stage.initial_board(), stage.start_player, &stage.rules)
}

pub fn public_view(stage: &StageConfig) -> SanitizedStageConfig {
    SanitizedStageConfig {
        id: stage.id.clone(),
        name: stage.name.clone(),
        board_size: stage.board_size,
        initial_board: stage.initial_board(),
        start_player: stage.start_player,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Private,
}

impl Visibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Visibility::Public => "public",
            Visibility::Private => "private",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub stage: StageConfig,
    pub visibility: Visibility,
}

/// One C-square per corner, clockwise from the top-left corner: b1, h2, g8, a7.
pub const PARTIAL_C_SQUARES_CW: [Position; 4] =
    [Position::new(0, 1), Position::new(1, 7), Position::new(7, 6), Position::new(6, 0)];

pub const STANDARD_ID: &str = "stage-0";
pub const SMALL_ID: &str = "stage-1";
pub const C_SQUARES_ID: &str = "stage-2";
pub const OCCLUSION_ID: &str = "stage-11";
pub const FEWER_PIECES_ID: &str = "stage-12";
pub const REVERSE_ID: &str = "stage-reverse";
pub const PARALLEL_ID: &str = "stage-parallel";

/// The built-in stage set, public stages first.
pub fn builtin_catalog() -> Vec<CatalogEntry> {
    let standard = RuleSet::STANDARD;
    let mut c_squares = StageConfig::new(C_SQUARES_ID, "8x8 (Partial C-Squares-cw)", 8, standard);
    c_squares.blocked_cells = PARTIAL_C_SQUARES_CW.to_vec();
    let mut occlusion = c_squares.clone();
    occlusion.id = OCCLUSION_ID.into();
    occlusion.name = "8x8 (C-Squares Occlusion Agnostic)".into();
    occlusion.rules.ignore_occlusion = true;
    let mut parallel = StageConfig::new(PARALLEL_ID, "8x8 (Parallel Start)", 8, standard);
    parallel.initial_pieces = Some(vec![
        InitialPiece { position: Position::new(3, 3), cell: Cell::Black },
        InitialPiece { position: Position::new(3, 4), cell: Cell::Black },
        InitialPiece { position: Position::new(4, 3), cell: Cell::White },
        InitialPiece { position: Position::new(4, 4), cell: Cell::White },
    ]);

    let public = [
        StageConfig::new(STANDARD_ID, "Standard 8x8", 8, standard),
        StageConfig::new(SMALL_ID, "Small 6x6", 6, standard),
        c_squares,
    ];
    let private = [
        occlusion,
        StageConfig::new(
            FEWER_PIECES_ID,
            "8x8 (Fewer Pieces Continue)",
            8,
            RuleSet { fewer_pieces_continue: true, ..standard },
        ),
        StageConfig::new(REVERSE_ID, "8x8 (Reverse Othello)", 8, RuleSet { reverse_win: true, ..standard }),
        parallel,
    ];
    public
        .into_iter()
        .map(|stage| CatalogEntry { stage, visibility: Visibility::Public })
        .chain(private.into_iter().map(|stage| CatalogEntry { stage, visibility: Visibility::Private }))
        .collect()
}

pub fn builtin_stages() -> Vec<StageConfig> {
    builtin_catalog().into_iter().map(|e| e.stage).collect()
}

pub fn find_builtin(id: &str) -> Result<CatalogEntry, StageError> {
    builtin_catalog().into_iter().find(|e| e.stage.id == id).ok_or_else(|| StageError::Unknown(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{count_discs, get_valid_moves, DiscCount};

    fn stage(id: &str) -> StageConfig {
        find_builtin(id).unwrap().stage
    }

    #[test]
    fn catalog_shape() {
        let cat = builtin_catalog();
        assert!(cat.len() >= 7);
        let vis: Vec<_> = cat.iter().map(|e| e.visibility).collect();
        assert_eq!(&vis[..3], &[Visibility::Public; 3]);
        assert!(vis[3..].iter().all(|&v| v == Visibility::Private));
        let ids: HashSet<_> = cat.iter().map(|e| e.stage.id.clone()).collect();
        assert_eq!(ids.len(), cat.len());
        assert_eq!(stage(STANDARD_ID).name, "Standard 8x8");
        assert!(stage(C_SQUARES_ID).blocked_cells.contains(&Position::new(0, 1)));
        for e in &cat {
            e.stage.validate().unwrap();
            let s = initial_state(&e.stage);
            assert!(!get_valid_moves(&s.board, e.stage.start_player, &e.stage.rules).is_empty(), "{}", e.stage.id);
        }
    }

    #[test]
    fn occlusion_twin_differs_only_in_rules() {
        let a = stage(C_SQUARES_ID);
        let mut b = stage(OCCLUSION_ID);
        assert!(b.rules.ignore_occlusion);
        b.id = a.id.clone();
        b.name = a.name.clone();
        b.rules = a.rules;
        assert_eq!(a, b);
    }

    #[test]
    fn minimal_document_is_stage_zero() {
        let doc = r#"{"id": "stage-0", "name": "Standard 8x8", "boardSize": 8}"#;
        assert_eq!(load_stage(doc).unwrap(), stage(STANDARD_ID));
    }

    #[test]
    fn six_by_six_centre() {
        let doc = r#"{"id": "s6", "name": "six", "boardSize": 6}"#;
        let s = load_stage(doc).unwrap();
        let b = s.initial_board();
        assert_eq!(b.get(Position::new(2, 2)), Cell::White);
        assert_eq!(b.get(Position::new(3, 3)), Cell::White);
        assert_eq!(b.get(Position::new(2, 3)), Cell::Black);
        assert_eq!(b.get(Position::new(3, 2)), Cell::Black);
    }

    #[test]
    fn document_validation() {
        let on_blocked = r#"{"id": "x", "name": "x", "boardSize": 8,
            "blockedCells": [{"row": 3, "col": 3}]}"#;
        assert!(matches!(load_stage(on_blocked), Err(StageError::Overlap { .. })));
        let oob = r#"{"id": "x", "name": "x", "boardSize": 6, "blockedCells": [{"row": 6, "col": 0}]}"#;
        assert!(matches!(load_stage(oob), Err(StageError::OutOfBounds { .. })));
        let unknown = r#"{"id": "x", "name": "x", "boardSize": 8, "colour": 1}"#;
        let err = load_stage(unknown).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
        let bad_piece = r#"{"id": "x", "name": "x", "boardSize": 8,
            "initialPieces": [{"position": {"row": 0, "col": 0}, "cell": 3}]}"#;
        assert!(matches!(load_stage(bad_piece), Err(StageError::PieceColor { .. })));
        let big = r#"{"id": "x", "name": "x", "boardSize": 20}"#;
        assert!(matches!(load_stage(big), Err(StageError::BoardSize { .. })));
    }

    #[test]
    fn documents_round_trip() {
        for s in builtin_stages() {
            assert_eq!(load_stage(&s.to_document()).unwrap(), s);
        }
    }

    #[test]
    fn initial_states() {
        let s0 = initial_state(&stage(STANDARD_ID));
        assert_eq!(count_discs(&s0.board), DiscCount { black: 2, white: 2, empty: 60, blocked: 0 });
        assert_eq!(s0.current_player, Player::Black);
        assert!(s0.history.is_empty());
        assert_eq!(count_discs(&initial_state(&stage(C_SQUARES_ID)).board).blocked, 4);

        let mut custom = StageConfig::new("c6", "custom", 8, RuleSet::STANDARD);
        let mut pieces = center_start(8);
        pieces.push(InitialPiece { position: Position::new(0, 0), cell: Cell::Black });
        pieces.push(InitialPiece { position: Position::new(7, 7), cell: Cell::White });
        custom.initial_pieces = Some(pieces);
        custom.validate().unwrap();
        assert_eq!(count_discs(&initial_state(&custom).board).discs(), 6);
    }

    #[test]
    fn public_view_is_rule_blind() {
        let strip = |mut v: SanitizedStageConfig| {
            v.id.clear();
            v.name.clear();
            serde_json::to_string(&v).unwrap()
        };
        assert_eq!(strip(public_view(&stage(OCCLUSION_ID))), strip(public_view(&stage(C_SQUARES_ID))));
        assert_eq!(strip(public_view(&stage(REVERSE_ID))), strip(public_view(&stage(STANDARD_ID))));
        assert_eq!(strip(public_view(&stage(FEWER_PIECES_ID))), strip(public_view(&stage(STANDARD_ID))));
        for s in builtin_stages() {
            let json = serde_json::to_value(public_view(&s)).unwrap();
            let obj = json.as_object().unwrap();
            assert!(!obj.contains_key("rules"));
            assert!(!json.to_string().contains("Occlusion\":") && !json.to_string().contains("reverseWin"));
        }
    }
}
