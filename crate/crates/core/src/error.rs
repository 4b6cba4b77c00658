use thiserror::Error;

use crate::board::Position;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("board size {0} outside supported range 4..=16")]
    BadBoardSize(usize),
    #[error("row {row} has {len} cells, expected {size}")]
    NotSquare { row: usize, len: usize, size: usize },
    #[error("invalid cell code {0}")]
    BadCell(u8),
    #[error("position {pos} outside {size}x{size} board")]
    OutOfBounds { pos: Position, size: usize },
    #[error("position {0} is not empty")]
    Occupied(Position),
    #[error("malformed or out-of-range notation {0:?}")]
    BadNotation(String),
    #[error("illegal move at {pos} for {player}")]
    IllegalMove { pos: Position, player: &'static str },
    #[error("game is already over")]
    GameOver,
    #[error("game is not over yet")]
    NotTerminal,
    #[error("board is {got}x{got}, stage expects {expected}x{expected}")]
    SizeMismatch { got: usize, expected: usize },
}
