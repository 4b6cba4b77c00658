//! Board geometry: cells, positions, square grids and algebraic notation.

use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CoreError;

pub const MIN_BOARD_SIZE: usize = 4;
pub const MAX_BOARD_SIZE: usize = 16;

/// Contents of a single square. The numeric encoding is part of every wire format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum Cell {
    #[default]
    Empty = 0,
    Black = 1,
    White = 2,
    Blocked = 3,
}

impl Cell {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Cell> {
        match code {
            0 => Some(Cell::Empty),
            1 => Some(Cell::Black),
            2 => Some(Cell::White),
            3 => Some(Cell::Blocked),
            _ => None,
        }
    }

    /// The other colour. Only meaningful for `Black` and `White`.
    pub fn opponent(self) -> Cell {
        match self {
            Cell::Black => Cell::White,
            Cell::White => Cell::Black,
            other => other,
        }
    }

    pub fn is_player(self) -> bool {
        matches!(self, Cell::Black | Cell::White)
    }

    /// Single-letter colour tag used by the text log (`B`/`W`).
    pub fn letter(self) -> char {
        match self {
            Cell::Black => 'B',
            Cell::White => 'W',
            Cell::Blocked => '#',
            Cell::Empty => '.',
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.code())
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let code = u8::deserialize(d)?;
        Cell::from_code(code).ok_or_else(|| de::Error::custom(format!("invalid cell code {code}, expected 0..=3")))
    }
}

/// A side to move. Serialized as 1 (Black) or 2 (White).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Black,
    White,
}

impl Player {
    pub fn cell(self) -> Cell {
        match self {
            Player::Black => Cell::Black,
            Player::White => Cell::White,
        }
    }

    pub fn from_cell(cell: Cell) -> Option<Player> {
        match cell {
            Cell::Black => Some(Player::Black),
            Cell::White => Some(Player::White),
            _ => None,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::Black => Player::White,
            Player::White => Player::Black,
        }
    }

    pub fn code(self) -> u8 {
        self.cell().code()
    }

    pub fn letter(self) -> char {
        self.cell().letter()
    }

    pub fn name(self) -> &'static str {
        match self {
            Player::Black => "Black",
            Player::White => "White",
        }
    }
}

impl Serialize for Player {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.code())
    }
}

impl<'de> Deserialize<'de> for Player {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let code = u8::deserialize(d)?;
        Cell::from_code(code)
            .and_then(Player::from_cell)
            .ok_or_else(|| de::Error::custom(format!("invalid player {code}, expected 1 or 2")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(row: usize, col: usize) -> Self {
        Position { row, col }
    }

    /// Algebraic notation: column letter then 1-based row, e.g. (2,3) is `d3`.
    pub fn to_notation(self, size: usize) -> Result<String, CoreError> {
        if self.row >= size || self.col >= size {
            return Err(CoreError::OutOfBounds { pos: self, size });
        }
        let letter = (b'a' + self.col as u8) as char;
        Ok(format!("{letter}{}", self.row + 1))
    }

    pub fn from_notation(text: &str, size: usize) -> Result<Position, CoreError> {
        let bad = || CoreError::BadNotation(text.to_string());
        let mut chars = text.chars();
        let letter = chars.next().ok_or_else(bad)?;
        if !letter.is_ascii_lowercase() {
            return Err(bad());
        }
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return Err(bad());
        }
        let row: usize = digits.parse().map_err(|_| bad())?;
        let pos = Position::new(row - 1, (letter as u8 - b'a') as usize);
        if pos.row >= size || pos.col >= size {
            return Err(bad());
        }
        Ok(pos)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

pub fn position_to_notation(pos: Position, size: usize) -> Result<String, CoreError> {
    pos.to_notation(size)
}

pub fn notation_to_position(text: &str, size: usize) -> Result<Position, CoreError> {
    Position::from_notation(text, size)
}

pub const DIRECTIONS: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// Square grid of cells, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Board {
    size: usize,
    cells: Vec<Cell>,
}

impl Board {
    pub fn empty(size: usize) -> Result<Board, CoreError> {
        if !(MIN_BOARD_SIZE..=MAX_BOARD_SIZE).contains(&size) {
            return Err(CoreError::BadBoardSize(size));
        }
        Ok(Board { size, cells: vec![Cell::Empty; size * size] })
    }

    pub fn from_rows(rows: &[Vec<Cell>]) -> Result<Board, CoreError> {
        let size = rows.len();
        let mut board = Board::empty(size)?;
        for (r, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(CoreError::NotSquare { row: r, len: row.len(), size });
            }
            board.cells[r * size..(r + 1) * size].copy_from_slice(row);
        }
        Ok(board)
    }

    pub fn from_codes(rows: &[Vec<u8>]) -> Result<Board, CoreError> {
        let rows = rows
            .iter()
            .map(|row| {
                row.iter().map(|&c| Cell::from_code(c).ok_or(CoreError::BadCell(c))).collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Board::from_rows(&rows)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn in_bounds(&self, pos: Position) -> bool {
        pos.row < self.size && pos.col < self.size
    }

    /// Cell at `pos`; panics when out of bounds.
    pub fn get(&self, pos: Position) -> Cell {
        assert!(self.in_bounds(pos), "{pos} outside {0}x{0} board", self.size);
        self.cells[pos.row * self.size + pos.col]
    }

    pub fn try_get(&self, pos: Position) -> Option<Cell> {
        self.in_bounds(pos).then(|| self.cells[pos.row * self.size + pos.col])
    }

    pub fn set(&mut self, pos: Position, cell: Cell) {
        assert!(self.in_bounds(pos), "{pos} outside {0}x{0} board", self.size);
        self.cells[pos.row * self.size + pos.col] = cell;
    }

    /// Step from `pos` in direction `(dr, dc)`; `None` when leaving the board.
    pub fn step(&self, pos: Position, (dr, dc): (isize, isize)) -> Option<Position> {
        let r = pos.row as isize + dr;
        let c = pos.col as isize + dc;
        let n = self.size as isize;
        (r >= 0 && r < n && c >= 0 && c < n).then(|| Position::new(r as usize, c as usize))
    }

    /// All positions in row-major order.
    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.size).flat_map(move |r| (0..self.size).map(move |c| Position::new(r, c)))
    }

    pub fn corners(&self) -> [Position; 4] {
        let last = self.size - 1;
        [Position::new(0, 0), Position::new(0, last), Position::new(last, 0), Position::new(last, last)]
    }

    pub fn rows(&self) -> Vec<Vec<Cell>> {
        self.cells.chunks(self.size).map(|r| r.to_vec()).collect()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Positions of all blocked cells, row-major.
    pub fn blocked(&self) -> Vec<Position> {
        self.positions().filter(|&p| self.get(p) == Cell::Blocked).collect()
    }

    /// Renders the grid with `.` `B` `W` `#` glyphs, one row per line.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.size * (self.size * 2 + 4) + 32);
        out.push_str("  ");
        for c in 0..self.size {
            out.push(' ');
            out.push((b'a' + c as u8) as char);
        }
        out.push('\n');
        for r in 0..self.size {
            out.push_str(&format!("{:>2}", r + 1));
            for c in 0..self.size {
                out.push(' ');
                out.push(self.get(Position::new(r, c)).letter());
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Board {}x{}\n{}", self.size, self.size, self.render())
    }
}

impl Serialize for Board {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[Cell]> = self.cells.chunks(self.size).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Board {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<Cell>>::deserialize(d)?;
        Board::from_rows(&rows).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn notation_examples() {
        assert_eq!(position_to_notation(Position::new(2, 3), 8).unwrap(), "d3");
        assert_eq!(position_to_notation(Position::new(0, 0), 8).unwrap(), "a1");
        assert_eq!(notation_to_position("d3", 8).unwrap(), Position::new(2, 3));
        assert_eq!(notation_to_position("a1", 8).unwrap(), Position::new(0, 0));
        assert_eq!(notation_to_position("p16", 16).unwrap(), Position::new(15, 15));
    }

    #[test]
    fn notation_rejects_garbage() {
        for bad in ["z9", "i1", "a9", "a0", "", "3d", "A1", "a01", "a-1", "aa"] {
            assert!(notation_to_position(bad, 8).is_err(), "{bad} accepted");
        }
        assert!(position_to_notation(Position::new(8, 0), 8).is_err());
    }

    #[test]
    fn board_json_uses_cell_codes() {
        let mut b = Board::empty(4).unwrap();
        b.set(Position::new(1, 2), Cell::Blocked);
        b.set(Position::new(0, 0), Cell::White);
        let json = serde_json::to_string(&b).unwrap();
        assert_eq!(json, "[[2,0,0,0],[0,0,3,0],[0,0,0,0],[0,0,0,0]]");
        let back: Board = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn board_rejects_bad_shapes_and_codes() {
        assert!(serde_json::from_str::<Board>("[[0,0,0],[0,0,0],[0,0,0]]").is_err());
        assert!(serde_json::from_str::<Board>("[[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0]]").is_err());
        assert!(serde_json::from_str::<Board>("[[0,0,0,4],[0,0,0,0],[0,0,0,0],[0,0,0,0]]").is_err());
        assert!(Board::empty(17).is_err());
    }
}
