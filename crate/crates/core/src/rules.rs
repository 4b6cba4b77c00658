//! Move legality, capture resolution and turn order for every rule variant.

use serde::{Deserialize, Serialize};

use crate::board::{Board, Cell, Player, Position, DIRECTIONS};
use crate::error::CoreError;

/// Hidden rule flags of a stage. All false is standard Othello.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RuleSet {
    #[serde(default)]
    pub ignore_occlusion: bool,
    #[serde(default)]
    pub fewer_pieces_continue: bool,
    #[serde(default)]
    pub reverse_win: bool,
}

impl RuleSet {
    pub const STANDARD: RuleSet = RuleSet { ignore_occlusion: false, fewer_pieces_continue: false, reverse_win: false };

    /// All eight flag combinations.
    pub fn all() -> impl Iterator<Item = RuleSet> {
        (0u8..8).map(|bits| RuleSet {
            ignore_occlusion: bits & 1 != 0,
            fewer_pieces_continue: bits & 2 != 0,
            reverse_win: bits & 4 != 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiscCount {
    pub black: usize,
    pub white: usize,
    pub empty: usize,
    pub blocked: usize,
}

impl DiscCount {
    pub fn of(&self, player: Player) -> usize {
        match player {
            Player::Black => self.black,
            Player::White => self.white,
        }
    }

    pub fn discs(&self) -> usize {
        self.black + self.white
    }
}

pub fn count_discs(board: &Board) -> DiscCount {
    let mut count = DiscCount::default();
    for &cell in board.cells() {
        match cell {
            Cell::Empty => count.empty += 1,
            Cell::Black => count.black += 1,
            Cell::White => count.white += 1,
            Cell::Blocked => count.blocked += 1,
        }
    }
    count
}

/// Pieces flipped by `player` placing at `pos`, sorted row-major.
///
/// Each of the eight rays accumulates contiguous opponent pieces and closes on an own
/// piece. Blocked cells end the ray unless `ignore_occlusion`, in which case they are
/// stepped over without being accumulated.
pub fn capture_lines(
    board: &Board,
    player: Player,
    pos: Position,
    ignore_occlusion: bool,
) -> Result<Vec<Position>, CoreError> {
    if !board.in_bounds(pos) {
        return Err(CoreError::OutOfBounds { pos, size: board.size() });
    }
    if board.get(pos) != Cell::Empty {
        return Err(CoreError::Occupied(pos));
    }
    let opp = player.opponent().cell();
    let mut flips = Vec::new();
    let mut ray = Vec::new();
    for dir in DIRECTIONS {
        ray.clear();
        let mut cursor = board.step(pos, dir);
        while let Some(p) = cursor {
            match board.get(p) {
                c if c == opp => ray.push(p),
                Cell::Blocked if ignore_occlusion => {}
                Cell::Blocked | Cell::Empty => break,
                _ => {
                    flips.extend_from_slice(&ray);
                    break;
                }
            }
            cursor = board.step(p, dir);
        }
    }
    flips.sort_unstable();
    Ok(flips)
}

/// Whether any ray from `pos` would capture. Short-circuits, unlike [`capture_lines`].
fn captures_any(board: &Board, player: Player, pos: Position, ignore_occlusion: bool) -> bool {
    let opp = player.opponent().cell();
    DIRECTIONS.iter().any(|&dir| {
        let mut seen_opponent = false;
        let mut cursor = board.step(pos, dir);
        while let Some(p) = cursor {
            match board.get(p) {
                c if c == opp => seen_opponent = true,
                Cell::Blocked if ignore_occlusion => {}
                Cell::Blocked | Cell::Empty => return false,
                _ => return seen_opponent,
            }
            cursor = board.step(p, dir);
        }
        false
    })
}

pub fn is_valid_move(board: &Board, player: Player, pos: Position, rules: &RuleSet) -> bool {
    board.try_get(pos) == Some(Cell::Empty) && captures_any(board, player, pos, rules.ignore_occlusion)
}

/// Every legal placement for `player`, row-major.
pub fn get_valid_moves(board: &Board, player: Player, rules: &RuleSet) -> Vec<Position> {
    board.positions().filter(|&p| is_valid_move(board, player, p, rules)).collect()
}

pub fn has_valid_move(board: &Board, player: Player, rules: &RuleSet) -> bool {
    board.positions().any(|p| is_valid_move(board, player, p, rules))
}

/// Places `player` at `pos` and flips captures. Returns the flipped positions, or
/// `None` (board untouched) if the placement is not a legal move.
pub fn place(board: &mut Board, player: Player, pos: Position, rules: &RuleSet) -> Option<Vec<Position>> {
    let flips = capture_lines(board, player, pos, rules.ignore_occlusion).ok()?;
    if flips.is_empty() {
        return None;
    }
    board.set(pos, player.cell());
    for &f in &flips {
        board.set(f, player.cell());
    }
    Some(flips)
}

/// Who acts after `mover` completed a move or pass; `None` means the game is over.
///
/// Under `fewer_pieces_continue` a mover strictly behind on discs keeps the turn while
/// it has a legal move. Otherwise the opponent moves if able, else the mover again.
pub fn determine_next_player(board: &Board, mover: Player, rules: &RuleSet) -> Option<Player> {
    let opponent = mover.opponent();
    if rules.fewer_pieces_continue {
        let counts = count_discs(board);
        if counts.of(mover) < counts.of(opponent) && has_valid_move(board, mover, rules) {
            return Some(mover);
        }
    }
    if has_valid_move(board, opponent, rules) {
        Some(opponent)
    } else if has_valid_move(board, mover, rules) {
        Some(mover)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stage::standard_board;

    fn occlusion_row_board() -> Board {
        let mut b = Board::empty(8).unwrap();
        b.set(Position::new(0, 0), Cell::Black);
        b.set(Position::new(0, 1), Cell::Blocked);
        b.set(Position::new(0, 2), Cell::White);
        b.set(Position::new(0, 3), Cell::White);
        b
    }

    #[test]
    fn opening_capture_at_d3() {
        let b = standard_board(8);
        let flips = capture_lines(&b, Player::Black, Position::new(2, 3), false).unwrap();
        assert_eq!(flips, vec![Position::new(3, 3)]);
    }

    #[test]
    fn occlusion_figure_row() {
        let b = occlusion_row_board();
        let e1 = Position::new(0, 4);
        assert_eq!(capture_lines(&b, Player::Black, e1, true).unwrap(), vec![Position::new(0, 2), Position::new(0, 3)]);
        assert!(capture_lines(&b, Player::Black, e1, false).unwrap().is_empty());
    }

    #[test]
    fn capture_errors() {
        let b = occlusion_row_board();
        assert!(matches!(
            capture_lines(&b, Player::Black, Position::new(0, 8), false),
            Err(CoreError::OutOfBounds { .. })
        ));
        assert_eq!(
            capture_lines(&b, Player::Black, Position::new(0, 1), true),
            Err(CoreError::Occupied(Position::new(0, 1)))
        );
    }

    #[test]
    fn validity_examples() {
        let b = standard_board(8);
        let rules = RuleSet::STANDARD;
        assert!(is_valid_move(&b, Player::Black, Position::new(2, 3), &rules));
        assert!(!is_valid_move(&b, Player::Black, Position::new(0, 0), &rules));
        assert!(!is_valid_move(&b, Player::Black, Position::new(9, 9), &rules));
        let blocked = occlusion_row_board();
        for rules in RuleSet::all() {
            assert!(!is_valid_move(&blocked, Player::White, Position::new(0, 1), &rules));
        }
    }

    #[test]
    fn opening_moves_in_row_major_order() {
        let b = standard_board(8);
        assert_eq!(
            get_valid_moves(&b, Player::Black, &RuleSet::STANDARD),
            vec![Position::new(2, 3), Position::new(3, 2), Position::new(4, 5), Position::new(5, 4)]
        );
        assert_eq!(get_valid_moves(&standard_board(6), Player::Black, &RuleSet::STANDARD).len(), 4);
        assert!(get_valid_moves(&Board::empty(8).unwrap(), Player::Black, &RuleSet::STANDARD).is_empty());
    }

    #[test]
    fn next_player_standard_and_pass() {
        let b = standard_board(8);
        let rules = RuleSet::STANDARD;
        assert_eq!(determine_next_player(&b, Player::Black, &rules), Some(Player::White));

        // White has nothing, Black can still play: White passes.
        let mut b = Board::empty(8).unwrap();
        b.set(Position::new(0, 0), Cell::Black);
        b.set(Position::new(0, 1), Cell::White);
        assert_eq!(determine_next_player(&b, Player::Black, &rules), Some(Player::Black));

        let mut b = Board::empty(8).unwrap();
        b.set(Position::new(0, 0), Cell::Black);
        assert_eq!(determine_next_player(&b, Player::Black, &rules), None);
    }

    #[test]
    fn fewer_pieces_mover_continues() {
        // black=3, white=6 with Black able to move.
        let mut b = Board::empty(8).unwrap();
        for c in 0..3 {
            b.set(Position::new(1, c), Cell::Black);
        }
        for c in 0..6 {
            b.set(Position::new(2, c), Cell::White);
        }
        let counts = count_discs(&b);
        assert_eq!((counts.black, counts.white), (3, 6));
        let fewer = RuleSet { fewer_pieces_continue: true, ..RuleSet::STANDARD };
        assert!(has_valid_move(&b, Player::Black, &fewer));
        assert_eq!(determine_next_player(&b, Player::Black, &fewer), Some(Player::Black));
        assert_eq!(determine_next_player(&b, Player::Black, &RuleSet::STANDARD), Some(Player::White));
        // The leader does not continue.
        assert_eq!(determine_next_player(&b, Player::White, &fewer), Some(Player::Black));
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_discs(&standard_board(8)), DiscCount { black: 2, white: 2, empty: 60, blocked: 0 });
        let mut full = Board::empty(4).unwrap();
        for p in full.clone().positions() {
            full.set(p, Cell::White);
        }
        assert_eq!(count_discs(&full).empty, 0);
    }
}
