//! Iterative-deepening alpha-beta over the environment API.

use std::time::Duration;

use super::{MoveContext, Strategy, StrategyError};
use crate::board::{Board, Player, Position};
use crate::env::EnvHandle;
use crate::game::Winner;
use crate::rules::count_discs;

/// Value of a finished game won by the searching side.
pub const WIN_SCORE: i32 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOutcome {
    pub best: Position,
    /// Root value of `best` at `completed_depth`, from the searcher's perspective.
    pub value: i32,
    pub completed_depth: u32,
    pub nodes: u64,
}

struct Search<'a> {
    env: &'a EnvHandle,
    root: Player,
    deadline: Option<Duration>,
    nodes: u64,
}

struct Aborted;

impl Search<'_> {
    fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| self.env.clock().now() > d)
    }

    fn terminal_value(&self, board: &Board) -> i32 {
        match self.env.declare_winner(board) {
            Winner::Tie => 0,
            w if w == Winner::of(self.root) => WIN_SCORE,
            _ => -WIN_SCORE,
        }
    }

    /// Value of `board` right after `mover` moved.
    fn child_value(
        &mut self,
        board: &Board,
        mover: Player,
        depth: u32,
        alpha: i32,
        beta: i32,
        check: bool,
    ) -> Result<i32, Aborted> {
        match self.env.next_player(board, mover) {
            None => Ok(self.terminal_value(board)),
            Some(next) => self.node(board, next, depth, alpha, beta, check),
        }
    }

    fn node(
        &mut self,
        board: &Board,
        to_move: Player,
        depth: u32,
        mut alpha: i32,
        mut beta: i32,
        check: bool,
    ) -> Result<i32, Aborted> {
        self.nodes += 1;
        if check && self.timed_out() {
            return Err(Aborted);
        }
        if depth == 0 {
            return Ok(self.env.evaluate_board(board, self.root).total_score);
        }
        let moves = self.env.get_valid_moves(board, to_move).unwrap_or_default();
        if moves.is_empty() {
            return Ok(self.env.evaluate_board(board, self.root).total_score);
        }
        let maximizing = to_move == self.root;
        let mut best = if maximizing { i32::MIN } else { i32::MAX };
        for m in moves {
            let sim = self.env.simulate_move(board, to_move, m.row, m.col);
            if !sim.valid {
                continue;
            }
            let v = self.child_value(&sim.resulting_board, to_move, depth - 1, alpha, beta, check)?;
            if maximizing {
                best = best.max(v);
                alpha = alpha.max(v);
            } else {
                best = best.min(v);
                beta = beta.min(v);
            }
            if alpha >= beta {
                break;
            }
        }
        if best == i32::MIN || best == i32::MAX {
            return Ok(self.env.evaluate_board(board, self.root).total_score);
        }
        Ok(best)
    }

    /// One full-width root iteration. Ties keep the earliest move in `moves`.
    fn root(&mut self, board: &Board, moves: &[Position], depth: u32, check: bool) -> Result<(Position, i32), Aborted> {
        let mut best: Option<(Position, i32)> = None;
        let mut alpha = i32::MIN;
        for &m in moves {
            let sim = self.env.simulate_move(board, self.root, m.row, m.col);
            if !sim.valid {
                continue;
            }
            let v = self.child_value(&sim.resulting_board, self.root, depth - 1, alpha, i32::MAX, check)?;
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((m, v));
                alpha = v;
            }
        }
        Ok(best.unwrap_or((moves[0], 0)))
    }
}

/// Searches to `max_depth` plies, deepening one ply at a time.
///
/// `deadline` is an absolute reading of the env clock. Depth 1 always completes; a
/// deeper iteration that runs past the deadline is discarded, and no iteration starts
/// once half of the time before the deadline is gone.
pub fn alphabeta_search(
    env: &EnvHandle,
    board: &Board,
    player: Player,
    valid_moves: &[Position],
    max_depth: u32,
    deadline: Option<Duration>,
) -> Result<SearchOutcome, StrategyError> {
    if valid_moves.is_empty() {
        return Err(StrategyError::NoMoves);
    }
    let start = env.clock().now();
    let mut search = Search { env, root: player, deadline, nodes: 0 };
    let (mut best, mut value) = search.root(board, valid_moves, 1, false).unwrap_or((valid_moves[0], 0));
    let mut completed_depth = 1;
    for depth in 2..=max_depth.max(1) {
        if let Some(d) = deadline {
            let now = env.clock().now();
            if now >= d || now - start > (d.saturating_sub(start)) / 2 {
                break;
            }
        }
        match search.root(board, valid_moves, depth, deadline.is_some()) {
            Ok((m, v)) => {
                best = m;
                value = v;
                completed_depth = depth;
            }
            Err(Aborted) => break,
        }
    }
    Ok(SearchOutcome { best, value, completed_depth, nodes: search.nodes })
}

/// Budget-aware alpha-beta: the smart-lv1 and smart-lv2 opponents.
#[derive(Debug, Clone)]
pub struct AlphaBeta {
    id: &'static str,
    name: &'static str,
    pub depth: u32,
}

impl AlphaBeta {
    pub fn lv1() -> Self {
        AlphaBeta { id: "smart-lv1", name: "Smart-Lv1", depth: 3 }
    }

    pub fn lv2() -> Self {
        AlphaBeta { id: "smart-lv2", name: "Smart-Lv2", depth: 5 }
    }
}

/// Share of the remaining game budget granted to one move.
pub fn move_slice(board: &Board, remaining: Duration) -> Duration {
    let expected_moves = (count_discs(board).empty / 2).max(8);
    remaining / expected_moves as u32
}

impl Strategy for AlphaBeta {
    fn id(&self) -> &str {
        self.id
    }

    fn display_name(&self) -> &str {
        self.name
    }

    fn decide(&self, ctx: &mut MoveContext<'_>) -> Result<Position, StrategyError> {
        let deadline = ctx.elapsed() + move_slice(ctx.board, ctx.remaining_budget);
        alphabeta_search(ctx.env, ctx.board, ctx.player, ctx.valid_moves, self.depth, Some(deadline)).map(|o| o.best)
    }
}

/// Fixed-depth search that ignores its budget. Exists to exercise time forfeits.
#[derive(Debug, Clone)]
pub struct SmartSlow {
    pub depth: u32,
}

impl Default for SmartSlow {
    fn default() -> Self {
        SmartSlow { depth: 7 }
    }
}

impl Strategy for SmartSlow {
    fn id(&self) -> &str {
        "smart-lv3-slow"
    }

    fn display_name(&self) -> &str {
        "Smart-Lv3-Slow"
    }

    fn decide(&self, ctx: &mut MoveContext<'_>) -> Result<Position, StrategyError> {
        alphabeta_search(ctx.env, ctx.board, ctx.player, ctx.valid_moves, self.depth, None).map(|o| o.best)
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::clock::Clock;
    use crate::game::score_winner;
    use crate::rules::{self, RuleSet};
    use crate::stage::{find_builtin, STANDARD_ID};
    use crate::strategy::testing::env_for;

    /// Plain minimax without pruning, driven by the rules directly.
    fn oracle(board: &Board, to_move: Player, root: Player, depth: u32, r: &RuleSet) -> i32 {
        let eval = |b: &Board| {
            let c = count_discs(b);
            let piece = c.of(root) as i32 - c.of(root.opponent()) as i32;
            let mob = rules::get_valid_moves(b, root, r).len() as i32
                - rules::get_valid_moves(b, root.opponent(), r).len() as i32;
            let corners = b.corners();
            let corner: i32 = corners
                .iter()
                .map(|&p| match b.get(p) {
                    c if c == root.cell() => 25,
                    c if c == root.opponent().cell() => -25,
                    _ => 0,
                })
                .sum();
            piece + 2 * mob + corner
        };
        if depth == 0 {
            return eval(board);
        }
        let moves = rules::get_valid_moves(board, to_move, r);
        if moves.is_empty() {
            return eval(board);
        }
        let values = moves.iter().map(|&m| {
            let mut b = board.clone();
            rules::place(&mut b, to_move, m, r).unwrap();
            match rules::determine_next_player(&b, to_move, r) {
                None => {
                    let c = count_discs(&b);
                    match score_winner(c.black, c.white, r) {
                        Winner::Tie => 0,
                        w if w == Winner::of(root) => WIN_SCORE,
                        _ => -WIN_SCORE,
                    }
                }
                Some(next) => oracle(&b, next, root, depth - 1, r),
            }
        });
        if to_move == root {
            values.max().unwrap()
        } else {
            values.min().unwrap()
        }
    }

    /// Oracle root choice: first move (row-major) with the maximal value.
    fn oracle_root(board: &Board, player: Player, depth: u32, r: &RuleSet) -> (Position, i32) {
        let mut best: Option<(Position, i32)> = None;
        for m in rules::get_valid_moves(board, player, r) {
            let mut b = board.clone();
            rules::place(&mut b, player, m, r).unwrap();
            let v = match rules::determine_next_player(&b, player, r) {
                None => {
                    let c = count_discs(&b);
                    match score_winner(c.black, c.white, r) {
                        Winner::Tie => 0,
                        w if w == Winner::of(player) => WIN_SCORE,
                        _ => -WIN_SCORE,
                    }
                }
                Some(next) => oracle(&b, next, player, depth - 1, r),
            };
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((m, v));
            }
        }
        best.unwrap()
    }

    /// Random playout of `plies` moves from the stage start; returns board and side to move.
    fn random_position(stage_id: &str, plies: usize, seed: u64) -> Option<(Board, Player)> {
        let stage = find_builtin(stage_id).unwrap().stage;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut board = stage.initial_board();
        let mut to_move = stage.start_player;
        for _ in 0..plies {
            let moves = rules::get_valid_moves(&board, to_move, &stage.rules);
            let &m = moves.choose(&mut rng)?;
            rules::place(&mut board, to_move, m, &stage.rules);
            to_move = rules::determine_next_player(&board, to_move, &stage.rules)?;
        }
        Some((board, to_move))
    }

    #[test]
    fn matches_unpruned_minimax() {
        for stage_id in
            [STANDARD_ID, crate::stage::REVERSE_ID, crate::stage::FEWER_PIECES_ID, crate::stage::OCCLUSION_ID]
        {
            let env = env_for(stage_id);
            let r = find_builtin(stage_id).unwrap().stage.rules;
            let mut checked = 0;
            for seed in 0..12u64 {
                let Some((board, player)) = random_position(stage_id, 8 + (seed as usize * 4) % 44, seed) else {
                    continue;
                };
                let moves = env.get_valid_moves(&board, player).unwrap();
                for depth in 1..=3 {
                    let got = alphabeta_search(&env, &board, player, &moves, depth, None).unwrap();
                    assert_eq!(
                        (got.best, got.value),
                        oracle_root(&board, player, depth, &r),
                        "{stage_id} seed {seed} depth {depth}"
                    );
                    assert_eq!(got.completed_depth, depth);
                }
                checked += 1;
            }
            assert!(checked >= 8);
        }
    }

    #[test]
    fn depth_one_is_argmax_of_evaluation() {
        let env = env_for(STANDARD_ID);
        for seed in 0..20 {
            let Some((board, player)) = random_position(STANDARD_ID, 10, seed) else { continue };
            let moves = env.get_valid_moves(&board, player).unwrap();
            let mut best: Option<(Position, i32)> = None;
            for &m in &moves {
                let sim = env.simulate_move(&board, player, m.row, m.col);
                let v = env.evaluate_board(&sim.resulting_board, player).total_score;
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((m, v));
                }
            }
            assert_eq!(alphabeta_search(&env, &board, player, &moves, 1, None).unwrap().best, best.unwrap().0);
        }
    }

    /// Every opponent reply still leaves `player` a corner capture.
    fn forces_corner(board: &Board, player: Player, m: Position, r: &RuleSet) -> bool {
        let mut b = board.clone();
        rules::place(&mut b, player, m, r).unwrap();
        if rules::determine_next_player(&b, player, r) != Some(player.opponent()) {
            return false;
        }
        let corners = b.corners();
        rules::get_valid_moves(&b, player.opponent(), r).into_iter().all(|reply| {
            let mut after = b.clone();
            rules::place(&mut after, player.opponent(), reply, r).unwrap();
            rules::determine_next_player(&after, player.opponent(), r) == Some(player)
                && rules::get_valid_moves(&after, player, r).iter().any(|p| corners.contains(p))
        })
    }

    #[test]
    fn depth_three_finds_forced_corner_that_depth_one_misses() {
        let env = env_for(STANDARD_ID);
        let r = RuleSet::STANDARD;
        let mut found = 0;
        for seed in 0..400u64 {
            let Some((board, player)) = random_position(STANDARD_ID, 14 + (seed as usize % 20), seed) else {
                continue;
            };
            let moves = env.get_valid_moves(&board, player).unwrap();
            if moves.iter().any(|p| board.corners().contains(p)) {
                continue;
            }
            let d1 = alphabeta_search(&env, &board, player, &moves, 1, None).unwrap().best;
            let d3 = alphabeta_search(&env, &board, player, &moves, 3, None).unwrap().best;
            if forces_corner(&board, player, d3, &r) && !forces_corner(&board, player, d1, &r) {
                assert_eq!(d3, oracle_root(&board, player, 3, &r).0);
                found += 1;
            }
        }
        assert!(found > 0, "no forced-corner position among samples");
    }

    #[test]
    fn expired_slice_returns_depth_one_move() {
        let stage = find_builtin(STANDARD_ID).unwrap().stage;
        let env = EnvHandle::new(stage, Arc::new(Clock::virtual_with(Duration::from_millis(1))));
        let board = env.stage_view().initial_board;
        let moves = env.get_valid_moves(&board, Player::Black).unwrap();
        let now = env.clock().now();
        let out = alphabeta_search(&env, &board, Player::Black, &moves, 5, Some(now)).unwrap();
        assert_eq!(out.completed_depth, 1);
        assert_eq!(out.best, alphabeta_search(&env, &board, Player::Black, &moves, 1, None).unwrap().best);

        // A deadline that falls inside depth 2 keeps the depth-1 answer.
        let start = env.clock().now();
        let out =
            alphabeta_search(&env, &board, Player::Black, &moves, 5, Some(start + Duration::from_millis(30))).unwrap();
        assert!(out.completed_depth >= 1 && out.completed_depth < 5);
        assert!(moves.contains(&out.best));
        assert_eq!(alphabeta_search(&env, &board, Player::Black, &[], 3, None), Err(StrategyError::NoMoves));
    }

    #[test]
    fn deep_and_medium_agree_on_forced_wins() {
        let env = env_for(STANDARD_ID);
        let mut forced = 0;
        for seed in 0..60u64 {
            let Some((board, player)) = random_position(STANDARD_ID, 56 + (seed as usize % 4), seed) else { continue };
            let moves = env.get_valid_moves(&board, player).unwrap();
            let d5 = alphabeta_search(&env, &board, player, &moves, 5, None).unwrap();
            if d5.value != WIN_SCORE {
                continue;
            }
            let d7 = alphabeta_search(&env, &board, player, &moves, 7, None).unwrap();
            assert_eq!(d7.value, WIN_SCORE, "seed {seed}");
            forced += 1;
        }
        assert!(forced > 0);
    }

    #[test]
    fn slice_formula() {
        let board = find_builtin(STANDARD_ID).unwrap().stage.initial_board();
        assert_eq!(move_slice(&board, Duration::from_secs(30)), Duration::from_secs(1));
        let full = Board::from_codes(&vec![vec![1u8; 8]; 8]).unwrap();
        assert_eq!(move_slice(&full, Duration::from_secs(8)), Duration::from_secs(1));
    }
}
