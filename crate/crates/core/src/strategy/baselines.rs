use rand::Rng;

use super::weights::static_weights;
use super::{MoveContext, Strategy, StrategyError};
use crate::board::Position;

fn ensure_moves(ctx: &MoveContext<'_>) -> Result<(), StrategyError> {
    if ctx.valid_moves.is_empty() {
        return Err(StrategyError::NoMoves);
    }
    Ok(())
}

/// First maximum in iteration order, so ties resolve row-major.
fn first_max_by_key<T: PartialOrd>(moves: &[Position], mut key: impl FnMut(Position) -> Option<T>) -> Option<Position> {
    let mut best: Option<(Position, T)> = None;
    for &m in moves {
        let Some(k) = key(m) else { continue };
        if best.as_ref().is_none_or(|(_, b)| k > *b) {
            best = Some((m, k));
        }
    }
    best.map(|(m, _)| m)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RandomMover;

impl Strategy for RandomMover {
    fn id(&self) -> &str {
        "random"
    }

    fn display_name(&self) -> &str {
        "Random"
    }

    fn decide(&self, ctx: &mut MoveContext<'_>) -> Result<Position, StrategyError> {
        ensure_moves(ctx)?;
        let i = ctx.rng.gen_range(0..ctx.valid_moves.len());
        Ok(ctx.valid_moves[i])
    }
}

/// Maximises immediate captures.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl Strategy for Greedy {
    fn id(&self) -> &str {
        "greedy"
    }

    fn display_name(&self) -> &str {
        "Greedy"
    }

    fn decide(&self, ctx: &mut MoveContext<'_>) -> Result<Position, StrategyError> {
        ensure_moves(ctx)?;
        let (env, board, player) = (ctx.env, ctx.board, ctx.player);
        let best = first_max_by_key(ctx.valid_moves, |m| {
            let r = env.simulate_move(board, player, m.row, m.col);
            r.valid.then_some(r.captured_count)
        });
        Ok(best.unwrap_or(ctx.valid_moves[0]))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Positional;

impl Positional {
    pub(crate) fn choose(ctx: &MoveContext<'_>) -> Position {
        let weights = static_weights(ctx.board.size());
        first_max_by_key(ctx.valid_moves, |m| Some(weights[m.row][m.col])).unwrap_or(ctx.valid_moves[0])
    }
}

impl Strategy for Positional {
    fn id(&self) -> &str {
        "positional"
    }

    fn display_name(&self) -> &str {
        "Positional"
    }

    fn decide(&self, ctx: &mut MoveContext<'_>) -> Result<Position, StrategyError> {
        ensure_moves(ctx)?;
        Ok(Positional::choose(ctx))
    }
}

/// Takes any corner (row-major), otherwise plays positionally.
#[derive(Debug, Clone, Copy, Default)]
pub struct Corners;

impl Strategy for Corners {
    fn id(&self) -> &str {
        "corners"
    }

    fn display_name(&self) -> &str {
        "Corners"
    }

    fn decide(&self, ctx: &mut MoveContext<'_>) -> Result<Position, StrategyError> {
        ensure_moves(ctx)?;
        let corners = ctx.board.corners();
        match ctx.valid_moves.iter().find(|m| corners.contains(m)) {
            Some(&m) => Ok(m),
            None => Ok(Positional::choose(ctx)),
        }
    }
}
