//! Benchmark engine for time-limited adaptation to hidden-rule Othello variants.
//!
//! Layers, bottom up: [`board`] and [`rules`] (pure engine), [`stage`] (catalog and
//! rule-free views), [`env`] (the sealed probing API), [`strategy`] (built-in
//! opponents), [`meta`] (the reference intelligent system), [`log`] (text/JSON game
//! records and replay) and [`tournament`] (budgets, forfeits, round robins, metrics).

pub mod api;
pub mod board;
pub mod clock;
pub mod env;
pub mod error;
pub mod game;
pub mod log;
pub mod meta;
pub mod rules;
pub mod stage;
pub mod strategy;
pub mod tournament;

pub use board::{Board, Cell, Player, Position};
pub use error::CoreError;
pub use rules::RuleSet;
