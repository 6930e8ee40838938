//! Parity games, concrete-model semantics, and the game oracles used for
//! verification at desk scale.

mod fixgame;
mod mcgame;
pub mod parity;
mod semantics;

pub use fixgame::build_fixpoint_game;
pub use mcgame::{build_mc_game, McGame};
pub use parity::{
    mcnaughton_oracle, verify_strategies, zielonka_solve, ParityGame, PgNode, Player, Solution,
};
pub use semantics::{semantics_eval, Coalgebra, CoalgebraPart, Valuation};
