//! Satisfiability solver and model builder for arithmetic μ-calculi.
//!
//! The pipeline: parse and normalize a formula, build its Fischer–Ladner
//! closure and nondeterministic tracking parity automaton, co-determinize it
//! (parity → Büchi → Safra/Piterman → complement), then run a global caching
//! loop that expands the deterministic automaton on the fly and propagates
//! (un)satisfiability through nested fixpoints of the one-step operators.
//! Satisfiable verdicts come with an extracted model that is re-checked by
//! direct Kleene evaluation of the semantics.
//!
//! One-step satisfiability is pluggable: relational, graded (multigraph),
//! probabilistic (Markov chain) backends and their fusion are provided.

use thiserror::Error;

pub mod closure;
pub mod determinize;
pub mod engine;
pub mod formula;
pub mod games;
pub mod gen;
pub mod model;
pub mod onestep;
pub mod parse;
pub mod poly;
pub mod selftest;
pub mod tracking;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub use formula::{Formula, Logic, LogicSpec, ModalKind, ModalOp};
pub use poly::Polynomial;
