//! All-solutions resolution over a fact database.
//!
//! Solutions are enumerated depth-first in a pinned order: database facts in
//! insertion order, then rules in declaration order, body literals left to
//! right. Operation bodies additionally stage `ax`/`next`/`goal` effects
//! against a private working view of the database.

mod arith;
mod bindings;
mod db;
mod solve;

use thiserror::Error;

pub use arith::{compare, eval_arith, evaluate_term, Number};
pub use bindings::{unify, Bindings};
pub use db::FactDb;
pub use solve::{prove_operation, solve, solve_each, EffectSet, Program, DEFAULT_DEPTH_LIMIT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogicError {
    #[error("instantiation error: {0} is not sufficiently bound")]
    Instantiation(String),
    #[error("type error: `{0}` is not a number")]
    NotANumber(String),
    #[error("type error: `{0}` is not callable")]
    NotCallable(String),
    #[error("type error: `{0}` is not an agent name")]
    NotAnAgent(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("proof depth limit of {0} exceeded")]
    DepthExceeded(usize),
    #[error("effect literal `{0}` outside an operation body")]
    EffectOutsideOperation(String),
}
