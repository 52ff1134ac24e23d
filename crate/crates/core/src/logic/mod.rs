//! Typed terms, positions and subterm operations.

mod diff;
mod parse;
mod position;
mod term;
mod types;

pub use diff::{diff_single_subterm, SubtermDiff};
pub use parse::{parse_formula, parse_term, Signature};
pub use position::{format_positions, parse_positions, Position};
pub use term::{Connective, Quantifier, Symbol, Term};
pub use types::Type;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("position {position}: {reason}")]
    Position { position: Position, reason: String },
    #[error("type error: {0}")]
    Type(String),
    #[error("parse error: {0}")]
    Parse(String),
}
