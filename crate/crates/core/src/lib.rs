//! Command suggestions for an interactive natural-deduction prover,
//! computed by societies of argument agents that cooperate over
//! blackboards, elected by command agents and governed by adaptive
//! complexity ratings and goal classification.

pub mod agents;
pub mod board;
pub mod classify;
pub mod logic;
pub mod pai;
pub mod proof;
pub mod resources;
pub mod session;
pub mod tactics;
