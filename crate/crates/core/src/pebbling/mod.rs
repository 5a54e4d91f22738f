//! Reversible pebbling: the clean-up schedule as a SAT problem under a
//! qubit budget.

mod encode;
pub mod sat;
mod strategy;

pub use encode::{
    encode, prune, solve, Encoding, MoveMode, PebblingInstance, PebblingSolution, SolveResult, DEEPENING_STRIDE,
    DEFAULT_CONFLICT_LIMIT,
};
pub use strategy::{Move, PebblingDag, PebblingStrategy};
