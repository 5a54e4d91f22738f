//! Synthesis of garbage-free quantum oracles from XOR-AND-inverter graphs.
//!
//! The flow maps an [`xag::Xag`] into a LUT network with a spectral cost
//! function, lowers the LUTs to single-target gates scheduled with the
//! Bennett strategy or a SAT-based pebbling strategy, and decomposes every
//! gate into `{H, CNOT, Rz}` using the Walsh spectrum of its control function.

pub mod bench;
pub mod error;
pub mod flow;
pub mod gray;
pub mod mapper;
pub mod matrix;
pub mod pebbling;
pub mod qcirc;
pub mod reversible;
pub mod spectral;
pub mod xag;

pub use error::{Error, Result};
