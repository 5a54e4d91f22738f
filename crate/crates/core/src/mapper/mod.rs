//! LUT mapping with priority cuts.
//!
//! The spectral mode ranks cuts by the number of nonzero Walsh coefficients
//! of their function, which tracks the size of the gray-synthesized circuit.
//! The baseline mode is a conventional area-flow mapper and serves as the
//! reference flow.

mod cuts;
mod lut;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::xag::{Node, Xag};

pub use cuts::{enumerate_cuts, match_xor_blocks, Cut, NodeCuts, XorBlock};
pub use lut::{Lut, LutFunction, LutId, LutKind, LutNetwork, OutputRef, Source};

pub const MIN_K: usize = 2;
pub const MAX_K: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapperMode {
    /// Cost = nonzero Walsh coefficients of the cut function.
    Spectral,
    /// Area-flow ranking; stands in for a classical area-oriented mapper.
    #[serde(rename = "baseline")]
    BaselineArea,
}

impl fmt::Display for MapperMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapperMode::Spectral => "spectral",
            MapperMode::BaselineArea => "baseline",
        })
    }
}

impl FromStr for MapperMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(MapperMode::Spectral),
            "baseline" | "area" => Ok(MapperMode::BaselineArea),
            other => Err(Error::Config(format!("unknown mapper '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapperConfig {
    /// LUT size.
    pub k: usize,
    /// Priority cuts kept per node.
    pub priority_cuts: usize,
    pub mode: MapperMode,
    /// Inject multi-input XOR-block cuts with cost 0.
    pub xor_blocks: bool,
}

impl Default for MapperConfig {
    fn default() -> Self {
        Self::spectral(4)
    }
}

impl MapperConfig {
    /// Spectral mapper with XOR blocks enabled and `p = 8`.
    pub fn spectral(k: usize) -> Self {
        Self { k, priority_cuts: 8, mode: MapperMode::Spectral, xor_blocks: true }
    }

    /// Area-flow baseline without XOR blocks.
    pub fn baseline(k: usize) -> Self {
        Self { k, priority_cuts: 8, mode: MapperMode::BaselineArea, xor_blocks: false }
    }

    pub fn with_priority_cuts(mut self, p: usize) -> Self {
        self.priority_cuts = p;
        self
    }

    pub fn with_xor_blocks(mut self, on: bool) -> Self {
        self.xor_blocks = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_K..=MAX_K).contains(&self.k) {
            return Err(Error::Config(format!("LUT size k = {} outside {MIN_K}..={MAX_K}", self.k)));
        }
        if self.priority_cuts == 0 {
            return Err(Error::Config("at least one priority cut per node is required".into()));
        }
        Ok(())
    }
}

/// Maps `xag` into a LUT network.
///
/// Cover selection walks from the outputs towards the inputs and takes the
/// best cut of every required node; the leaves of a chosen cut become
/// required in turn.
pub fn map_to_luts(xag: &Xag, cfg: &MapperConfig) -> Result<LutNetwork> {
    let cuts = enumerate_cuts(xag, cfg)?;
    let n = xag.node_count();
    let mut required = vec![false; n];
    for o in xag.outputs() {
        required[o.node()] = true;
    }
    for id in (0..n).rev() {
        if !required[id] || !xag.node(id).is_gate() {
            continue;
        }
        let best = cuts[id].best().expect("every gate has a non-trivial cut");
        for &l in &best.leaves {
            required[l] = true;
        }
    }

    let mut source_of: Vec<Option<Source>> = vec![None; n];
    for (id, node) in xag.nodes().iter().enumerate() {
        match node {
            Node::Const => source_of[id] = Some(Source::Const),
            Node::Input(k) => source_of[id] = Some(Source::Input(*k)),
            _ => {}
        }
    }
    let mut luts = Vec::new();
    for id in 0..n {
        if !required[id] || !xag.node(id).is_gate() {
            continue;
        }
        let cut = cuts[id].best().unwrap();
        let leaves: Vec<Source> = cut.leaves.iter().map(|&l| source_of[l].unwrap()).collect();
        let lut = match cut.xor_block {
            Some(complemented) => Lut::xor_block(leaves, complemented),
            None => Lut::generic(leaves, cut.function.clone().unwrap()),
        };
        source_of[id] = Some(Source::Lut(luts.len()));
        luts.push(lut);
    }
    let outputs = xag
        .outputs()
        .iter()
        .map(|o| OutputRef { source: source_of[o.node()].unwrap(), complemented: o.is_complemented() })
        .collect();
    LutNetwork::new(xag.input_count(), luts, outputs)
}
