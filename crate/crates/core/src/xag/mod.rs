//! XOR-AND-inverter graphs.
//!
//! Node 0 is the constant-0 node, primary inputs follow, then gates in
//! topological order. Complement flags live on edges ([`Signal`]), so a
//! primary output may be any node in either polarity.

mod aiger;
mod detect;
mod dump;

use std::collections::HashMap;
use std::fmt;
use std::ops::Not;

use crate::error::{Error, Result};
use crate::spectral::{TruthTable, MAX_VARS};

pub use aiger::{read_aiger, write_aiger};
pub use detect::detect_xor;
pub use dump::{parse_dump, write_dump};

/// Node index inside an [`Xag`].
pub type NodeId = usize;

/// Edge to a node with an optional complement, encoded as `2 * node + c`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signal(u32);

impl Signal {
    pub const FALSE: Signal = Signal(0);
    pub const TRUE: Signal = Signal(1);

    pub fn new(node: NodeId, complemented: bool) -> Self {
        Signal((node as u32) << 1 | u32::from(complemented))
    }

    pub fn from_literal(lit: u32) -> Self {
        Signal(lit)
    }

    pub fn literal(self) -> u32 {
        self.0
    }

    pub fn node(self) -> NodeId {
        (self.0 >> 1) as NodeId
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_const(self) -> bool {
        self.node() == 0
    }

    /// Strips the complement flag.
    pub fn regular(self) -> Self {
        Signal(self.0 & !1)
    }

    pub fn complement_if(self, c: bool) -> Self {
        Signal(self.0 ^ u32::from(c))
    }
}

impl Not for Signal {
    type Output = Signal;
    fn not(self) -> Signal {
        Signal(self.0 ^ 1)
    }
}

impl fmt::Debug for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!n{}", self.node())
        } else {
            write!(f, "n{}", self.node())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const,
    Input(usize),
    And(Signal, Signal),
    Xor(Signal, Signal),
}

impl Node {
    pub fn fanins(&self) -> Option<[Signal; 2]> {
        match *self {
            Node::And(a, b) | Node::Xor(a, b) => Some([a, b]),
            _ => None,
        }
    }

    pub fn is_gate(&self) -> bool {
        matches!(self, Node::And(..) | Node::Xor(..))
    }
}

/// Gate kind used by [`Xag::from_gates`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateOp {
    And,
    Xor,
}

/// One entry of a gate list: `op(fanin0, fanin1)` where fanins are literals
/// `2 * index + complement` and index 0 is constant false, `1..=inputs` the
/// primary inputs, and gate `g` of the list has index `inputs + 1 + g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GateSpec {
    pub op: GateOp,
    pub fanin0: u32,
    pub fanin1: u32,
}

impl GateSpec {
    pub fn and(fanin0: u32, fanin1: u32) -> Self {
        Self { op: GateOp::And, fanin0, fanin1 }
    }

    pub fn xor(fanin0: u32, fanin1: u32) -> Self {
        Self { op: GateOp::Xor, fanin0, fanin1 }
    }
}

/// Immutable XOR-AND-inverter graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Xag {
    nodes: Vec<Node>,
    inputs: Vec<NodeId>,
    outputs: Vec<Signal>,
    input_names: Vec<Option<String>>,
    output_names: Vec<Option<String>>,
}

impl Xag {
    /// Builds a network from a gate list, validating every reference.
    pub fn from_gates(num_inputs: usize, gates: &[GateSpec], outputs: &[u32]) -> Result<Self> {
        let total = 1 + num_inputs + gates.len();
        let mut b = XagBuilder::new();
        let mut map: Vec<Signal> = Vec::with_capacity(total);
        map.push(Signal::FALSE);
        for _ in 0..num_inputs {
            map.push(b.input());
        }
        let resolve = |map: &[Signal], lit: u32, own: usize| -> Result<Signal> {
            let idx = (lit >> 1) as usize;
            if idx >= total {
                return Err(Error::Construction {
                    node: own,
                    message: format!("dangling reference to node {idx}"),
                });
            }
            if idx >= own {
                return Err(Error::Construction {
                    node: own,
                    message: format!("cycle: fanin {idx} is not created before node {own}"),
                });
            }
            Ok(map[idx].complement_if(lit & 1 == 1))
        };
        for (g, spec) in gates.iter().enumerate() {
            let own = 1 + num_inputs + g;
            let a = resolve(&map, spec.fanin0, own)?;
            let c = resolve(&map, spec.fanin1, own)?;
            let s = match spec.op {
                GateOp::And => b.and(a, c),
                GateOp::Xor => b.xor(a, c),
            };
            map.push(s);
        }
        for &o in outputs {
            let s = resolve(&map, o, total)?;
            b.output(s);
        }
        Ok(b.finish())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn gate_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_gate()).count()
    }

    pub fn and_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::And(..))).count()
    }

    pub fn xor_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Xor(..))).count()
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Signal] {
        &self.outputs
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn input_name(&self, i: usize) -> Option<&str> {
        self.input_names.get(i).and_then(|n| n.as_deref())
    }

    pub fn output_name(&self, i: usize) -> Option<&str> {
        self.output_names.get(i).and_then(|n| n.as_deref())
    }

    pub fn is_input(&self, id: NodeId) -> bool {
        matches!(self.nodes[id], Node::Input(_))
    }

    /// Number of references to each node from gates and primary outputs.
    pub fn fanout_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.nodes.len()];
        for n in &self.nodes {
            if let Some(f) = n.fanins() {
                for s in f {
                    counts[s.node()] += 1;
                }
            }
        }
        for o in &self.outputs {
            counts[o.node()] += 1;
        }
        counts
    }

    /// Logic level of every node; inputs and the constant are level 0.
    pub fn levels(&self) -> Vec<usize> {
        let mut level = vec![0; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some([a, b]) = n.fanins() {
                level[i] = 1 + level[a.node()].max(level[b.node()]);
            }
        }
        level
    }

    /// Evaluates all outputs under an assignment of the primary inputs.
    pub fn evaluate(&self, assignment: &[bool]) -> Result<Vec<bool>> {
        let values = self.evaluate_nodes(assignment)?;
        Ok(self
            .outputs
            .iter()
            .map(|s| values[s.node()] ^ s.is_complemented())
            .collect())
    }

    /// Value of every node under an assignment of the primary inputs.
    pub fn evaluate_nodes(&self, assignment: &[bool]) -> Result<Vec<bool>> {
        if assignment.len() != self.inputs.len() {
            return Err(Error::SizeMismatch {
                expected: self.inputs.len(),
                got: assignment.len(),
            });
        }
        let mut values = vec![false; self.nodes.len()];
        let val = |values: &[bool], s: Signal| values[s.node()] ^ s.is_complemented();
        for (i, n) in self.nodes.iter().enumerate() {
            values[i] = match *n {
                Node::Const => false,
                Node::Input(k) => assignment[k],
                Node::And(a, b) => val(&values, a) && val(&values, b),
                Node::Xor(a, b) => val(&values, a) ^ val(&values, b),
            };
        }
        Ok(values)
    }

    /// Global function of every node as a truth table over the primary inputs
    /// (first input is the most significant index bit).
    pub fn simulate(&self) -> Result<Vec<TruthTable>> {
        let n = self.inputs.len();
        if n > MAX_VARS {
            return Err(Error::TooManyVariables { vars: n, max: MAX_VARS });
        }
        let mut tts: Vec<TruthTable> = Vec::with_capacity(self.nodes.len());
        let lit = |tts: &[TruthTable], s: Signal| {
            let t = &tts[s.node()];
            if s.is_complemented() {
                t.complement()
            } else {
                t.clone()
            }
        };
        for node in &self.nodes {
            let t = match *node {
                Node::Const => TruthTable::zero(n),
                Node::Input(k) => TruthTable::var(n, k),
                Node::And(a, b) => lit(&tts, a).and(&lit(&tts, b)),
                Node::Xor(a, b) => lit(&tts, a).xor(&lit(&tts, b)),
            };
            tts.push(t);
        }
        Ok(tts)
    }

    /// Output functions as truth tables over the primary inputs.
    pub fn output_tables(&self) -> Result<Vec<TruthTable>> {
        let tts = self.simulate()?;
        Ok(self
            .outputs
            .iter()
            .map(|s| {
                let t = &tts[s.node()];
                if s.is_complemented() {
                    t.complement()
                } else {
                    t.clone()
                }
            })
            .collect())
    }
}

/// Incremental constructor with constant propagation and structural hashing.
#[derive(Debug)]
pub struct XagBuilder {
    nodes: Vec<Node>,
    inputs: Vec<NodeId>,
    outputs: Vec<Signal>,
    input_names: Vec<Option<String>>,
    output_names: Vec<Option<String>>,
    strash: HashMap<Node, NodeId>,
}

impl Default for XagBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl XagBuilder {
    pub fn new() -> Self {
        Self {
            nodes: vec![Node::Const],
            inputs: Vec::new(),
            outputs: Vec::new(),
            input_names: Vec::new(),
            output_names: Vec::new(),
            strash: HashMap::new(),
        }
    }

    pub fn input(&mut self) -> Signal {
        let id = self.nodes.len();
        self.nodes.push(Node::Input(self.inputs.len()));
        self.inputs.push(id);
        self.input_names.push(None);
        Signal::new(id, false)
    }

    pub fn named_input(&mut self, name: impl Into<String>) -> Signal {
        let s = self.input();
        *self.input_names.last_mut().unwrap() = Some(name.into());
        s
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn and(&mut self, a: Signal, b: Signal) -> Signal {
        if a == Signal::FALSE || b == Signal::FALSE || a == !b {
            return Signal::FALSE;
        }
        if a == Signal::TRUE || a == b {
            return b;
        }
        if b == Signal::TRUE {
            return a;
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Signal::new(self.intern(Node::And(a, b)), false)
    }

    pub fn xor(&mut self, a: Signal, b: Signal) -> Signal {
        let c = a.is_complemented() ^ b.is_complemented();
        let (a, b) = (a.regular(), b.regular());
        if a == b {
            return Signal::FALSE.complement_if(c);
        }
        if a == Signal::FALSE {
            return b.complement_if(c);
        }
        if b == Signal::FALSE {
            return a.complement_if(c);
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Signal::new(self.intern(Node::Xor(a, b)), c)
    }

    pub fn or(&mut self, a: Signal, b: Signal) -> Signal {
        !self.and(!a, !b)
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.strash.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.strash.insert(node, id);
        id
    }

    pub fn output(&mut self, s: Signal) {
        self.outputs.push(s);
        self.output_names.push(None);
    }

    pub fn named_output(&mut self, s: Signal, name: impl Into<String>) {
        self.output(s);
        *self.output_names.last_mut().unwrap() = Some(name.into());
    }

    pub fn finish(self) -> Xag {
        Xag {
            nodes: self.nodes,
            inputs: self.inputs,
            outputs: self.outputs,
            input_names: self.input_names,
            output_names: self.output_names,
        }
    }
}
