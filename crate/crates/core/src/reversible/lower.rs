use crate::error::{Error, Result};
use crate::mapper::{LutFunction, LutId, LutKind, LutNetwork, Source};
use crate::pebbling::PebblingDag;

pub type RevNodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RevKind {
    /// Generic LUT, one single-target gate.
    Lut,
    /// XOR block, possibly with absorbed child LUTs.
    XorBlock,
    /// Copies a LUT, input or constant into an output qubit.
    Copy,
}

/// One single-target gate of a node: `target ^= function(leaves)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevPart {
    pub leaves: Vec<Source>,
    pub function: LutFunction,
    /// LUT this part was taken from, if any.
    pub lut: Option<LutId>,
}

/// Unit of scheduling: one qubit is written by all parts of the node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevNode {
    pub kind: RevKind,
    /// LUT whose value the node's qubit holds; `None` for copies.
    pub lut: Option<LutId>,
    pub parts: Vec<RevPart>,
    /// Nodes whose values are read as controls, ascending.
    pub preds: Vec<RevNodeId>,
    /// Output index when the node targets an output qubit.
    pub output: Option<usize>,
}

impl RevNode {
    pub fn label(&self) -> String {
        match (self.lut, self.output) {
            (Some(l), _) => format!("l{l}"),
            (None, Some(o)) => format!("o{o}"),
            (None, None) => "?".into(),
        }
    }
}

/// LUT network prepared for reversible scheduling.
///
/// When every LUT read by an XOR block is a generic LUT read by nothing
/// else, those children are folded into the block and computed directly
/// onto its qubit. An output LUT with no LUT
/// consumers targets its output qubit directly; every other output gets a
/// copy node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevNetwork {
    inputs: usize,
    outputs: usize,
    nodes: Vec<RevNode>,
    lut_node: Vec<Option<RevNodeId>>,
}

impl RevNetwork {
    pub fn lower(luts: &LutNetwork) -> Result<Self> {
        Self::lower_with(luts, true)
    }

    /// As [`RevNetwork::lower`], optionally without folding children into
    /// XOR blocks.
    pub fn lower_with(luts: &LutNetwork, absorb: bool) -> Result<Self> {
        let n = luts.lut_count();
        let fanouts = luts.lut_fanouts();
        let mut consumer: Vec<Option<LutId>> = vec![None; n];
        for (id, lut) in luts.luts().iter().enumerate() {
            for leaf in &lut.leaves {
                if let Source::Lut(l) = leaf {
                    consumer[*l] = Some(id);
                }
            }
        }
        let mut output_refs = vec![0usize; n];
        for o in luts.outputs() {
            if let Source::Lut(l) = o.source {
                output_refs[l] += 1;
            }
        }
        // liveness from the outputs
        let mut live = vec![false; n];
        for o in luts.outputs() {
            if let Source::Lut(l) = o.source {
                live[l] = true;
            }
        }
        for id in (0..n).rev() {
            if live[id] {
                for leaf in &luts.lut(id).leaves {
                    if let Source::Lut(l) = leaf {
                        live[*l] = true;
                    }
                }
            }
        }
        let candidate: Vec<bool> = (0..n)
            .map(|id| {
                absorb
                    && live[id]
                    && luts.lut(id).kind() == LutKind::Generic
                    && fanouts[id] == 1
                    && output_refs[id] == 0
                    && consumer[id].is_some_and(|c| luts.lut(c).kind() == LutKind::XorBlock)
            })
            .collect();
        // a block takes its children in only if every LUT it reads qualifies
        let absorbed: Vec<bool> = (0..n)
            .map(|id| {
                candidate[id]
                    && luts.lut(consumer[id].unwrap()).leaves.iter().all(|l| match l {
                        Source::Lut(c) => candidate[*c],
                        _ => true,
                    })
            })
            .collect();
        // output LUTs that drive their output qubit directly
        let mut direct: Vec<Option<usize>> = vec![None; n];
        for (k, o) in luts.outputs().iter().enumerate() {
            if let Source::Lut(l) = o.source {
                if fanouts[l] == 0 && output_refs[l] == 1 {
                    direct[l] = Some(k);
                }
            }
        }

        let mut nodes: Vec<RevNode> = Vec::new();
        let mut lut_node: Vec<Option<RevNodeId>> = vec![None; n];
        for id in 0..n {
            if !live[id] || absorbed[id] {
                continue;
            }
            let lut = luts.lut(id);
            let complement_out = direct[id].is_some_and(|k| luts.outputs()[k].complemented);
            let mut parts = Vec::new();
            let kind = match lut.kind() {
                LutKind::Generic => {
                    let function = match &lut.function {
                        LutFunction::Table(t) if complement_out => LutFunction::Table(t.complement()),
                        f => f.clone(),
                    };
                    parts.push(RevPart { leaves: lut.leaves.clone(), function, lut: Some(id) });
                    RevKind::Lut
                }
                LutKind::XorBlock => {
                    let LutFunction::Parity { complemented } = lut.function else { unreachable!() };
                    let mut plain = Vec::new();
                    for &leaf in &lut.leaves {
                        match leaf {
                            Source::Lut(c) if absorbed[c] => {
                                let child = luts.lut(c);
                                parts.push(RevPart {
                                    leaves: child.leaves.clone(),
                                    function: child.function.clone(),
                                    lut: Some(c),
                                });
                            }
                            other => plain.push(other),
                        }
                    }
                    parts.insert(
                        0,
                        RevPart {
                            leaves: plain,
                            function: LutFunction::Parity { complemented: complemented ^ complement_out },
                            lut: Some(id),
                        },
                    );
                    RevKind::XorBlock
                }
            };
            lut_node[id] = Some(nodes.len());
            nodes.push(RevNode { kind, lut: Some(id), parts, preds: Vec::new(), output: direct[id] });
        }
        for (k, o) in luts.outputs().iter().enumerate() {
            let leaves = match o.source {
                Source::Lut(l) if direct[l] == Some(k) => continue,
                Source::Const => vec![],
                s => vec![s],
            };
            nodes.push(RevNode {
                kind: RevKind::Copy,
                lut: None,
                parts: vec![RevPart { leaves, function: LutFunction::Parity { complemented: o.complemented }, lut: None }],
                preds: Vec::new(),
                output: Some(k),
            });
        }
        for node in nodes.iter_mut() {
            let mut preds = Vec::new();
            for part in &node.parts {
                for leaf in &part.leaves {
                    if let Source::Lut(l) = leaf {
                        let p = lut_node[*l].ok_or_else(|| Error::Construction {
                            node: *l,
                            message: "LUT read by a gate but not scheduled".into(),
                        })?;
                        preds.push(p);
                    }
                }
            }
            preds.sort_unstable();
            preds.dedup();
            node.preds = preds;
        }
        Ok(Self { inputs: luts.input_count(), outputs: luts.output_count(), nodes, lut_node })
    }

    pub fn input_count(&self) -> usize {
        self.inputs
    }

    pub fn output_count(&self) -> usize {
        self.outputs
    }

    pub fn nodes(&self) -> &[RevNode] {
        &self.nodes
    }

    pub fn node(&self, id: RevNodeId) -> &RevNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node holding the value of `lut`, if the LUT was not absorbed.
    pub fn node_of_lut(&self, lut: LutId) -> Option<RevNodeId> {
        self.lut_node.get(lut).copied().flatten()
    }

    pub fn non_output_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.output.is_none()).count()
    }

    /// Dependency DAG for the pebbling game; outputs are the nodes that
    /// target output qubits.
    pub fn dag(&self) -> PebblingDag {
        PebblingDag::new(
            self.nodes.iter().map(|n| n.preds.clone()).collect(),
            self.nodes.iter().map(|n| n.output.is_some()).collect(),
        )
        .expect("nodes are in topological order")
    }
}
