use std::cmp::Ordering;

use super::{MapperConfig, MapperMode};
use crate::error::Result;
use crate::spectral::{walsh_spectrum, TruthTable};
use crate::xag::{Node, NodeId, Signal, Xag};

/// A cut rooted at some node.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    /// Sorted, duplicate-free leaf nodes.
    pub leaves: Vec<NodeId>,
    /// Function of the root over the leaves (first leaf most significant).
    /// For XOR blocks this is `None` when the block is wider than `k`.
    pub function: Option<TruthTable>,
    /// Spectral cost (nonzero Walsh coefficients) or leaf count, per mode.
    pub cost: u32,
    /// Area flow estimate (unit cost per LUT in baseline mode, spectral cost
    /// per LUT in spectral mode). Primary ranking key.
    pub flow: f64,
    /// `Some(complemented)` for XOR-block cuts.
    pub xor_block: Option<bool>,
}

impl Cut {
    pub fn is_xor_block(&self) -> bool {
        self.xor_block.is_some()
    }

    fn trivial(node: NodeId) -> Self {
        Cut {
            leaves: vec![node],
            function: Some(TruthTable::var(1, 0)),
            cost: 1,
            flow: 0.0,
            xor_block: None,
        }
    }
}

/// Cuts kept for one node.
#[derive(Clone, Debug, Default)]
pub struct NodeCuts {
    /// `{node}` itself; used when merging fan-in cuts of the node's fanouts.
    pub trivial: Option<Cut>,
    /// At most `p` cuts, best first.
    pub priority: Vec<Cut>,
}

impl NodeCuts {
    pub fn best(&self) -> Option<&Cut> {
        self.priority.first()
    }

    /// All cuts including the trivial one.
    pub fn all(&self) -> impl Iterator<Item = &Cut> {
        self.trivial.iter().chain(self.priority.iter())
    }
}

/// Multi-input XOR block: a fanout-free tree of `Xor` nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorBlock {
    pub root: NodeId,
    /// Sorted leaves; leaves reached an even number of times cancel out.
    pub leaves: Vec<NodeId>,
    pub complemented: bool,
    /// `Xor` nodes covered by the block, root included.
    pub internal: Vec<NodeId>,
}

/// Groups every `Xor` node with its maximal tree of single-fanout `Xor`
/// children. Blocks with fewer than two leaves are dropped.
pub fn match_xor_blocks(xag: &Xag) -> Vec<XorBlock> {
    let fanout = xag.fanout_counts();
    let mut blocks = Vec::new();
    for (root, node) in xag.nodes().iter().enumerate() {
        let Node::Xor(..) = node else { continue };
        let mut internal = vec![root];
        let mut leaf_hits: Vec<NodeId> = Vec::new();
        let mut complemented = false;
        let mut stack: Vec<Signal> = node.fanins().unwrap().to_vec();
        while let Some(s) = stack.pop() {
            complemented ^= s.is_complemented();
            let id = s.node();
            match xag.node(id) {
                Node::Xor(a, b) if fanout[id] == 1 => {
                    internal.push(id);
                    stack.push(a);
                    stack.push(b);
                }
                _ => leaf_hits.push(id),
            }
        }
        leaf_hits.sort_unstable();
        let mut leaves: Vec<NodeId> = Vec::new();
        for id in leaf_hits {
            if leaves.last() == Some(&id) {
                leaves.pop();
            } else {
                leaves.push(id);
            }
        }
        if leaves.len() < 2 {
            continue;
        }
        internal.sort_unstable();
        blocks.push(XorBlock { root, leaves, complemented, internal });
    }
    blocks
}

fn merge_leaves(a: &[NodeId], b: &[NodeId], k: usize) -> Option<Vec<NodeId>> {
    let mut out = Vec::with_capacity(k);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.len() == k {
            return None;
        }
        out.push(next);
    }
    Some(out)
}

fn positions(sub: &[NodeId], sup: &[NodeId]) -> Vec<usize> {
    sub.iter().map(|l| sup.binary_search(l).unwrap()).collect()
}

fn compose(node: Node, c0: &Cut, c1: &Cut, leaves: &[NodeId]) -> TruthTable {
    let (s0, s1, is_and) = match node {
        Node::And(a, b) => (a, b, true),
        Node::Xor(a, b) => (a, b, false),
        _ => unreachable!("only gates have fan-in cuts"),
    };
    let n = leaves.len();
    let lift = |c: &Cut, s: Signal| {
        let t = c.function.as_ref().unwrap().extend(n, &positions(&c.leaves, leaves));
        if s.is_complemented() {
            t.complement()
        } else {
            t
        }
    };
    let (f0, f1) = (lift(c0, s0), lift(c1, s1));
    if is_and {
        f0.and(&f1)
    } else {
        f0.xor(&f1)
    }
}

fn compare(mode: MapperMode, a: &Cut, b: &Cut) -> Ordering {
    let blocks_first = b.is_xor_block().cmp(&a.is_xor_block());
    let primary = match mode {
        MapperMode::Spectral => a.flow.total_cmp(&b.flow).then(a.cost.cmp(&b.cost)),
        MapperMode::BaselineArea => a.flow.total_cmp(&b.flow),
    };
    blocks_first
        .then(primary)
        .then(a.leaves.len().cmp(&b.leaves.len()))
        .then_with(|| a.leaves.cmp(&b.leaves))
}

/// Bottom-up priority-cut enumeration.
///
/// Every gate keeps at most `p` cuts sorted by `(flow, cost, leaf count,
/// leaves)`, XOR blocks first; XOR-block cuts, when enabled,
/// enter the list with cost 0 and are exempt from the `k` bound. Primary
/// inputs only have their trivial cut.
pub fn enumerate_cuts(xag: &Xag, cfg: &MapperConfig) -> Result<Vec<NodeCuts>> {
    cfg.validate()?;
    let fanout = xag.fanout_counts();
    let mut blocks: Vec<Option<XorBlock>> = vec![None; xag.node_count()];
    if cfg.xor_blocks {
        for b in match_xor_blocks(xag) {
            let root = b.root;
            blocks[root] = Some(b);
        }
    }

    let mut cuts: Vec<NodeCuts> = Vec::with_capacity(xag.node_count());
    // area flow of each node's best cut
    let mut node_flow = vec![0.0f64; xag.node_count()];
    let leaf_flow = |node_flow: &[f64], own: f64, leaves: &[NodeId]| -> f64 {
        own + leaves
            .iter()
            .map(|&l| node_flow[l] / fanout[l].max(1) as f64)
            .sum::<f64>()
    };

    for (id, node) in xag.nodes().iter().enumerate() {
        let Some([s0, s1]) = node.fanins() else {
            cuts.push(NodeCuts {
                trivial: matches!(node, Node::Input(_)).then(|| Cut::trivial(id)),
                priority: Vec::new(),
            });
            continue;
        };
        let mut candidates: Vec<Cut> = Vec::new();
        for c0 in cuts[s0.node()].all().filter(|c| !c.is_xor_block()) {
            for c1 in cuts[s1.node()].all().filter(|c| !c.is_xor_block()) {
                let Some(leaves) = merge_leaves(&c0.leaves, &c1.leaves, cfg.k) else { continue };
                if candidates.iter().any(|c| c.leaves == leaves) {
                    continue;
                }
                let function = compose(*node, c0, c1, &leaves);
                let cost = match cfg.mode {
                    MapperMode::Spectral => walsh_spectrum(&function).nonzero_count() as u32,
                    MapperMode::BaselineArea => leaves.len() as u32,
                };
                let own = match cfg.mode {
                    MapperMode::Spectral => f64::from(cost),
                    MapperMode::BaselineArea => 1.0,
                };
                let flow = leaf_flow(&node_flow, own, &leaves);
                candidates.push(Cut { leaves, function: Some(function), cost, flow, xor_block: None });
            }
        }
        if let Some(b) = &blocks[id] {
            let function = (b.leaves.len() <= cfg.k).then(|| {
                let support: Vec<usize> = (0..b.leaves.len()).collect();
                TruthTable::parity(b.leaves.len(), &support, b.complemented)
            });
            candidates.retain(|c| c.leaves != b.leaves);
            candidates.push(Cut {
                leaves: b.leaves.clone(),
                function,
                cost: 0,
                flow: leaf_flow(&node_flow, 0.0, &b.leaves),
                xor_block: Some(b.complemented),
            });
        }
        candidates.sort_by(|a, b| compare(cfg.mode, a, b));
        candidates.truncate(cfg.priority_cuts);
        node_flow[id] = candidates.first().map_or(0.0, |c| c.flow);
        cuts.push(NodeCuts { trivial: Some(Cut::trivial(id)), priority: candidates });
    }
    Ok(cuts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xag::XagBuilder;

    #[test]
    fn four_and_network_cuts_at_root() {
        let xag = crate::xag::tests::four_and_network();
        let cfg = MapperConfig::spectral(3).with_xor_blocks(false);
        let cuts = enumerate_cuts(&xag, &cfg).unwrap();
        // node ids: x1..x4 = 1..4, n1 = 5, n2 = 6, n3 = 7, n4 = 8
        let leaf_sets: Vec<&Vec<NodeId>> = cuts[8].priority.iter().map(|c| &c.leaves).collect();
        assert!(leaf_sets.contains(&&vec![3, 5, 6]), "{leaf_sets:?}");
        assert!(leaf_sets.contains(&&vec![3, 4, 5]), "{leaf_sets:?}");
        for c in &cuts[8].priority {
            assert!(c.leaves.len() <= 3);
        }
    }

    #[test]
    fn single_and_cuts() {
        let mut b = XagBuilder::new();
        let (x, y) = (b.input(), b.input());
        let g = b.and(x, y);
        b.output(g);
        let xag = b.finish();
        let cuts = enumerate_cuts(&xag, &MapperConfig::spectral(4)).unwrap();
        let node = &cuts[3];
        assert_eq!(node.trivial.as_ref().unwrap().leaves, vec![3]);
        assert_eq!(node.priority.len(), 1);
        assert_eq!(node.priority[0].leaves, vec![1, 2]);
        assert_eq!(node.priority[0].cost, 4);
        // primary input: only the trivial cut
        assert!(cuts[1].priority.is_empty());
        assert!(cuts[1].trivial.is_some());
    }

    #[test]
    fn k_out_of_range() {
        let xag = crate::xag::tests::four_and_network();
        assert!(enumerate_cuts(&xag, &MapperConfig::spectral(1)).is_err());
        assert!(enumerate_cuts(&xag, &MapperConfig::spectral(9)).is_err());
    }

    #[test]
    fn xor_chain_block() {
        let mut b = XagBuilder::new();
        let (x, y, z) = (b.input(), b.input(), b.input());
        let t = b.xor(x, y);
        let u = b.xor(t, !z);
        b.output(u);
        let xag = b.finish();
        let blocks = match_xor_blocks(&xag);
        let root = blocks.iter().find(|bl| bl.root == u.node()).unwrap();
        assert_eq!(root.leaves, vec![1, 2, 3]);
        assert!(root.complemented ^ u.is_complemented());
        assert_eq!(root.internal.len(), 2);
    }

    #[test]
    fn shared_inner_xor_breaks_block() {
        let mut b = XagBuilder::new();
        let (x, y, z) = (b.input(), b.input(), b.input());
        let t = b.xor(x, y);
        let u = b.xor(t, z);
        let v = b.and(t, z);
        b.output(u);
        b.output(v);
        let xag = b.finish();
        let blocks = match_xor_blocks(&xag);
        let root = blocks.iter().find(|bl| bl.root == u.node()).unwrap();
        assert_eq!(root.leaves, vec![z.node(), t.node()]);
    }

    #[test]
    fn wide_block_ignores_k() {
        let mut b = XagBuilder::new();
        let ins: Vec<Signal> = (0..8).map(|_| b.input()).collect();
        let mut layer = ins.clone();
        while layer.len() > 1 {
            layer = layer.chunks(2).map(|p| b.xor(p[0], p[1])).collect();
        }
        b.output(layer[0]);
        let xag = b.finish();
        let cuts = enumerate_cuts(&xag, &MapperConfig::spectral(4)).unwrap();
        let best = cuts[layer[0].node()].best().unwrap();
        assert!(best.is_xor_block());
        assert_eq!(best.leaves.len(), 8);
        assert_eq!(best.cost, 0);
    }

    #[test]
    fn priority_lists_sorted_and_bounded() {
        let xag = crate::bench::generate(&crate::bench::BenchmarkSpec::new(crate::bench::Family::MultDistr, 3)).unwrap();
        let xag = crate::xag::detect_xor(&xag);
        for cfg in [MapperConfig::spectral(4).with_priority_cuts(3), MapperConfig::baseline(4)] {
            let cuts = enumerate_cuts(&xag, &cfg).unwrap();
            for nc in &cuts {
                assert!(nc.priority.len() <= cfg.priority_cuts);
                for w in nc.priority.windows(2) {
                    assert_ne!(compare(cfg.mode, &w[0], &w[1]), Ordering::Greater);
                }
                for c in &nc.priority {
                    if !c.is_xor_block() {
                        assert!(c.leaves.len() <= cfg.k);
                    }
                }
            }
        }
    }
}
