use super::{Node, NodeId, Signal, Xag, XagBuilder};

/// XOR pattern found at an AND node: the node equals `a ^ b ^ complemented`.
#[derive(Clone, Copy, Debug)]
struct XorMatch {
    a: Signal,
    b: Signal,
    complemented: bool,
}

fn and_fanins(xag: &Xag, s: Signal) -> Option<(Signal, Signal)> {
    match xag.node(s.node()) {
        Node::And(a, b) => Some((a, b)),
        _ => None,
    }
}

/// Recognizes the canonical AND-inverter XOR structures rooted at `id`.
///
/// * complement pair: `!(p & q) & !(!p & !q)`, i.e. `p ^ q`. With `p = a`
///   and `q = !b` this is the familiar `!(a & !b) & !(!a & b)` XNOR form.
/// * shared NAND: `!(p & !g) & !(q & !g)` with `g = p & q`, i.e. `!(p ^ q)`.
fn match_xor(xag: &Xag, id: NodeId) -> Option<XorMatch> {
    let Node::And(f0, f1) = xag.node(id) else { return None };
    if !f0.is_complemented() || !f1.is_complemented() {
        return None;
    }
    let (p, q) = and_fanins(xag, f0)?;
    let (r, s) = and_fanins(xag, f1)?;

    if (r == !p && s == !q) || (r == !q && s == !p) {
        return Some(XorMatch { a: p, b: q, complemented: false });
    }

    // shared NAND: one fanin of each inner AND is the same complemented g
    for (x, gx) in [(p, q), (q, p)] {
        for (y, gy) in [(r, s), (s, r)] {
            if gx == gy && gx.is_complemented() {
                if let Some((g0, g1)) = and_fanins(xag, gx) {
                    if (g0 == x && g1 == y) || (g0 == y && g1 == x) {
                        return Some(XorMatch { a: x, b: y, complemented: true });
                    }
                }
            }
        }
    }
    None
}

/// Replaces every AND-inverter XOR/XNOR structure by an `Xor` node.
///
/// Nodes only reachable through replaced structures are dropped; primary
/// inputs are always kept.
pub fn detect_xor(xag: &Xag) -> Xag {
    let n = xag.node_count();
    let matches: Vec<Option<XorMatch>> = (0..n).map(|id| match_xor(xag, id)).collect();

    let mut live = vec![false; n];
    for o in xag.outputs() {
        live[o.node()] = true;
    }
    for id in (0..n).rev() {
        if !live[id] {
            continue;
        }
        if let Some(m) = matches[id] {
            live[m.a.node()] = true;
            live[m.b.node()] = true;
        } else if let Some(f) = xag.node(id).fanins() {
            for s in f {
                live[s.node()] = true;
            }
        }
    }

    let mut b = XagBuilder::new();
    let mut map = vec![Signal::FALSE; n];
    for (k, &id) in xag.inputs().iter().enumerate() {
        map[id] = match xag.input_name(k) {
            Some(name) => b.named_input(name),
            None => b.input(),
        };
    }
    let tr = |map: &[Signal], s: Signal| map[s.node()].complement_if(s.is_complemented());
    for id in 0..n {
        if !live[id] {
            continue;
        }
        map[id] = match (xag.node(id), matches[id]) {
            (_, Some(m)) => {
                let x = b.xor(tr(&map, m.a), tr(&map, m.b));
                x.complement_if(m.complemented)
            }
            (Node::And(a, c), None) => b.and(tr(&map, a), tr(&map, c)),
            (Node::Xor(a, c), None) => b.xor(tr(&map, a), tr(&map, c)),
            (Node::Const, _) | (Node::Input(_), _) => map[id],
        };
    }
    for (k, &o) in xag.outputs().iter().enumerate() {
        let s = tr(&map, o);
        match xag.output_name(k) {
            Some(name) => b.named_output(s, name),
            None => b.output(s),
        }
    }
    b.finish()
}
