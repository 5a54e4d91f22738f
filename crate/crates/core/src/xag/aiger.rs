//! ASCII AIGER (`aag`) reader and writer for combinational networks.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Node, Signal, Xag, XagBuilder};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num(tok: Option<&str>, line: usize, what: &str) -> Result<u32> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse::<u32>()
        .map_err(|_| parse_err(line, format!("malformed {what} '{tok}'")))
}

/// Parses an ASCII AIGER document into an AND-inverter [`Xag`].
///
/// AND definitions may appear in any order; the symbol table is honored for
/// input and output names.
pub fn read_aiger(text: &str) -> Result<Xag> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty document"))?;
    let mut toks = header.split_whitespace();
    match toks.next() {
        Some("aag") => {}
        Some(tag) => return Err(parse_err(hline, format!("expected header tag 'aag', got '{tag}'"))),
        None => return Err(parse_err(hline, "empty header")),
    }
    let max_var = parse_num(toks.next(), hline, "M")?;
    let n_in = parse_num(toks.next(), hline, "I")? as usize;
    let n_latch = parse_num(toks.next(), hline, "L")? as usize;
    let n_out = parse_num(toks.next(), hline, "O")? as usize;
    let n_and = parse_num(toks.next(), hline, "A")? as usize;
    if n_latch > 0 {
        return Err(Error::Sequential { latches: n_latch });
    }
    if n_in + n_and > max_var as usize {
        return Err(parse_err(hline, "M smaller than I + L + A"));
    }

    let mut next_line = |what: &str| {
        lines
            .next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of document while reading {what}")))
    };
    let check_lit = |lit: u32, line: usize| -> Result<u32> {
        if lit >> 1 > max_var {
            Err(parse_err(line, format!("literal {lit} exceeds maximum variable {max_var}")))
        } else {
            Ok(lit)
        }
    };

    let mut input_lits = Vec::with_capacity(n_in);
    for _ in 0..n_in {
        let (ln, l) = next_line("inputs")?;
        let lit = check_lit(parse_num(l.split_whitespace().next(), ln, "input literal")?, ln)?;
        if lit & 1 == 1 || lit < 2 {
            return Err(parse_err(ln, format!("invalid input literal {lit}")));
        }
        input_lits.push(lit);
    }
    let mut output_lits = Vec::with_capacity(n_out);
    for _ in 0..n_out {
        let (ln, l) = next_line("outputs")?;
        output_lits.push((check_lit(parse_num(l.split_whitespace().next(), ln, "output literal")?, ln)?, ln));
    }
    let mut ands: HashMap<u32, (u32, u32, usize)> = HashMap::with_capacity(n_and);
    let mut and_order = Vec::with_capacity(n_and);
    for _ in 0..n_and {
        let (ln, l) = next_line("AND gates")?;
        let mut t = l.split_whitespace();
        let lhs = check_lit(parse_num(t.next(), ln, "AND lhs")?, ln)?;
        let r0 = check_lit(parse_num(t.next(), ln, "AND rhs0")?, ln)?;
        let r1 = check_lit(parse_num(t.next(), ln, "AND rhs1")?, ln)?;
        if lhs & 1 == 1 || lhs < 2 {
            return Err(parse_err(ln, format!("invalid AND lhs {lhs}")));
        }
        if ands.insert(lhs >> 1, (r0, r1, ln)).is_some() || input_lits.contains(&lhs) {
            return Err(parse_err(ln, format!("variable {} defined twice", lhs >> 1)));
        }
        and_order.push(lhs >> 1);
    }

    let mut input_names = vec![None; n_in];
    let mut output_names = vec![None; n_out];
    for (ln, l) in lines {
        if l.starts_with('c') {
            break;
        }
        let Some((sym, name)) = l.split_once(' ') else { continue };
        let (kind, idx) = sym.split_at(1);
        let Ok(idx) = idx.parse::<usize>() else {
            return Err(parse_err(ln, format!("malformed symbol '{sym}'")));
        };
        match kind {
            "i" if idx < n_in => input_names[idx] = Some(name.to_string()),
            "o" if idx < n_out => output_names[idx] = Some(name.to_string()),
            "l" => {}
            _ => return Err(parse_err(ln, format!("symbol '{sym}' out of range"))),
        }
    }

    let mut b = XagBuilder::new();
    let mut var_map: HashMap<u32, Signal> = HashMap::new();
    for (i, &lit) in input_lits.iter().enumerate() {
        let s = match &input_names[i] {
            Some(n) => b.named_input(n.clone()),
            None => b.input(),
        };
        var_map.insert(lit >> 1, s);
    }

    // iterative DFS so deep networks do not overflow the stack
    fn resolve(
        root: u32,
        ands: &HashMap<u32, (u32, u32, usize)>,
        var_map: &mut HashMap<u32, Signal>,
        b: &mut XagBuilder,
        line: usize,
    ) -> Result<()> {
        let mut stack = vec![(root, false)];
        let mut on_stack = std::collections::HashSet::new();
        while let Some((var, expanded)) = stack.pop() {
            if var == 0 || var_map.contains_key(&var) {
                continue;
            }
            let &(r0, r1, ln) = ands
                .get(&var)
                .ok_or_else(|| parse_err(line, format!("undefined variable {var}")))?;
            if expanded {
                let s0 = lookup(r0, var_map);
                let s1 = lookup(r1, var_map);
                let s = b.and(s0, s1);
                var_map.insert(var, s);
                on_stack.remove(&var);
            } else {
                if !on_stack.insert(var) {
                    return Err(parse_err(ln, format!("combinational cycle through variable {var}")));
                }
                stack.push((var, true));
                for r in [r1, r0] {
                    let v = r >> 1;
                    if v != 0 && !var_map.contains_key(&v) {
                        if on_stack.contains(&v) {
                            return Err(parse_err(ln, format!("combinational cycle through variable {v}")));
                        }
                        stack.push((v, false));
                    }
                }
            }
        }
        Ok(())
    }
    fn lookup(lit: u32, var_map: &HashMap<u32, Signal>) -> Signal {
        let base = if lit >> 1 == 0 { Signal::FALSE } else { var_map[&(lit >> 1)] };
        base.complement_if(lit & 1 == 1)
    }

    for &var in &and_order {
        resolve(var, &ands, &mut var_map, &mut b, ands[&var].2)?;
    }
    for (i, &(lit, ln)) in output_lits.iter().enumerate() {
        resolve(lit >> 1, &ands, &mut var_map, &mut b, ln)?;
        let s = lookup(lit, &var_map);
        match &output_names[i] {
            Some(n) => b.named_output(s, n.clone()),
            None => b.output(s),
        }
    }
    Ok(b.finish())
}

/// Writes the network as ASCII AIGER. XOR nodes are expanded into the
/// three-AND form `!(!(a & !b) & !(!a & b))`.
pub fn write_aiger(xag: &Xag) -> String {
    let mut lit_of = vec![0u32; xag.node_count()];
    let mut next_var = 1u32;
    for &id in xag.inputs() {
        lit_of[id] = next_var << 1;
        next_var += 1;
    }
    let mut and_lines: Vec<(u32, u32, u32)> = Vec::new();
    let map = |lit_of: &[u32], s: Signal| lit_of[s.node()] ^ u32::from(s.is_complemented());
    for (id, node) in xag.nodes().iter().enumerate() {
        match *node {
            Node::Const | Node::Input(_) => {}
            Node::And(a, b) => {
                let lhs = next_var << 1;
                next_var += 1;
                and_lines.push((lhs, map(&lit_of, a), map(&lit_of, b)));
                lit_of[id] = lhs;
            }
            Node::Xor(a, b) => {
                let (la, lb) = (map(&lit_of, a), map(&lit_of, b));
                let g1 = next_var << 1;
                let g2 = (next_var + 1) << 1;
                let g3 = (next_var + 2) << 1;
                next_var += 3;
                and_lines.push((g1, la, lb ^ 1));
                and_lines.push((g2, la ^ 1, lb));
                and_lines.push((g3, g1 ^ 1, g2 ^ 1));
                lit_of[id] = g3 ^ 1;
            }
        }
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "aag {} {} 0 {} {}",
        next_var - 1,
        xag.input_count(),
        xag.output_count(),
        and_lines.len()
    );
    for &id in xag.inputs() {
        let _ = writeln!(out, "{}", lit_of[id]);
    }
    for &o in xag.outputs() {
        let _ = writeln!(out, "{}", map(&lit_of, o));
    }
    for (l, a, b) in &and_lines {
        let _ = writeln!(out, "{l} {a} {b}");
    }
    for i in 0..xag.input_count() {
        if let Some(n) = xag.input_name(i) {
            let _ = writeln!(out, "i{i} {n}");
        }
    }
    for i in 0..xag.output_count() {
        if let Some(n) = xag.output_name(i) {
            let _ = writeln!(out, "o{i} {n}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const AND2: &str = "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n";

    /// 2-bit ripple adder: inputs a0 a1 b0 b1, outputs s0 s1 (sum mod 4).
    /// Gate definitions are deliberately out of order.
    const ADDER2: &str = "\
aag 14 4 0 2 10
2
4
6
8
15
29
28 25 27
10 2 7
12 3 6
14 11 13
16 2 6
24 23 17
26 22 16
18 4 9
20 5 8
22 19 21
i0 a0
i1 a1
i2 b0
i3 b1
o0 s0
o1 s1
";

    #[test]
    fn single_and() {
        let xag = read_aiger(AND2).unwrap();
        assert_eq!(xag.input_count(), 2);
        assert_eq!(xag.and_count(), 1);
        assert_eq!(xag.evaluate(&[true, true]).unwrap(), vec![true]);
        assert_eq!(xag.evaluate(&[true, false]).unwrap(), vec![false]);
    }

    #[test]
    fn latches_rejected() {
        let e = read_aiger("aag 3 1 1 1 0\n2\n4 2\n4\n").unwrap_err();
        assert!(e.to_string().contains("sequential not supported"));
    }

    #[test]
    fn malformed_header_and_literals() {
        let e = read_aiger("aig 1 1 0 1 0\n2\n2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = read_aiger("aag 3 2 0 1 1\n2\n4\n6\n6 2 x\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 5, .. }), "{e}");
        let e = read_aiger("aag 3 2 0 1 1\n2\n4\n6\n6 2 40\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 5, .. }), "{e}");
    }

    #[test]
    fn cycle_rejected() {
        let e = read_aiger("aag 3 1 0 1 2\n2\n4\n4 2 6\n6 2 4\n").unwrap_err();
        assert!(e.to_string().contains("cycle"), "{e}");
    }

    #[test]
    fn ripple_adder_adds() {
        let xag = read_aiger(ADDER2).unwrap();
        assert_eq!(xag.input_count(), 4);
        assert_eq!(xag.xor_count(), 0);
        for x in 0..16u32 {
            let a = x >> 2;
            let b = x & 3;
            let assign = [a & 1 == 1, a >> 1 == 1, b & 1 == 1, b >> 1 == 1];
            let out = xag.evaluate(&assign).unwrap();
            let sum = u32::from(out[0]) | u32::from(out[1]) << 1;
            assert_eq!(sum, (a + b) % 4, "a={a} b={b}");
        }
    }

    #[test]
    fn write_then_read_preserves_function() {
        let mut b = XagBuilder::new();
        let (x, y, z) = (b.input(), b.input(), b.input());
        let t = b.xor(x, !y);
        let u = b.and(t, z);
        b.output(!u);
        b.output(t);
        let xag = b.finish();
        let again = read_aiger(&write_aiger(&xag)).unwrap();
        assert_eq!(again.output_tables().unwrap(), xag.output_tables().unwrap());
    }

    #[test]
    fn symbols_are_kept() {
        let xag = read_aiger("aag 3 2 0 1 1\n2\n4\n6\n6 2 4\ni0 a\ni1 b\no0 f\nc\ncomment\n").unwrap();
        assert_eq!(xag.input_name(1), Some("b"));
        assert_eq!(xag.output_name(0), Some("f"));
        let again = read_aiger(&write_aiger(&xag)).unwrap();
        assert_eq!(again.output_name(0), Some("f"));
    }
}
