//! Plain-text XAG dump.
//!
//! ```text
//! xag <nodes> <inputs> <outputs>
//! 0 CONST
//! 1 PI
//! 3 AND 2 5
//! 4 XOR 6 4
//! o0 9
//! ```
//! Literals are `2 * node + complement`.

use std::fmt::Write as _;

use super::{Node, Signal, Xag, XagBuilder};
use crate::error::{Error, Result};

pub fn write_dump(xag: &Xag) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "xag {} {} {}", xag.node_count(), xag.input_count(), xag.output_count());
    for (id, node) in xag.nodes().iter().enumerate() {
        let _ = match node {
            Node::Const => writeln!(out, "{id} CONST"),
            Node::Input(_) => writeln!(out, "{id} PI"),
            Node::And(a, b) => writeln!(out, "{id} AND {} {}", a.literal(), b.literal()),
            Node::Xor(a, b) => writeln!(out, "{id} XOR {} {}", a.literal(), b.literal()),
        };
    }
    for (k, o) in xag.outputs().iter().enumerate() {
        let _ = writeln!(out, "o{k} {}", o.literal());
    }
    out
}

/// Parses the format written by [`write_dump`].
pub fn parse_dump(text: &str) -> Result<Xag> {
    let err = |line: usize, m: &str| Error::Parse { line, message: m.to_string() };
    let mut b = XagBuilder::new();
    let mut map: Vec<Signal> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() || toks[0] == "xag" || toks[0].starts_with('#') {
            continue;
        }
        let lit = |t: &str, map: &[Signal]| -> Result<Signal> {
            let l: u32 = t.parse().map_err(|_| err(ln, "malformed literal"))?;
            let s = map
                .get((l >> 1) as usize)
                .ok_or_else(|| err(ln, "reference to undefined node"))?;
            Ok(s.complement_if(l & 1 == 1))
        };
        if let Some(k) = toks[0].strip_prefix('o') {
            k.parse::<usize>().map_err(|_| err(ln, "malformed output index"))?;
            let s = lit(toks.get(1).ok_or_else(|| err(ln, "missing output literal"))?, &map)?;
            b.output(s);
            continue;
        }
        let id: usize = toks[0].parse().map_err(|_| err(ln, "malformed node id"))?;
        if id != map.len() {
            return Err(err(ln, "node ids must be consecutive"));
        }
        let s = match (toks.get(1).copied(), toks.len()) {
            (Some("CONST"), 2) => Signal::FALSE,
            (Some("PI"), 2) => b.input(),
            (Some("AND"), 4) => {
                let (x, y) = (lit(toks[2], &map)?, lit(toks[3], &map)?);
                b.and(x, y)
            }
            (Some("XOR"), 4) => {
                let (x, y) = (lit(toks[2], &map)?, lit(toks[3], &map)?);
                b.xor(x, y)
            }
            _ => return Err(err(ln, "unknown node line")),
        };
        map.push(s);
    }
    Ok(b.finish())
}
