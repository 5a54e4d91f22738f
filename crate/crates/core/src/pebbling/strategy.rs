use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

/// Dependency DAG of a pebbling game. Nodes are in topological order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PebblingDag {
    preds: Vec<Vec<usize>>,
    outputs: Vec<bool>,
}

impl PebblingDag {
    pub fn new(preds: Vec<Vec<usize>>, outputs: Vec<bool>) -> Result<Self> {
        if preds.len() != outputs.len() {
            return Err(Error::SizeMismatch { expected: preds.len(), got: outputs.len() });
        }
        for (v, ps) in preds.iter().enumerate() {
            if let Some(&u) = ps.iter().find(|&&u| u >= v) {
                return Err(Error::Construction { node: v, message: format!("predecessor {u} is not earlier") });
            }
        }
        Ok(Self { preds, outputs })
    }

    /// Chain `0 -> 1 -> ... -> n-1` with the last node as output.
    pub fn chain(n: usize) -> Self {
        let preds = (0..n).map(|v| if v == 0 { vec![] } else { vec![v - 1] }).collect();
        let outputs = (0..n).map(|v| v + 1 == n).collect();
        Self { preds, outputs }
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn preds(&self, v: usize) -> &[usize] {
        &self.preds[v]
    }

    pub fn is_output(&self, v: usize) -> bool {
        self.outputs[v]
    }

    pub fn output_count(&self) -> usize {
        self.outputs.iter().filter(|&&o| o).count()
    }

    /// Nodes that must be pebbled at some point: outputs and their
    /// transitive predecessors.
    pub fn required(&self) -> Vec<bool> {
        let mut req = self.outputs.clone();
        for v in (0..self.len()).rev() {
            if req[v] {
                for &u in &self.preds[v] {
                    req[u] = true;
                }
            }
        }
        req
    }

    /// Move count of the Bennett strategy, a lower bound for any strategy:
    /// every required non-output is pebbled and unpebbled at least once.
    pub fn bennett_steps(&self) -> usize {
        let req = self.required();
        (0..self.len()).filter(|&v| req[v]).map(|v| if self.outputs[v] { 1 } else { 2 }).sum()
    }

    /// Ancillae used by the Bennett strategy.
    pub fn bennett_pebbles(&self) -> usize {
        let req = self.required();
        (0..self.len()).filter(|&v| req[v] && !self.outputs[v]).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub node: usize,
    /// `true` places a pebble (compute), `false` removes it (uncompute).
    pub pebble: bool,
}

impl Move {
    pub fn on(node: usize) -> Self {
        Self { node, pebble: true }
    }

    pub fn off(node: usize) -> Self {
        Self { node, pebble: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PebblingStrategy {
    pub moves: Vec<Move>,
}

impl PebblingStrategy {
    pub fn new(moves: Vec<Move>) -> Self {
        Self { moves }
    }

    /// Compute non-outputs in order, then outputs, then uncompute the
    /// non-outputs in reverse.
    pub fn bennett(dag: &PebblingDag) -> Self {
        let req = dag.required();
        let inner: Vec<usize> = (0..dag.len()).filter(|&v| req[v] && !dag.is_output(v)).collect();
        let mut moves: Vec<Move> = inner.iter().map(|&v| Move::on(v)).collect();
        moves.extend((0..dag.len()).filter(|&v| dag.is_output(v)).map(Move::on));
        moves.extend(inner.iter().rev().map(|&v| Move::off(v)));
        Self { moves }
    }

    pub fn step_count(&self) -> usize {
        self.moves.len()
    }

    /// One move per line, `+v` or `-v`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.moves {
            let _ = writeln!(out, "{}{}", if m.pebble { '+' } else { '-' }, m.node);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut moves = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let err = || Error::Parse { line: i + 1, message: format!("malformed move '{t}'") };
            let (sign, rest) = t.split_at(1);
            let node: usize = rest.parse().map_err(|_| err())?;
            moves.push(match sign {
                "+" => Move::on(node),
                "-" => Move::off(node),
                _ => return Err(err()),
            });
        }
        Ok(Self { moves })
    }
}

impl fmt::Display for PebblingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.moves.iter().map(|m| format!("{}{}", if m.pebble { '+' } else { '-' }, m.node)).collect();
        f.write_str(&parts.join(" "))
    }
}
