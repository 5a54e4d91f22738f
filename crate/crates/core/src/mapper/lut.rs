use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::spectral::{walsh_spectrum, TruthTable, MAX_VARS};

pub type LutId = usize;

/// Signal source inside a [`LutNetwork`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Const,
    Input(usize),
    Lut(LutId),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Const => f.write_str("0"),
            Source::Input(i) => write!(f, "x{i}"),
            Source::Lut(l) => write!(f, "l{l}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LutKind {
    Generic,
    XorBlock,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LutFunction {
    /// Arbitrary function over the leaves, first leaf most significant.
    Table(TruthTable),
    /// Parity of all leaves, optionally complemented.
    Parity { complemented: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lut {
    pub leaves: Vec<Source>,
    pub function: LutFunction,
    /// Number of nonzero Walsh coefficients for generic LUTs, 0 for XOR blocks.
    pub cost: u32,
}

impl Lut {
    pub fn generic(leaves: Vec<Source>, table: TruthTable) -> Self {
        let cost = walsh_spectrum(&table).nonzero_count() as u32;
        Self { leaves, function: LutFunction::Table(table), cost }
    }

    pub fn xor_block(leaves: Vec<Source>, complemented: bool) -> Self {
        Self { leaves, function: LutFunction::Parity { complemented }, cost: 0 }
    }

    pub fn kind(&self) -> LutKind {
        match self.function {
            LutFunction::Table(_) => LutKind::Generic,
            LutFunction::Parity { .. } => LutKind::XorBlock,
        }
    }

    pub fn eval(&self, leaf_values: &[bool]) -> bool {
        match &self.function {
            LutFunction::Table(t) => t.eval(leaf_values),
            LutFunction::Parity { complemented } => {
                leaf_values.iter().fold(*complemented, |acc, &v| acc ^ v)
            }
        }
    }

    /// Function as a table over the leaves; `None` for parity blocks with
    /// more than 16 leaves.
    pub fn truth_table(&self) -> Option<TruthTable> {
        match &self.function {
            LutFunction::Table(t) => Some(t.clone()),
            LutFunction::Parity { complemented } => (self.leaves.len() <= MAX_VARS).then(|| {
                let support: Vec<usize> = (0..self.leaves.len()).collect();
                TruthTable::parity(self.leaves.len(), &support, *complemented)
            }),
        }
    }
}

/// Primary output of a LUT network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputRef {
    pub source: Source,
    pub complemented: bool,
}

/// Mapped cover of k-LUTs and XOR blocks in topological order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LutNetwork {
    inputs: usize,
    luts: Vec<Lut>,
    outputs: Vec<OutputRef>,
}

impl LutNetwork {
    /// Validates that every leaf is a primary input or an earlier LUT and
    /// that table arities match the leaf lists.
    pub fn new(inputs: usize, luts: Vec<Lut>, outputs: Vec<OutputRef>) -> Result<Self> {
        let check = |s: Source, own: usize, allow_const: bool| -> Result<()> {
            let ok = match s {
                Source::Const => allow_const,
                Source::Input(i) => i < inputs,
                Source::Lut(l) => l < own,
            };
            if ok {
                Ok(())
            } else {
                Err(Error::Construction { node: own, message: format!("invalid reference {s}") })
            }
        };
        for (id, lut) in luts.iter().enumerate() {
            for &leaf in &lut.leaves {
                check(leaf, id, false)?;
            }
            let mut sorted = lut.leaves.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != lut.leaves.len() {
                return Err(Error::Construction { node: id, message: "duplicate leaf".into() });
            }
            if let LutFunction::Table(t) = &lut.function {
                if t.vars() != lut.leaves.len() {
                    return Err(Error::Construction {
                        node: id,
                        message: format!("table over {} variables for {} leaves", t.vars(), lut.leaves.len()),
                    });
                }
            }
        }
        for o in &outputs {
            check(o.source, luts.len(), true)?;
        }
        Ok(Self { inputs, luts, outputs })
    }

    pub fn input_count(&self) -> usize {
        self.inputs
    }

    pub fn luts(&self) -> &[Lut] {
        &self.luts
    }

    pub fn lut(&self, id: LutId) -> &Lut {
        &self.luts[id]
    }

    pub fn lut_count(&self) -> usize {
        self.luts.len()
    }

    pub fn outputs(&self) -> &[OutputRef] {
        &self.outputs
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn xor_block_count(&self) -> usize {
        self.luts.iter().filter(|l| l.kind() == LutKind::XorBlock).count()
    }

    /// Sum of the spectral costs of all LUTs.
    pub fn total_cost(&self) -> u64 {
        self.luts.iter().map(|l| u64::from(l.cost)).sum()
    }

    pub fn max_generic_leaves(&self) -> usize {
        self.luts
            .iter()
            .filter(|l| l.kind() == LutKind::Generic)
            .map(|l| l.leaves.len())
            .max()
            .unwrap_or(0)
    }

    /// Number of LUT consumers of each LUT (output references excluded).
    pub fn lut_fanouts(&self) -> Vec<usize> {
        let mut f = vec![0; self.luts.len()];
        for lut in &self.luts {
            for leaf in &lut.leaves {
                if let Source::Lut(l) = leaf {
                    f[*l] += 1;
                }
            }
        }
        f
    }

    /// Value of every LUT under an input assignment.
    pub fn evaluate_luts(&self, assignment: &[bool]) -> Result<Vec<bool>> {
        if assignment.len() != self.inputs {
            return Err(Error::SizeMismatch { expected: self.inputs, got: assignment.len() });
        }
        let mut values = Vec::with_capacity(self.luts.len());
        let mut leaf_vals = Vec::new();
        for lut in &self.luts {
            leaf_vals.clear();
            leaf_vals.extend(lut.leaves.iter().map(|&s| self.value(s, assignment, &values)));
            values.push(lut.eval(&leaf_vals));
        }
        Ok(values)
    }

    pub fn evaluate(&self, assignment: &[bool]) -> Result<Vec<bool>> {
        let values = self.evaluate_luts(assignment)?;
        Ok(self
            .outputs
            .iter()
            .map(|o| self.value(o.source, assignment, &values) ^ o.complemented)
            .collect())
    }

    fn value(&self, s: Source, assignment: &[bool], values: &[bool]) -> bool {
        match s {
            Source::Const => false,
            Source::Input(i) => assignment[i],
            Source::Lut(l) => values[l],
        }
    }

    /// One line per LUT, `id <- [leaves] hex kind cost`, then one line per
    /// output. Parity blocks wider than 8 leaves print `parity`/`xnor`
    /// instead of a table.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (id, lut) in self.luts.iter().enumerate() {
            let leaves: Vec<String> = lut.leaves.iter().map(|s| s.to_string()).collect();
            let func = match (&lut.function, lut.leaves.len() <= 8) {
                (LutFunction::Table(t), _) => t.to_hex(),
                (LutFunction::Parity { .. }, true) => lut.truth_table().unwrap().to_hex(),
                (LutFunction::Parity { complemented: false }, false) => "parity".into(),
                (LutFunction::Parity { complemented: true }, false) => "xnor".into(),
            };
            let kind = match lut.kind() {
                LutKind::Generic => "generic",
                LutKind::XorBlock => "xor",
            };
            let _ = writeln!(out, "{id} <- [{}] {func} {kind} {}", leaves.join(" "), lut.cost);
        }
        for (k, o) in self.outputs.iter().enumerate() {
            let neg = if o.complemented { "!" } else { "" };
            let _ = writeln!(out, "o{k} <- {neg}{}", o.source);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and2() -> TruthTable {
        TruthTable::var(2, 0).and(&TruthTable::var(2, 1))
    }

    #[test]
    fn validation() {
        let bad = LutNetwork::new(2, vec![Lut::generic(vec![Source::Input(0), Source::Lut(0)], and2())], vec![]);
        assert!(bad.is_err());
        let bad = LutNetwork::new(2, vec![Lut::generic(vec![Source::Input(0)], and2())], vec![]);
        assert!(bad.is_err());
        let ok = LutNetwork::new(
            2,
            vec![Lut::generic(vec![Source::Input(0), Source::Input(1)], and2())],
            vec![OutputRef { source: Source::Lut(0), complemented: true }],
        )
        .unwrap();
        assert_eq!(ok.evaluate(&[true, true]).unwrap(), vec![false]);
        assert_eq!(ok.total_cost(), 4);
    }

    #[test]
    fn dump_format() {
        let net = LutNetwork::new(
            3,
            vec![
                Lut::generic(vec![Source::Input(0), Source::Input(1)], and2()),
                Lut::xor_block(vec![Source::Lut(0), Source::Input(2)], true),
            ],
            vec![OutputRef { source: Source::Lut(1), complemented: false }],
        )
        .unwrap();
        assert_eq!(net.dump(), "0 <- [x0 x1] 8 generic 4\n1 <- [l0 x2] 9 xor 0\no0 <- l1\n");
    }
}
