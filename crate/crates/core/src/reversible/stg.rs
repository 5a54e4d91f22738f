use crate::error::{Error, Result};
use crate::mapper::LutFunction;
use crate::qcirc::Qubit;

/// Reversible gate flipping `target` iff `function(controls)` is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleTargetGate {
    /// First control is the most significant variable of the function.
    pub controls: Vec<Qubit>,
    pub function: LutFunction,
    pub target: Qubit,
}

impl SingleTargetGate {
    pub fn new(controls: Vec<Qubit>, function: LutFunction, target: Qubit) -> Result<Self> {
        let bad = |message: String| Err(Error::Construction { node: target, message });
        if controls.contains(&target) {
            return bad(format!("target qubit {target} is also a control"));
        }
        let mut sorted = controls.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != controls.len() {
            return bad("duplicate control qubit".into());
        }
        if let LutFunction::Table(t) = &function {
            if t.vars() != controls.len() {
                return bad(format!("{}-variable function on {} controls", t.vars(), controls.len()));
            }
        }
        Ok(Self { controls, function, target })
    }

    /// Control-function value for the classical qubit values `bits`.
    pub fn fires(&self, bits: &[bool]) -> bool {
        let vals: Vec<bool> = self.controls.iter().map(|&q| bits[q]).collect();
        match &self.function {
            LutFunction::Table(t) => t.eval(&vals),
            LutFunction::Parity { complemented } => vals.iter().fold(*complemented, |a, &b| a ^ b),
        }
    }

    /// Applies the gate to classical qubit values.
    pub fn apply(&self, bits: &mut [bool]) {
        if self.fires(bits) {
            bits[self.target] ^= true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TruthTable;

    #[test]
    fn construction_checks() {
        let and2 = LutFunction::Table(TruthTable::var(2, 0).and(&TruthTable::var(2, 1)));
        assert!(SingleTargetGate::new(vec![0, 1], and2.clone(), 1).is_err());
        assert!(SingleTargetGate::new(vec![0, 0], and2.clone(), 2).is_err());
        assert!(SingleTargetGate::new(vec![0], and2.clone(), 2).is_err());
        let g = SingleTargetGate::new(vec![0, 1], and2, 2).unwrap();
        let mut bits = [true, true, false];
        g.apply(&mut bits);
        assert_eq!(bits, [true, true, true]);
        let x = SingleTargetGate::new(vec![], LutFunction::Parity { complemented: true }, 0).unwrap();
        let mut b = [false];
        x.apply(&mut b);
        assert!(b[0]);
    }
}
