use std::fmt::Write as _;

use super::{DyadicAngle, Gate, QuantumCircuit, Register};
use crate::error::{Error, Result};

const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

fn qubit_name(c: &QuantumCircuit, q: usize) -> String {
    let (reg, idx) = c.register_of(q);
    format!("{}[{idx}]", reg.name())
}

/// OpenQASM 2.0 text; empty registers are not declared.
pub fn emit_qasm(c: &QuantumCircuit) -> String {
    let mut out = String::from(HEADER);
    for (reg, size) in [(Register::Input, c.inputs()), (Register::Output, c.outputs()), (Register::Ancilla, c.ancillas())] {
        if size > 0 {
            let _ = writeln!(out, "qreg {}[{size}];", reg.name());
        }
    }
    for g in c.gates() {
        let _ = match *g {
            Gate::H(q) => writeln!(out, "h {};", qubit_name(c, q)),
            Gate::Cx { control, target } => {
                writeln!(out, "cx {},{};", qubit_name(c, control), qubit_name(c, target))
            }
            Gate::Rz { qubit, angle } => writeln!(out, "rz({angle}) {};", qubit_name(c, qubit)),
        };
    }
    out
}

/// Reads the subset of OpenQASM 2.0 written by [`emit_qasm`].
pub fn parse_qasm(text: &str) -> Result<QuantumCircuit> {
    let mut sizes = [0usize; 3];
    let mut body = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("OPENQASM") || line.starts_with("include") {
            continue;
        }
        let ln = i + 1;
        let err = |m: &str| Error::Parse { line: ln, message: m.to_string() };
        let stmt = line.strip_suffix(';').ok_or_else(|| err("missing ';'"))?;
        if let Some(decl) = stmt.strip_prefix("qreg ") {
            let (name, size) = parse_ref(decl).ok_or_else(|| err("malformed qreg"))?;
            let slot = reg_slot(name).ok_or_else(|| err("unknown register"))?;
            sizes[slot] = size;
        } else {
            body.push((ln, stmt.to_string()));
        }
    }
    let mut c = QuantumCircuit::new(sizes[0], sizes[1], sizes[2]);
    let offsets = [0, sizes[0], sizes[0] + sizes[1]];
    for (ln, stmt) in body {
        let err = |m: &str| Error::Parse { line: ln, message: m.to_string() };
        let qubit = |s: &str| -> Result<usize> {
            let (name, idx) = parse_ref(s.trim()).ok_or_else(|| err("malformed qubit"))?;
            let slot = reg_slot(name).ok_or_else(|| err("unknown register"))?;
            if idx >= sizes[slot] {
                return Err(err("qubit index out of range"));
            }
            Ok(offsets[slot] + idx)
        };
        let gate = if let Some(q) = stmt.strip_prefix("h ") {
            Gate::H(qubit(q)?)
        } else if let Some(args) = stmt.strip_prefix("cx ") {
            let (a, b) = args.split_once(',').ok_or_else(|| err("cx needs two qubits"))?;
            Gate::Cx { control: qubit(a)?, target: qubit(b)? }
        } else if let Some(rest) = stmt.strip_prefix("rz(") {
            let (angle, q) = rest.split_once(')').ok_or_else(|| err("malformed rz"))?;
            let angle: DyadicAngle = angle.parse().map_err(|_| err("malformed angle"))?;
            Gate::Rz { qubit: qubit(q)?, angle }
        } else {
            return Err(err("unsupported statement"));
        };
        c.push(gate).map_err(|e| err(&e.to_string()))?;
    }
    Ok(c)
}

fn reg_slot(name: &str) -> Option<usize> {
    ["x", "y", "a"].iter().position(|&r| r == name)
}

fn parse_ref(s: &str) -> Option<(&str, usize)> {
    let (name, rest) = s.split_once('[')?;
    let idx = rest.strip_suffix(']')?.parse().ok()?;
    Some((name.trim(), idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_circuit_declares_one_register() {
        let c = QuantumCircuit::new(1, 0, 0);
        assert_eq!(emit_qasm(&c), format!("{HEADER}qreg x[1];\n"));
    }

    #[test]
    fn cnot_and_rz_text() {
        let mut c = QuantumCircuit::new(1, 1, 1);
        c.push(Gate::Cx { control: 0, target: 1 }).unwrap();
        c.push(Gate::Rz { qubit: 2, angle: DyadicAngle::new(-1, 2) }).unwrap();
        c.push(Gate::H(1)).unwrap();
        let text = emit_qasm(&c);
        assert!(text.contains("cx x[0],y[0];\n"));
        assert!(text.contains("rz(-pi/4) a[0];\n"));
        assert!(text.contains("h y[0];\n"));
        assert_eq!(parse_qasm(&text).unwrap(), c);
    }

    #[test]
    fn parse_errors_carry_line() {
        let e = parse_qasm("OPENQASM 2.0;\nqreg x[1];\nh x[3];\n").unwrap_err();
        assert!(e.to_string().starts_with("line 3"), "{e}");
        assert!(parse_qasm("qreg q[2];\n").is_err());
    }
}
