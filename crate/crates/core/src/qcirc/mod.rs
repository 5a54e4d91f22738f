//! Quantum circuit IR over {H, CNOT, Rz}, statistics, OpenQASM I/O and
//! simulators.

mod angle;
mod qasm;
mod sim;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use angle::DyadicAngle;
pub use qasm::{emit_qasm, parse_qasm};
pub use sim::{
    build_unitary, equal_up_to_phase, phase_deviation, simulate_statevector, verify_oracle, OracleFailure,
    OracleReport, SparseState, MAX_ORACLE_INPUTS, MAX_SPARSE_QUBITS, MAX_STATEVECTOR_QUBITS, MAX_UNITARY_QUBITS,
};

pub type Qubit = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(Qubit),
    Cx { control: Qubit, target: Qubit },
    Rz { qubit: Qubit, angle: DyadicAngle },
}

impl Gate {
    pub fn qubits(&self) -> impl Iterator<Item = Qubit> {
        let (a, b) = match *self {
            Gate::H(q) | Gate::Rz { qubit: q, .. } => (q, None),
            Gate::Cx { control, target } => (control, Some(target)),
        };
        std::iter::once(a).chain(b)
    }

    /// Same gate on remapped qubits.
    pub fn remap(&self, map: impl Fn(Qubit) -> Qubit) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(map(q)),
            Gate::Cx { control, target } => Gate::Cx { control: map(control), target: map(target) },
            Gate::Rz { qubit, angle } => Gate::Rz { qubit: map(qubit), angle },
        }
    }
}

/// Register a qubit belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Register {
    Input,
    Output,
    Ancilla,
}

impl Register {
    pub fn name(self) -> &'static str {
        match self {
            Register::Input => "x",
            Register::Output => "y",
            Register::Ancilla => "a",
        }
    }
}

/// Qubits are laid out as `x[0..inputs]`, `y[0..outputs]`, `a[0..ancillas]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuantumCircuit {
    inputs: usize,
    outputs: usize,
    ancillas: usize,
    gates: Vec<Gate>,
}

impl QuantumCircuit {
    pub fn new(inputs: usize, outputs: usize, ancillas: usize) -> Self {
        Self { inputs, outputs, ancillas, gates: Vec::new() }
    }

    pub fn qubit_count(&self) -> usize {
        self.inputs + self.outputs + self.ancillas
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn register_of(&self, q: Qubit) -> (Register, usize) {
        if q < self.inputs {
            (Register::Input, q)
        } else if q < self.inputs + self.outputs {
            (Register::Output, q - self.inputs)
        } else {
            (Register::Ancilla, q - self.inputs - self.outputs)
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for q in gate.qubits() {
            if q >= self.qubit_count() {
                return Err(Error::Construction {
                    node: self.gates.len(),
                    message: format!("qubit {q} out of range ({} qubits)", self.qubit_count()),
                });
            }
        }
        if let Gate::Cx { control, target } = gate {
            if control == target {
                return Err(Error::Construction {
                    node: self.gates.len(),
                    message: format!("CNOT with control = target = {control}"),
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn stats(&self) -> CircuitStats {
        let mut s = CircuitStats { qubits: self.qubit_count(), ..CircuitStats::default() };
        for g in &self.gates {
            match g {
                Gate::H(_) => s.h_count += 1,
                Gate::Cx { .. } => s.cnot_count += 1,
                Gate::Rz { .. } => s.rz_count += 1,
            }
        }
        s.total_gates = s.h_count + s.cnot_count + s.rz_count;
        s
    }
}

/// Gate and qubit counts of a synthesized circuit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub qubits: usize,
    pub total_gates: usize,
    pub cnot_count: usize,
    pub rz_count: usize,
    pub h_count: usize,
    /// Single-target gates applied by the schedule.
    pub stg_count: usize,
    pub schedule_steps: usize,
    /// Only filled in when requested; keeps stats files reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_checks_qubits() {
        let mut c = QuantumCircuit::new(1, 1, 0);
        assert!(c.push(Gate::Cx { control: 0, target: 1 }).is_ok());
        assert!(c.push(Gate::H(2)).is_err());
        assert!(c.push(Gate::Cx { control: 1, target: 1 }).is_err());
        assert_eq!(c.register_of(1), (Register::Output, 0));
    }

    #[test]
    fn stats_sum() {
        let mut c = QuantumCircuit::new(2, 1, 1);
        c.extend([
            Gate::H(2),
            Gate::Cx { control: 0, target: 2 },
            Gate::Rz { qubit: 2, angle: DyadicAngle::new(1, 2) },
            Gate::H(2),
        ])
        .unwrap();
        let s = c.stats();
        assert_eq!((s.qubits, s.total_gates, s.h_count, s.cnot_count, s.rz_count), (4, 4, 2, 1, 1));
        let json = serde_json::to_string(&s).unwrap();
        assert!(!json.contains("wall_time_ms"));
    }
}
