use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::lower::{RevNetwork, RevNode, RevNodeId, RevPart};
use super::stg::SingleTargetGate;
use crate::error::{Error, Result};
use crate::mapper::{LutFunction, LutNetwork, Source};
use crate::pebbling::{PebblingDag, PebblingStrategy};
use crate::qcirc::Qubit;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Compute,
    Uncompute,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Compute => "C",
            Direction::Uncompute => "U",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleStep {
    pub node: RevNodeId,
    pub direction: Direction,
    pub target: Qubit,
    /// Applied in order; all write `target`.
    pub gates: Vec<SingleTargetGate>,
}

/// Ordered compute/uncompute steps over `inputs + outputs + ancillas`
/// qubits, laid out inputs first, then outputs, then ancillae.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StgSchedule {
    pub inputs: usize,
    pub outputs: usize,
    pub ancillas: usize,
    pub steps: Vec<ScheduleStep>,
    pub network: RevNetwork,
}

impl StgSchedule {
    pub fn qubit_count(&self) -> usize {
        self.inputs + self.outputs + self.ancillas
    }

    pub fn input_qubits(&self) -> std::ops::Range<Qubit> {
        0..self.inputs
    }

    pub fn output_qubits(&self) -> std::ops::Range<Qubit> {
        self.inputs..self.inputs + self.outputs
    }

    pub fn ancilla_qubits(&self) -> std::ops::Range<Qubit> {
        self.inputs + self.outputs..self.qubit_count()
    }

    pub fn stg_count(&self) -> usize {
        self.steps.iter().map(|s| s.gates.len()).sum()
    }

    /// `step# (C|U) lut@qubit [controls]`, one line per step.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            let controls: Vec<String> =
                s.gates.iter().flat_map(|g| g.controls.iter()).map(|q| q.to_string()).collect();
            let _ = writeln!(
                out,
                "{i} {} {}@{} [{}]",
                s.direction,
                self.network.node(s.node).label(),
                s.target,
                controls.join(" ")
            );
        }
        out
    }
}

/// Checks legality of every move and the final state, and returns the peak
/// number of pebbled non-output nodes.
pub fn validate_strategy(dag: &PebblingDag, strategy: &PebblingStrategy, budget: Option<usize>) -> Result<usize> {
    let mut pebbled = vec![false; dag.len()];
    let mut ancillas = 0usize;
    let mut peak = 0usize;
    for (i, m) in strategy.moves.iter().enumerate() {
        let illegal = |message: String| Err(Error::IllegalStrategy { index: i, message });
        if m.node >= dag.len() {
            return illegal(format!("unknown node {}", m.node));
        }
        if pebbled[m.node] == m.pebble {
            let what = if m.pebble { "already pebbled" } else { "not pebbled" };
            return illegal(format!("node {} is {what}", m.node));
        }
        if let Some(&u) = dag.preds(m.node).iter().find(|&&u| !pebbled[u]) {
            return illegal(format!("predecessor {u} of node {} is not pebbled", m.node));
        }
        pebbled[m.node] = m.pebble;
        if !dag.is_output(m.node) {
            if m.pebble {
                ancillas += 1;
            } else {
                ancillas -= 1;
            }
        }
        peak = peak.max(ancillas);
        if let Some(b) = budget {
            if ancillas > b {
                return illegal(format!("{ancillas} pebbles exceed the budget of {b}"));
            }
        }
    }
    if let Some(v) = (0..dag.len()).find(|&v| pebbled[v] != dag.is_output(v)) {
        let what = if dag.is_output(v) { "output left unpebbled" } else { "pebble left on non-output" };
        return Err(Error::IllegalStrategy { index: strategy.moves.len(), message: format!("{what}: node {v}") });
    }
    Ok(peak)
}

/// Bennett clean-up: compute everything, write the outputs, uncompute in
/// reverse.
pub fn bennett_schedule(luts: &LutNetwork) -> Result<StgSchedule> {
    let net = RevNetwork::lower(luts)?;
    let strategy = PebblingStrategy::bennett(&net.dag());
    schedule_from_strategy(net, &strategy)
}

/// Turns pebbling moves into steps. Ancillae come from a LIFO free list.
pub fn schedule_from_strategy(net: RevNetwork, strategy: &PebblingStrategy) -> Result<StgSchedule> {
    let dag = net.dag();
    validate_strategy(&dag, strategy, None)?;
    let (inputs, outputs) = (net.input_count(), net.output_count());
    let first_ancilla = inputs + outputs;
    let mut qubit_of: Vec<Option<Qubit>> = vec![None; net.len()];
    let mut free: Vec<Qubit> = Vec::new();
    let mut ancillas = 0usize;
    let mut steps = Vec::with_capacity(strategy.moves.len());
    for m in &strategy.moves {
        let node = net.node(m.node);
        let target = match (node.output, m.pebble) {
            (Some(k), _) => inputs + k,
            (None, true) => free.pop().unwrap_or_else(|| {
                ancillas += 1;
                first_ancilla + ancillas - 1
            }),
            (None, false) => qubit_of[m.node].expect("validated strategy"),
        };
        let mut gates = Vec::with_capacity(node.parts.len());
        for part in &node.parts {
            if !emits_gate(part) {
                continue;
            }
            let controls = part
                .leaves
                .iter()
                .map(|leaf| match *leaf {
                    Source::Input(i) => i,
                    Source::Lut(l) => {
                        let holder = net.node_of_lut(l).expect("lowered network references scheduled LUTs");
                        qubit_of[holder].expect("validated strategy keeps predecessors pebbled")
                    }
                    Source::Const => unreachable!("constant leaves are rejected by the LUT network"),
                })
                .collect();
            gates.push(SingleTargetGate::new(controls, part.function.clone(), target)?);
        }
        let direction = if m.pebble {
            qubit_of[m.node] = Some(target);
            Direction::Compute
        } else {
            qubit_of[m.node] = None;
            if node.output.is_none() {
                free.push(target);
            }
            gates.reverse();
            Direction::Uncompute
        };
        steps.push(ScheduleStep { node: m.node, direction, target, gates });
    }
    Ok(StgSchedule { inputs, outputs, ancillas, steps, network: net })
}

/// Default cap on classical evaluations: `2^20` input vectors.
pub const DEFAULT_VALIDATION_INPUTS: usize = 20;

/// Outcome of [`validate_schedule`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleReport {
    pub assignments_checked: usize,
    pub exhaustive: bool,
}

/// Checks a schedule against its LUT network.
///
/// A structural pass tracks which node occupies each qubit and rejects
/// steps that read a value not currently held, overwrite a busy ancilla or
/// leave an ancilla in use. A classical simulation then checks leaf values
/// at every step, the outputs, and that ancillae end in 0, exhaustively up
/// to `max_inputs` inputs and on 4096 seeded samples above.
pub fn validate_schedule(luts: &LutNetwork, sched: &StgSchedule, max_inputs: usize) -> Result<ScheduleReport> {
    structural_check(luts, sched)?;
    let n = luts.input_count();
    let exhaustive = n <= max_inputs;
    let assignments: Vec<u64> = if exhaustive {
        (0..1u64 << n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5c4e);
        (0..4096).map(|_| rng.gen::<u64>() & ((1u64 << n.min(63)) - 1)).collect()
    };
    let first_failure = assignments
        .par_iter()
        .map(|&x| simulate_one(luts, sched, x).err())
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .min_by_key(|e| match e {
            Error::Schedule { step, .. } => *step,
            _ => usize::MAX,
        });
    if let Some(e) = first_failure {
        return Err(e);
    }
    Ok(ScheduleReport { assignments_checked: assignments.len(), exhaustive })
}

/// Parts of `node` that produce a gate, in the order of the step's gates.
fn step_parts(node: &RevNode, direction: Direction) -> Vec<&RevPart> {
    let mut parts: Vec<&RevPart> = node.parts.iter().filter(|p| emits_gate(p)).collect();
    if direction == Direction::Uncompute {
        parts.reverse();
    }
    parts
}

fn emits_gate(p: &RevPart) -> bool {
    !(p.leaves.is_empty() && matches!(p.function, LutFunction::Parity { complemented: false }))
}

fn structural_check(luts: &LutNetwork, sched: &StgSchedule) -> Result<()> {
    let net = &sched.network;
    if net.input_count() != luts.input_count() || net.output_count() != luts.output_count() {
        return Err(Error::Schedule { step: 0, message: "schedule and LUT network interfaces differ".into() });
    }
    let q = sched.qubit_count();
    let mut holder: Vec<Option<RevNodeId>> = vec![None; q];
    for (i, step) in sched.steps.iter().enumerate() {
        let bad = |message: String| Err(Error::Schedule { step: i, message });
        let node = net.node(step.node);
        if step.target >= q || step.target < sched.inputs {
            return bad(format!("target qubit {} is not an output or ancilla", step.target));
        }
        let is_output_qubit = sched.output_qubits().contains(&step.target);
        match (node.output, is_output_qubit) {
            (Some(k), true) if step.target == sched.inputs + k => {}
            (None, false) => {}
            _ => return bad(format!("node {} written to the wrong register", node.label())),
        }
        if !is_output_qubit {
            match (step.direction, holder[step.target]) {
                (Direction::Compute, None) => {}
                (Direction::Compute, Some(other)) => {
                    return bad(format!("ancilla {} still holds {}", step.target, net.node(other).label()))
                }
                (Direction::Uncompute, Some(h)) if h == step.node => {}
                (Direction::Uncompute, _) => {
                    return bad(format!("uncompute of {} from a qubit that does not hold it", node.label()))
                }
            }
        }
        let parts = step_parts(node, step.direction);
        if parts.len() != step.gates.len() {
            return bad(format!("{} gates for {} parts", step.gates.len(), parts.len()));
        }
        for (g, part) in step.gates.iter().zip(parts) {
            if g.target != step.target || g.controls.len() != part.leaves.len() {
                return bad("gate does not match its node".into());
            }
            for (&c, leaf) in g.controls.iter().zip(&part.leaves) {
                let ok = match *leaf {
                    Source::Input(x) => c == x,
                    Source::Lut(l) => c < q && holder[c].is_some() && holder[c] == net.node_of_lut(l),
                    Source::Const => false,
                };
                if !ok {
                    return bad(format!("liveness: leaf {leaf} of {} is not live on qubit {c}", node.label()));
                }
            }
        }
        if !is_output_qubit {
            holder[step.target] = match step.direction {
                Direction::Compute => Some(step.node),
                Direction::Uncompute => None,
            };
        }
    }
    if let Some(a) = sched.ancilla_qubits().find(|&a| holder[a].is_some()) {
        return Err(Error::Schedule {
            step: sched.steps.len(),
            message: format!("ancilla dirty: qubit {a} still holds {}", net.node(holder[a].unwrap()).label()),
        });
    }
    Ok(())
}

fn simulate_one(luts: &LutNetwork, sched: &StgSchedule, x: u64) -> Result<()> {
    let n = luts.input_count();
    let assignment: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
    let lut_values = luts.evaluate_luts(&assignment)?;
    let expected_out = luts.evaluate(&assignment)?;
    let net = &sched.network;
    let mut bits = vec![false; sched.qubit_count()];
    bits[..n].copy_from_slice(&assignment);
    for (i, step) in sched.steps.iter().enumerate() {
        for (g, part) in step.gates.iter().zip(step_parts(net.node(step.node), step.direction)) {
            // leaf values must match the LUT network
            for (&c, &leaf) in g.controls.iter().zip(&part.leaves) {
                let want = match leaf {
                    Source::Input(k) => assignment[k],
                    Source::Lut(l) => lut_values[l],
                    Source::Const => false,
                };
                if bits[c] != want {
                    return Err(Error::Schedule {
                        step: i,
                        message: format!("liveness: qubit {c} holds a wrong value for {leaf} (input {x:#b})"),
                    });
                }
            }
            g.apply(&mut bits);
        }
    }
    for (k, q) in sched.output_qubits().enumerate() {
        if bits[q] != expected_out[k] {
            return Err(Error::Schedule {
                step: sched.steps.len(),
                message: format!("output {k} wrong for input {x:#b}"),
            });
        }
    }
    if let Some(a) = sched.ancilla_qubits().find(|&a| bits[a]) {
        return Err(Error::Schedule {
            step: sched.steps.len(),
            message: format!("ancilla dirty: qubit {a} is 1 for input {x:#b}"),
        });
    }
    if bits[..n] != assignment[..] {
        return Err(Error::Schedule { step: sched.steps.len(), message: "input qubits modified".into() });
    }
    Ok(())
}
