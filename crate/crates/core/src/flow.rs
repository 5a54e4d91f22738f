//! End-to-end synthesis: XAG in, `{CNOT, H, Rz}` oracle out.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::bench::{generate, BenchmarkSpec};
use crate::error::{Error, Result};
use crate::gray::synthesize_stg;
use crate::mapper::{map_to_luts, LutNetwork, MapperConfig, MapperMode};
use crate::pebbling::{solve, PebblingInstance, PebblingStrategy, SolveResult, DEFAULT_CONFLICT_LIMIT};
use crate::qcirc::{emit_qasm, verify_oracle, CircuitStats, QuantumCircuit, MAX_ORACLE_INPUTS};
use crate::reversible::{
    schedule_from_strategy, validate_schedule, RevNetwork, StgSchedule, DEFAULT_VALIDATION_INPUTS,
};
use crate::xag::{detect_xor, parse_dump, read_aiger, Xag};

pub const DEFAULT_MAX_RELAXATIONS: usize = 5;
pub const VERIFY_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputSource {
    /// ASCII AIGER (`.aag`) or XAG dump (`.xag`) file.
    File(PathBuf),
    Benchmark(BenchmarkSpec),
}

impl InputSource {
    pub fn load(&self) -> Result<(String, Xag)> {
        match self {
            InputSource::Benchmark(spec) => Ok((spec.name(), generate(spec)?)),
            InputSource::File(path) => {
                let text = std::fs::read_to_string(path)?;
                let name = path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
                let xag = if path.extension().is_some_and(|e| e == "xag") { parse_dump(&text)? } else { read_aiger(&text)? };
                Ok((name, xag))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Bennett,
    Pebble,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Bennett => "bennett",
            StrategyKind::Pebble => "pebble",
        })
    }
}

impl FromStr for StrategyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bennett" => Ok(StrategyKind::Bennett),
            "pebble" | "pebbling" => Ok(StrategyKind::Pebble),
            other => Err(Error::Config(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Ancilla budget for pebbling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PebbleBudget {
    Absolute(usize),
    /// Bennett's ancilla count minus the given amount.
    BennettMinus(usize),
}

impl PebbleBudget {
    pub fn resolve(self, bennett: usize) -> usize {
        match self {
            PebbleBudget::Absolute(p) => p,
            PebbleBudget::BennettMinus(d) => bennett.saturating_sub(d),
        }
    }
}

impl fmt::Display for PebbleBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PebbleBudget::Absolute(p) => write!(f, "{p}"),
            PebbleBudget::BennettMinus(0) => f.write_str("bennett"),
            PebbleBudget::BennettMinus(d) => write!(f, "bennett-{d}"),
        }
    }
}

impl FromStr for PebbleBudget {
    type Err = Error;
    /// `N`, `bennett` or `bennett-D`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("malformed pebble budget '{s}'"));
        if s == "bennett" {
            return Ok(PebbleBudget::BennettMinus(0));
        }
        if let Some(d) = s.strip_prefix("bennett-") {
            return d.parse().map(PebbleBudget::BennettMinus).map_err(|_| bad());
        }
        s.parse().map(PebbleBudget::Absolute).map_err(|_| bad())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowConfig {
    pub source: InputSource,
    pub mapper: MapperConfig,
    pub strategy: StrategyKind,
    /// Only meaningful with [`StrategyKind::Pebble`]; defaults to
    /// `bennett-1`.
    pub pebbles: Option<PebbleBudget>,
    /// Pebbling step budget; `None` uses the instance default.
    pub max_steps: Option<usize>,
    pub conflict_limit: Option<u64>,
    /// Extra pebbles granted one at a time when the solver gives up.
    pub max_relaxations: usize,
    pub verify: bool,
    /// Inputs above which verification is skipped.
    pub verify_max_inputs: usize,
    /// Adds `wall_time_ms` to the stats, which makes them run dependent.
    pub record_time: bool,
}

impl FlowConfig {
    pub fn new(source: InputSource) -> Self {
        Self {
            source,
            mapper: MapperConfig::default(),
            strategy: StrategyKind::Bennett,
            pebbles: None,
            max_steps: None,
            conflict_limit: Some(DEFAULT_CONFLICT_LIMIT),
            max_relaxations: DEFAULT_MAX_RELAXATIONS,
            verify: false,
            verify_max_inputs: MAX_ORACLE_INPUTS,
            record_time: false,
        }
    }

    pub fn with_mapper(mut self, mapper: MapperConfig) -> Self {
        self.mapper = mapper;
        self
    }

    pub fn bennett(mut self) -> Self {
        self.strategy = StrategyKind::Bennett;
        self.pebbles = None;
        self
    }

    pub fn pebble(mut self, budget: PebbleBudget) -> Self {
        self.strategy = StrategyKind::Pebble;
        self.pebbles = Some(budget);
        self
    }

    pub fn with_verify(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.mapper.validate()?;
        if self.pebbles.is_some() && self.strategy != StrategyKind::Pebble {
            return Err(Error::Config("a pebble budget requires the pebble strategy".into()));
        }
        if self.max_steps == Some(0) {
            return Err(Error::Config("step budget must be positive".into()));
        }
        if let InputSource::Benchmark(spec) = &self.source {
            spec.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relaxation {
    /// Budget that failed.
    pub pebbles: usize,
    /// `conflict_limit` or `unsat`.
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub passed: bool,
    pub cases: usize,
    pub max_deviation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Everything reported for one run; serialized as the stats JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowStats {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
    pub ancillas: usize,
    pub mapper: MapperMode,
    pub k: usize,
    pub priority_cuts: usize,
    pub xor_blocks_enabled: bool,
    pub luts: usize,
    pub xor_blocks: usize,
    pub lut_cost: u64,
    pub strategy: StrategyKind,
    pub bennett_ancillas: usize,
    /// Requested budget, before relaxation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pebble_budget: Option<usize>,
    /// Budget the returned strategy was found with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_pebble_budget: Option<usize>,
    pub relaxations: Vec<Relaxation>,
    pub sat_calls: usize,
    pub sat_conflicts: u64,
    pub circuit: CircuitStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
}

impl FlowStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize") + "\n"
    }

    pub fn verified_ok(&self) -> bool {
        self.verification.as_ref().is_none_or(|v| v.passed)
    }
}

#[derive(Clone, Debug)]
pub struct FlowOutput {
    pub stats: FlowStats,
    pub luts: LutNetwork,
    pub strategy: PebblingStrategy,
    pub schedule: StgSchedule,
    pub circuit: QuantumCircuit,
}

impl FlowOutput {
    pub fn qasm(&self) -> String {
        emit_qasm(&self.circuit)
    }
}

/// Builds the circuit for a schedule, one gray-synthesized block per
/// single-target gate.
pub fn synthesize_schedule(sched: &StgSchedule) -> Result<QuantumCircuit> {
    let mut circuit = QuantumCircuit::new(sched.inputs, sched.outputs, sched.ancillas);
    for step in &sched.steps {
        for g in &step.gates {
            circuit.extend(synthesize_stg(g)?)?;
        }
    }
    Ok(circuit)
}

pub fn run_flow(cfg: &FlowConfig) -> Result<FlowOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let (name, xag) = cfg.source.load()?;
    let luts = map_to_luts(&detect_xor(&xag), &cfg.mapper)?;
    let net = RevNetwork::lower(&luts)?;
    let dag = net.dag();
    let bennett_ancillas = dag.bennett_pebbles();

    let mut relaxations = Vec::new();
    let (mut sat_calls, mut sat_conflicts) = (0, 0);
    let mut requested = None;
    let mut final_budget = None;
    let strategy = match cfg.strategy {
        StrategyKind::Bennett => PebblingStrategy::bennett(&dag),
        StrategyKind::Pebble => {
            let budget = cfg.pebbles.unwrap_or(PebbleBudget::BennettMinus(1)).resolve(bennett_ancillas);
            requested = Some(budget);
            let mut p = budget;
            loop {
                let mut inst = PebblingInstance::new(dag.clone(), p).with_conflict_limit(cfg.conflict_limit);
                if let Some(t) = cfg.max_steps {
                    inst = inst.with_max_steps(t);
                }
                let sol = solve(&inst)?;
                sat_calls += sol.sat_calls;
                sat_conflicts += sol.conflicts;
                let reason = match sol.result {
                    SolveResult::Strategy(s) => {
                        final_budget = Some(p);
                        break s;
                    }
                    SolveResult::ConflictLimitHit => "conflict_limit",
                    SolveResult::Unsat => "unsat",
                };
                if relaxations.len() >= cfg.max_relaxations {
                    return Err(Error::Pebbling(format!(
                        "no strategy for {name} with {p} pebbles ({reason}) after {} relaxations",
                        relaxations.len()
                    )));
                }
                warn!("{name}: pebbling with {p} pebbles failed ({reason}), relaxing to {}", p + 1);
                relaxations.push(Relaxation { pebbles: p, reason: reason.into() });
                p += 1;
            }
        }
    };

    let schedule = schedule_from_strategy(net, &strategy)?;
    validate_schedule(&luts, &schedule, DEFAULT_VALIDATION_INPUTS)?;
    let circuit = synthesize_schedule(&schedule)?;
    let mut circuit_stats = circuit.stats();
    circuit_stats.stg_count = schedule.stg_count();
    circuit_stats.schedule_steps = schedule.steps.len();

    let verification = if cfg.verify && xag.input_count() <= cfg.verify_max_inputs {
        let report = verify_oracle(&circuit, &xag, VERIFY_TOLERANCE)?;
        Some(Verification {
            passed: report.passed(),
            cases: report.cases,
            max_deviation: report.max_deviation,
            failure: report.failure.map(|f| f.to_string()),
        })
    } else {
        if cfg.verify {
            warn!("{name}: {} inputs exceed the verification cap of {}", xag.input_count(), cfg.verify_max_inputs);
        }
        None
    };
    if cfg.record_time {
        circuit_stats.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    info!(
        "{name}: {} qubits, {} gates ({} LUTs, {:?})",
        circuit_stats.qubits,
        circuit_stats.total_gates,
        luts.lut_count(),
        start.elapsed()
    );

    let stats = FlowStats {
        name,
        inputs: schedule.inputs,
        outputs: schedule.outputs,
        ancillas: schedule.ancillas,
        mapper: cfg.mapper.mode,
        k: cfg.mapper.k,
        priority_cuts: cfg.mapper.priority_cuts,
        xor_blocks_enabled: cfg.mapper.xor_blocks,
        luts: luts.lut_count(),
        xor_blocks: luts.xor_block_count(),
        lut_cost: luts.total_cost(),
        strategy: cfg.strategy,
        bennett_ancillas,
        pebble_budget: requested,
        final_pebble_budget: final_budget,
        relaxations,
        sat_calls,
        sat_conflicts,
        circuit: circuit_stats,
        verification,
    };
    Ok(FlowOutput { stats, luts, strategy, schedule, circuit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::Family;

    fn addassoc2() -> FlowConfig {
        FlowConfig::new(InputSource::Benchmark(BenchmarkSpec::new(Family::AddAssoc, 2)))
            .with_mapper(MapperConfig::spectral(4))
            .with_verify(true)
    }

    #[test]
    fn budget_parsing() {
        assert_eq!("7".parse::<PebbleBudget>().unwrap(), PebbleBudget::Absolute(7));
        assert_eq!("bennett-2".parse::<PebbleBudget>().unwrap(), PebbleBudget::BennettMinus(2));
        assert_eq!("bennett".parse::<PebbleBudget>().unwrap(), PebbleBudget::BennettMinus(0));
        assert!("bennett+1".parse::<PebbleBudget>().is_err());
        assert_eq!(PebbleBudget::BennettMinus(3).to_string(), "bennett-3");
        assert_eq!(PebbleBudget::BennettMinus(3).resolve(2), 0);
    }

    #[test]
    fn budget_needs_pebble_strategy() {
        let mut cfg = addassoc2();
        cfg.pebbles = Some(PebbleBudget::Absolute(3));
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn bennett_run_counts_qubits_from_the_cover() {
        let out = run_flow(&addassoc2()).unwrap();
        let s = &out.stats;
        assert!(s.verified_ok(), "{s:?}");
        assert_eq!(s.inputs, 6);
        assert_eq!(s.outputs, 1);
        assert_eq!(s.circuit.qubits, 7 + out.schedule.network.non_output_count());
        assert_eq!(s.circuit.total_gates, s.circuit.cnot_count + s.circuit.rz_count + s.circuit.h_count);
        assert!(s.relaxations.is_empty());
        assert_eq!(s.circuit.wall_time_ms, None);
    }

    #[test]
    fn pebbling_trades_gates_for_qubits() {
        let bennett = run_flow(&addassoc2()).unwrap().stats;
        let pebbled = run_flow(&addassoc2().pebble(PebbleBudget::BennettMinus(1))).unwrap().stats;
        assert!(pebbled.relaxations.is_empty());
        assert!(pebbled.verified_ok());
        assert!(pebbled.circuit.qubits < bennett.circuit.qubits);
        assert!(pebbled.circuit.total_gates >= bennett.circuit.total_gates);
    }

    #[test]
    fn spectral_mapping_uses_fewer_rotations() {
        let spectral = run_flow(&addassoc2()).unwrap().stats;
        let baseline = run_flow(&addassoc2().with_mapper(MapperConfig::baseline(4))).unwrap().stats;
        assert!(spectral.circuit.rz_count <= baseline.circuit.rz_count);
    }

    #[test]
    fn stats_json_round_trips() {
        let out = run_flow(&addassoc2()).unwrap();
        let json = out.stats.to_json();
        let back: FlowStats = serde_json::from_str(&json).unwrap();
        assert_eq!(back, out.stats);
        assert!(json.contains("\"strategy\": \"bennett\""));
    }

    #[test]
    fn infeasible_budget_is_relaxed_and_logged() {
        let cfg = addassoc2();
        let (_, xag) = cfg.source.load().unwrap();
        let luts = map_to_luts(&detect_xor(&xag), &cfg.mapper).unwrap();
        let dag = RevNetwork::lower(&luts).unwrap().dag();
        // one below the widest single move can never work
        let p = PebblingInstance::new(dag, 0).min_pebbles() - 1;
        let out = run_flow(&cfg.pebble(PebbleBudget::Absolute(p))).unwrap();
        let s = &out.stats;
        assert_eq!(s.relaxations[0], Relaxation { pebbles: p, reason: "unsat".into() });
        assert_eq!(s.final_pebble_budget, Some(p + s.relaxations.len()));
        assert!(s.ancillas <= p + s.relaxations.len());
        assert!(s.verified_ok());
    }

    #[test]
    fn unreachable_budget_fails_after_relaxing() {
        let mut cfg = addassoc2().pebble(PebbleBudget::Absolute(0));
        cfg.max_relaxations = 1;
        match run_flow(&cfg) {
            Err(Error::Pebbling(msg)) => assert!(msg.contains("after 1 relaxations"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
