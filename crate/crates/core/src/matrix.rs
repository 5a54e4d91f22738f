//! Comparison grid over benchmarks and flow variants.

use std::fmt::{self, Write as _};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::BenchmarkSpec;
use crate::flow::{run_flow, FlowConfig, FlowStats, InputSource, PebbleBudget, Relaxation};
use crate::mapper::MapperConfig;
use crate::pebbling::DEFAULT_CONFLICT_LIMIT;

/// Mapper / clean-up combination of one column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// Baseline mapper, Bennett clean-up.
    #[serde(rename = "M/B")]
    BaselineBennett,
    /// Spectral mapper, Bennett clean-up.
    #[serde(rename = "S/B")]
    SpectralBennett,
    /// Spectral mapper, pebbled down to the qubits of `M/B`.
    #[serde(rename = "S/P_match_q")]
    SpectralMatchQubits,
    /// As `S/P_match_q`, then fewer pebbles while gates stay within `M/B`.
    #[serde(rename = "S/P_match_g")]
    SpectralMatchGates,
    /// Baseline mapper, pebbled below Bennett.
    #[serde(rename = "M/P")]
    BaselinePebble,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::BaselineBennett,
        Mode::SpectralBennett,
        Mode::SpectralMatchQubits,
        Mode::SpectralMatchGates,
        Mode::BaselinePebble,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Mode::BaselineBennett => "M/B",
            Mode::SpectralBennett => "S/B",
            Mode::SpectralMatchQubits => "S/P_match_q",
            Mode::SpectralMatchGates => "S/P_match_g",
            Mode::BaselinePebble => "M/P",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixConfig {
    pub benchmarks: Vec<BenchmarkSpec>,
    pub k: usize,
    pub priority_cuts: usize,
    /// `M/P` runs with Bennett's ancillae minus this.
    pub baseline_pebble_delta: usize,
    pub conflict_limit: Option<u64>,
    pub max_steps: Option<usize>,
    pub max_relaxations: usize,
    pub verify: bool,
}

impl MatrixConfig {
    pub fn new(benchmarks: Vec<BenchmarkSpec>) -> Self {
        let mapper = MapperConfig::default();
        Self {
            benchmarks,
            k: mapper.k,
            priority_cuts: mapper.priority_cuts,
            baseline_pebble_delta: 1,
            conflict_limit: Some(DEFAULT_CONFLICT_LIMIT),
            max_steps: None,
            max_relaxations: crate::flow::DEFAULT_MAX_RELAXATIONS,
            verify: false,
        }
    }

    fn flow(&self, spec: BenchmarkSpec, spectral: bool) -> FlowConfig {
        let mapper = if spectral { MapperConfig::spectral(self.k) } else { MapperConfig::baseline(self.k) };
        let mut cfg = FlowConfig::new(InputSource::Benchmark(spec))
            .with_mapper(mapper.with_priority_cuts(self.priority_cuts))
            .with_verify(self.verify);
        cfg.conflict_limit = self.conflict_limit;
        cfg.max_steps = self.max_steps;
        cfg.max_relaxations = self.max_relaxations;
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mode: Mode,
    pub qubits: usize,
    pub gates: usize,
    pub cnots: usize,
    pub rotations: usize,
    pub luts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pebbles: Option<usize>,
    pub relaxations: Vec<Relaxation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Slowest single synthesis run behind this cell. Not rendered.
    #[serde(skip)]
    pub wall_ms: u64,
}

impl Cell {
    fn from_stats(mode: Mode, s: &FlowStats, wall_ms: u64) -> Self {
        Self {
            mode,
            qubits: s.circuit.qubits,
            gates: s.circuit.total_gates,
            cnots: s.circuit.cnot_count,
            rotations: s.circuit.rz_count,
            luts: s.luts,
            pebbles: s.final_pebble_budget,
            relaxations: s.relaxations.clone(),
            verified: s.verification.as_ref().map(|v| v.passed),
            error: None,
            wall_ms,
        }
    }

    fn failed(mode: Mode, error: String, wall_ms: u64) -> Self {
        Self {
            mode,
            qubits: 0,
            gates: 0,
            cnots: 0,
            rotations: 0,
            luts: 0,
            pebbles: None,
            relaxations: Vec::new(),
            verified: None,
            error: Some(error),
            wall_ms,
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub benchmark: String,
    /// In [`Mode::ALL`] order.
    pub cells: Vec<Cell>,
}

impl MatrixRow {
    pub fn cell(&self, mode: Mode) -> &Cell {
        &self.cells[Mode::ALL.iter().position(|&m| m == mode).unwrap()]
    }
}

/// Mean relative change of one mode against `M/B`, in percent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: Mode,
    pub cells: usize,
    pub qubits_pct: f64,
    pub gates_pct: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatrixResult {
    pub rows: Vec<MatrixRow>,
}

fn timed(cfg: &FlowConfig) -> (crate::Result<FlowStats>, u64) {
    let t = Instant::now();
    let r = run_flow(cfg).map(|o| o.stats);
    (r, t.elapsed().as_millis() as u64)
}

fn cell(mode: Mode, run: (crate::Result<FlowStats>, u64)) -> Cell {
    match run {
        (Ok(s), ms) => Cell::from_stats(mode, &s, ms),
        (Err(e), ms) => Cell::failed(mode, e.to_string(), ms),
    }
}

fn run_row(cfg: &MatrixConfig, spec: BenchmarkSpec) -> MatrixRow {
    let mb = timed(&cfg.flow(spec, false));
    let sb = timed(&cfg.flow(spec, true));
    let mp = timed(&cfg.flow(spec, false).pebble(PebbleBudget::BennettMinus(cfg.baseline_pebble_delta)));

    let (match_q, match_g) = match &mb.0 {
        Ok(base) => {
            let q = timed(&cfg.flow(spec, true).pebble(PebbleBudget::Absolute(base.ancillas)));
            let mut g = match &q.0 {
                Ok(s) => Cell::from_stats(Mode::SpectralMatchGates, s, q.1),
                Err(e) => Cell::failed(Mode::SpectralMatchGates, e.to_string(), q.1),
            };
            if let Ok(s) = &q.0 {
                if s.circuit.total_gates <= base.circuit.total_gates {
                    let mut p = s.final_pebble_budget.unwrap_or(0);
                    while p > 0 {
                        p -= 1;
                        let mut f = cfg.flow(spec, true).pebble(PebbleBudget::Absolute(p));
                        f.max_relaxations = 0;
                        match timed(&f) {
                            (Ok(t), ms) if t.circuit.total_gates <= base.circuit.total_gates => {
                                g = Cell::from_stats(Mode::SpectralMatchGates, &t, ms.max(g.wall_ms));
                            }
                            (_, ms) => {
                                g.wall_ms = g.wall_ms.max(ms);
                                break;
                            }
                        }
                    }
                }
            }
            (cell(Mode::SpectralMatchQubits, q), g)
        }
        Err(e) => {
            let msg = format!("M/B failed: {e}");
            (Cell::failed(Mode::SpectralMatchQubits, msg.clone(), 0), Cell::failed(Mode::SpectralMatchGates, msg, 0))
        }
    };
    MatrixRow {
        benchmark: spec.name(),
        cells: vec![cell(Mode::BaselineBennett, mb), cell(Mode::SpectralBennett, sb), match_q, match_g, cell(Mode::BaselinePebble, mp)],
    }
}

/// Runs every benchmark in parallel; rows come back in benchmark order.
pub fn run_matrix(cfg: &MatrixConfig) -> MatrixResult {
    let rows = cfg.benchmarks.par_iter().map(|&spec| run_row(cfg, spec)).collect();
    MatrixResult { rows }
}

impl MatrixResult {
    pub fn summary(&self) -> Vec<Summary> {
        Mode::ALL[1..]
            .iter()
            .map(|&mode| {
                let mut n = 0usize;
                let (mut dq, mut dg) = (0.0, 0.0);
                for row in &self.rows {
                    let (base, c) = (row.cell(Mode::BaselineBennett), row.cell(mode));
                    if base.ok() && c.ok() && base.qubits > 0 && base.gates > 0 {
                        n += 1;
                        dq += pct(c.qubits, base.qubits);
                        dg += pct(c.gates, base.gates);
                    }
                }
                let mean = |x: f64| if n == 0 { 0.0 } else { x / n as f64 };
                Summary { mode, cells: n, qubits_pct: mean(dq), gates_pct: mean(dg) }
            })
            .collect()
    }

    pub fn max_wall_ms(&self) -> u64 {
        self.rows.iter().flat_map(|r| r.cells.iter().map(|c| c.wall_ms)).max().unwrap_or(0)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| Benchmark |");
        for m in Mode::ALL {
            let _ = write!(out, " {m} qubits | {m} gates |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(2 * Mode::ALL.len()));
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "| {} |", row.benchmark);
            for c in &row.cells {
                match c.ok() {
                    true => {
                        let mark = if c.relaxations.is_empty() { "" } else { "*" };
                        let _ = write!(out, " {}{mark} | {} |", c.qubits, c.gates);
                    }
                    false => out.push_str(" fail | fail |"),
                }
            }
            out.push('\n');
        }
        if !self.rows.is_empty() {
            out.push('\n');
            out.push_str("| vs M/B | cells | qubits | gates |\n|---|---:|---:|---:|\n");
            for s in self.summary() {
                let _ = writeln!(out, "| {} | {} | {:+.2}% | {:+.2}% |", s.mode, s.cells, s.qubits_pct, s.gates_pct);
            }
            let notes: Vec<String> = self
                .rows
                .iter()
                .flat_map(|r| {
                    r.cells.iter().filter_map(move |c| {
                        if let Some(e) = &c.error {
                            Some(format!("- {} {}: {e}", r.benchmark, c.mode))
                        } else if !c.relaxations.is_empty() {
                            let steps: Vec<String> =
                                c.relaxations.iter().map(|x| format!("{} ({})", x.pebbles, x.reason)).collect();
                            Some(format!("- {} {}: relaxed from {}", r.benchmark, c.mode, steps.join(", ")))
                        } else {
                            None
                        }
                    })
                })
                .collect();
            if !notes.is_empty() {
                out.push_str("\n* pebble budget relaxed:\n");
                for n in notes {
                    out.push_str(&n);
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("benchmark,mode,qubits,gates,cnots,rotations,luts,pebbles,relaxations,verified,error\n");
        for row in &self.rows {
            for c in &row.cells {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    row.benchmark,
                    c.mode,
                    c.qubits,
                    c.gates,
                    c.cnots,
                    c.rotations,
                    c.luts,
                    c.pebbles.map_or(String::new(), |p| p.to_string()),
                    c.relaxations.len(),
                    c.verified.map_or(String::new(), |v| v.to_string()),
                    c.error.as_deref().unwrap_or("").replace(',', ";"),
                );
            }
        }
        for s in self.summary() {
            let _ = writeln!(out, "summary,{},{:.2},{:.2},,,,,,,{} cells", s.mode, s.qubits_pct, s.gates_pct, s.cells);
        }
        out
    }
}

fn pct(x: usize, base: usize) -> f64 {
    100.0 * (x as f64 - base as f64) / base as f64
}
