//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::collections::{HashMap, HashSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use qoracle::bench::{BenchmarkSpec, Family};
use qoracle::flow::{run_flow, FlowConfig, InputSource, PebbleBudget};
use qoracle::gray::{synthesize_stg, synthesize_xor_block};
use qoracle::mapper::{LutFunction, MapperConfig};
use qoracle::matrix::{run_matrix, MatrixConfig, MatrixResult, Mode};
use qoracle::pebbling::sat::{sat_solve, SatResult};
use qoracle::pebbling::{encode, solve, MoveMode, PebblingDag, PebblingInstance, PebblingStrategy, SolveResult};
use qoracle::qcirc::{build_unitary, simulate_statevector, Gate, QuantumCircuit};
use qoracle::reversible::SingleTargetGate;
use qoracle::spectral::{walsh_spectrum, TruthTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_table(rng: &mut ChaCha8Rng, n: usize) -> TruthTable {
    let mut t = TruthTable::zero(n);
    for x in 0..1 << n {
        t.set(x, rng.gen_bool(0.5));
    }
    t
}

/// Dense Hadamard-matrix product over the +-1 encoding of `f`.
fn spectrum_by_matrix(f: &TruthTable) -> Vec<i32> {
    let size = 1usize << f.vars();
    (0..size)
        .map(|w| {
            (0..size)
                .map(|x| {
                    let h = if (w & x).count_ones() % 2 == 0 { 1 } else { -1 };
                    let fx = if f.get(x) { -1 } else { 1 };
                    h * fx
                })
                .sum()
        })
        .collect()
}

fn spectrum_exactness() -> Outcome {
    let start = Instant::now();
    let maj = TruthTable::from_u64(3, 0xE8);
    let s = walsh_spectrum(&maj);
    check(s.coeffs() == [0, 4, 4, 0, 4, 0, 0, -4], || format!("majority spectrum {:?}", s.coeffs()))?;
    for bits in 0..256u64 {
        let f = TruthTable::from_u64(3, bits);
        check(walsh_spectrum(&f).coeffs() == spectrum_by_matrix(&f), || format!("3-var function {bits:#04x}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let f = random_table(&mut rng, 4);
        check(walsh_spectrum(&f).coeffs() == spectrum_by_matrix(&f), || format!("4-var function {}", f.to_hex()))?;
    }
    let elapsed = start.elapsed();
    check(elapsed.as_secs_f64() < 5.0, || format!("took {elapsed:?}"))?;
    Ok(format!("majority exact, 256 + 10000 functions match the matrix product in {elapsed:.2?}"))
}

/// Truth-table index of the controls: control 0 is the most significant bit.
fn control_index(basis: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, i| acc | (basis >> i & 1) << (n - 1 - i))
}

/// Largest elementwise gap between `u` and `phase * P_f`, with the phase
/// taken from the first column.
fn permutation_gap(u: &[Complex64], f: &TruthTable) -> f64 {
    let n = f.vars();
    let dim = 1usize << (n + 1);
    let image = |c: usize| c ^ (usize::from(f.get(control_index(c, n))) << n);
    let phase = u[image(0) * dim];
    let mut worst = (phase.norm() - 1.0).abs();
    for c in 0..dim {
        for r in 0..dim {
            let expected = if r == image(c) { phase } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((u[r * dim + c] - expected).norm());
        }
    }
    worst
}

fn gray_check(f: &TruthTable) -> Result<(), String> {
    let n = f.vars();
    let stg = SingleTargetGate::new((0..n).collect(), LutFunction::Table(f.clone()), n).map_err(|e| e.to_string())?;
    let gates = synthesize_stg(&stg).map_err(|e| e.to_string())?;
    let mut c = QuantumCircuit::new(n + 1, 0, 0);
    c.extend(gates).map_err(|e| e.to_string())?;
    let u = build_unitary(&c).map_err(|e| e.to_string())?;
    let gap = permutation_gap(&u, f);
    check(gap < 1e-9, || format!("{}: deviation {gap:e}", f.to_hex()))?;
    let rz = c.stats().rz_count;
    let nnz = walsh_spectrum(f).nonzero_count();
    check(rz <= 2 * nnz + 1, || format!("{}: {rz} rotations for {nnz} nonzero coefficients", f.to_hex()))
}

fn gray_synthesis() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for n in 1..=2 {
        for bits in 0..1u64 << (1 << n) {
            gray_check(&TruthTable::from_u64(n, bits))?;
            count += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 3..=5 {
        for _ in 0..200 {
            gray_check(&random_table(&mut rng, n))?;
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed.as_secs_f64() < 60.0, || format!("took {elapsed:?}"))?;
    Ok(format!("{count} control functions exact up to global phase in {elapsed:.2?}"))
}

fn xor_block_cost() -> Outcome {
    for m in 2..=10 {
        let gates = synthesize_xor_block(&(0..m).collect::<Vec<_>>(), false, m);
        let cx = gates.iter().filter(|g| matches!(g, Gate::Cx { .. })).count();
        let rz = gates.iter().filter(|g| matches!(g, Gate::Rz { .. })).count();
        check(cx == m && rz == 0 && gates.len() == m, || format!("m={m}: {cx} CNOT, {rz} Rz"))?;
        let mut c = QuantumCircuit::new(m, 0, 1);
        c.extend(gates).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
        for _ in 0..8 {
            let x: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.5)).collect();
            let mut basis = x.clone();
            basis.push(false);
            let state = simulate_statevector(&c, &basis).map_err(|e| e.to_string())?;
            let parity = x.iter().filter(|&&b| b).count() % 2 == 1;
            let index = x.iter().enumerate().fold(0usize, |a, (i, &b)| a | usize::from(b) << i) | usize::from(parity) << m;
            check((state[index].norm() - 1.0).abs() < 1e-12, || format!("m={m}: wrong parity for {x:?}"))?;
        }
    }
    Ok("m CNOTs and no rotations for m = 2..10, parity verified".into())
}

/// Shortest move count reaching "exactly the outputs pebbled" with at most
/// `budget` non-output pebbles, one move at a time, plus the number of
/// reachable states.
fn bfs_pebbling(preds: &[Vec<usize>], outputs: &[bool], budget: usize) -> (Option<usize>, usize) {
    let n = preds.len();
    let goal: u32 = (0..n).filter(|&v| outputs[v]).map(|v| 1 << v).sum();
    let inner: u32 = (0..n).filter(|&v| !outputs[v]).map(|v| 1 << v).sum();
    let mut dist = HashMap::from([(0u32, 0usize)]);
    let mut queue = VecDeque::from([0u32]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        if s == goal {
            return (Some(d), dist.len());
        }
        for (v, p) in preds.iter().enumerate() {
            if p.iter().all(|&u| s >> u & 1 == 1) {
                let t = s ^ 1 << v;
                if (t & inner).count_ones() as usize <= budget && !dist.contains_key(&t) {
                    dist.insert(t, d + 1);
                    queue.push_back(t);
                }
            }
        }
    }
    (None, dist.len())
}

/// Independent strategy checker; returns the peak non-output pebble count.
fn replay(preds: &[Vec<usize>], outputs: &[bool], s: &PebblingStrategy) -> Result<usize, String> {
    let mut on = vec![false; preds.len()];
    let (mut count, mut peak) = (0usize, 0usize);
    for (i, m) in s.moves.iter().enumerate() {
        if on[m.node] == m.pebble || preds[m.node].iter().any(|&u| !on[u]) {
            return Err(format!("move {i} ({}) is illegal in {s}", m.node));
        }
        on[m.node] = m.pebble;
        if !outputs[m.node] {
            if m.pebble {
                count += 1;
            } else {
                count -= 1;
            }
        }
        peak = peak.max(count);
    }
    if on != outputs {
        return Err(format!("{s} does not end with exactly the outputs pebbled"));
    }
    Ok(peak)
}

/// Smallest bit pattern over all relabelings, so isomorphic DAGs share a key.
fn canonical(preds: &[Vec<usize>], outputs: &[bool], perms: &[Vec<usize>]) -> u64 {
    let n = preds.len();
    perms
        .iter()
        .map(|p| {
            let mut key = 0u64;
            for v in 0..n {
                for &u in &preds[v] {
                    key |= 1 << (p[u] * n + p[v]);
                }
                if outputs[v] {
                    key |= 1 << (n * n + p[v]);
                }
            }
            key
        })
        .min()
        .unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// DAGs on up to six nodes, one per isomorphism class. Up to four nodes
/// every non-empty output set is tried; above that the sinks are outputs.
fn small_dags() -> Vec<(Vec<Vec<usize>>, Vec<bool>)> {
    let mut out = Vec::new();
    for n in 1..=6usize {
        let perms = permutations(n);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|v| (0..v).map(move |u| (u, v))).collect();
        let mut seen = HashSet::new();
        for mask in 0u32..1 << pairs.len() {
            let mut preds = vec![Vec::new(); n];
            for (i, &(u, v)) in pairs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    preds[v].push(u);
                }
            }
            let sinks: Vec<bool> = (0..n).map(|v| !preds.iter().any(|p| p.contains(&v))).collect();
            let output_sets: Vec<Vec<bool>> = if n <= 4 {
                (1u32..1 << n).map(|o| (0..n).map(|v| o >> v & 1 == 1).collect()).collect()
            } else {
                vec![sinks]
            };
            for outputs in output_sets {
                if seen.insert(canonical(&preds, &outputs, &perms)) {
                    out.push((preds.clone(), outputs));
                }
            }
        }
    }
    out
}

fn pebbling_soundness() -> Outcome {
    let start = Instant::now();
    let chain = PebblingDag::chain(3);
    match solve(&PebblingInstance::new(chain, 2)).map_err(|e| e.to_string())?.result {
        SolveResult::Strategy(s) => check(s.step_count() == 5, || format!("3-chain at P=2 took {s}"))?,
        other => return Err(format!("3-chain at P=2: {other:?}")),
    }
    let dags = small_dags();
    let (mut checks, mut strategies) = (0usize, 0usize);
    for (preds, outputs) in &dags {
        let n = preds.len();
        let dag = PebblingDag::new(preds.clone(), outputs.clone()).map_err(|e| e.to_string())?;
        let inner = outputs.iter().filter(|&&o| !o).count();
        for p in 0..=inner {
            let (expected, reached) = bfs_pebbling(preds, outputs, p);
            // a shortest path never repeats a state, so this many steps suffice
            let horizon = reached.max(2);
            let modes: &[MoveMode] =
                if n <= 4 { &[MoveMode::Parallel, MoveMode::Sequential] } else { &[MoveMode::Parallel] };
            for &mode in modes {
                let enc = encode(&dag, p, horizon, mode);
                let feasible = matches!(sat_solve(&enc.cnf, None), SatResult::Sat(_));
                checks += 1;
                check(feasible == expected.is_some(), || {
                    format!("{preds:?} outputs {outputs:?} P={p} {mode:?}: SAT says {feasible}, BFS says {expected:?}")
                })?;
                if let Some(best) = expected {
                    let inst = PebblingInstance::new(dag.clone(), p)
                        .with_max_steps(horizon)
                        .with_conflict_limit(None)
                        .with_moves(mode);
                    let sol = solve(&inst).map_err(|e| e.to_string())?;
                    let SolveResult::Strategy(s) = sol.result else {
                        return Err(format!("{preds:?} P={p} {mode:?}: solve returned {:?}", sol.result));
                    };
                    let peak = replay(preds, outputs, &s)?;
                    check(peak <= p && s.step_count() >= best, || {
                        format!("{preds:?} P={p}: {s} peaks at {peak}, BFS optimum {best} moves")
                    })?;
                    strategies += 1;
                }
            }
        }
    }
    Ok(format!(
        "{} DAGs, {checks} feasibility checks agree with BFS, {strategies} strategies replayed, 3-chain P=2 in 5 moves ({:.2?})",
        dags.len(),
        start.elapsed()
    ))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    for family in Family::ALL {
        let spec = BenchmarkSpec::new(family, 2).with_faults(1);
        let base = FlowConfig::new(InputSource::Benchmark(spec)).with_mapper(MapperConfig::spectral(4)).with_verify(true);
        for cfg in [base.clone().bennett(), base.pebble(PebbleBudget::BennettMinus(1))] {
            let out = run_flow(&cfg).map_err(|e| format!("{}: {e}", spec.name()))?;
            let v = out.stats.verification.as_ref().ok_or("verification skipped")?;
            check(v.passed && v.max_deviation < 1e-7 && v.cases == 1 << 7, || {
                format!("{} {}: {v:?}", spec.name(), cfg.strategy)
            })?;
            lines.push(format!("{}/{}", spec.name(), cfg.strategy));
        }
    }
    let elapsed = start.elapsed();
    check(elapsed.as_secs_f64() < 120.0, || format!("took {elapsed:?}"))?;
    Ok(format!("{} oracles verified on all 128 basis pairs in {elapsed:.2?}", lines.len()))
}

fn matrix_config() -> MatrixConfig {
    let mut specs = Vec::new();
    for w in [2, 3, 4] {
        for f in Family::ALL {
            specs.push(BenchmarkSpec::new(f, w));
        }
    }
    MatrixConfig::new(specs)
}

fn directional(m: &MatrixResult) -> Outcome {
    let mut problems = Vec::new();
    let mut matched = 0;
    for row in &m.rows {
        if let Some(c) = row.cells.iter().find(|c| !c.ok()) {
            problems.push(format!("{} {}: {}", row.benchmark, c.mode, c.error.as_deref().unwrap_or("")));
            continue;
        }
        let mb = row.cell(Mode::BaselineBennett);
        let sb = row.cell(Mode::SpectralBennett);
        let mp = row.cell(Mode::BaselinePebble);
        let q = row.cell(Mode::SpectralMatchQubits);
        if !(sb.gates < mb.gates && sb.qubits >= mb.qubits) {
            problems.push(format!(
                "(a) {}: S/B {}q/{}g vs M/B {}q/{}g",
                row.benchmark, sb.qubits, sb.gates, mb.qubits, mb.gates
            ));
        }
        if !(mp.qubits < mb.qubits && mp.gates >= mb.gates) {
            problems.push(format!(
                "(b) {}: M/P {}q/{}g vs M/B {}q/{}g",
                row.benchmark, mp.qubits, mp.gates, mb.qubits, mb.gates
            ));
        }
        if q.qubits <= mb.qubits && q.gates < mb.gates {
            matched += 1;
        }
    }
    let share = matched as f64 / m.rows.len().max(1) as f64;
    if share < 0.8 {
        problems.push(format!("(c) S/P_match_q wins {matched}/{} cells", m.rows.len()));
    }
    let relaxed: usize = m.rows.iter().flat_map(|r| &r.cells).map(|c| c.relaxations.len()).sum();
    if problems.is_empty() {
        Ok(format!(
            "S/B and M/P directions hold in all {} cells; S/P_match_q wins {matched}/{} ({relaxed} relaxations logged)",
            m.rows.len(),
            m.rows.len()
        ))
    } else {
        Err(problems.join("; "))
    }
}

fn performance(m: &MatrixResult) -> Outcome {
    let worst = m.max_wall_ms();
    check(worst < 60_000, || format!("slowest run took {worst} ms"))?;
    Ok(format!("slowest single synthesis run {worst} ms"))
}

fn determinism(first: &MatrixResult) -> Outcome {
    let second = run_matrix(&matrix_config());
    check(first.to_markdown() == second.to_markdown(), || "Markdown tables differ".into())?;
    check(first.to_csv() == second.to_csv(), || "CSV tables differ".into())?;
    let mut runs = 0;
    for spec in &matrix_config().benchmarks {
        for mapper in [MapperConfig::baseline(4), MapperConfig::spectral(4)] {
            let base = FlowConfig::new(InputSource::Benchmark(*spec)).with_mapper(mapper);
            for cfg in [base.clone().bennett(), base.pebble(PebbleBudget::BennettMinus(1))] {
                let a = run_flow(&cfg).map_err(|e| e.to_string())?;
                let b = run_flow(&cfg).map_err(|e| e.to_string())?;
                check(a.qasm() == b.qasm() && a.stats.to_json() == b.stats.to_json(), || {
                    format!("{} {:?} {} differs between runs", spec.name(), cfg.mapper.mode, cfg.strategy)
                })?;
                runs += 1;
            }
        }
    }
    Ok(format!("matrix tables and {runs} QASM/stats pairs byte-identical across runs"))
}

fn run(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    match outcome {
        Ok(detail) => {
            println!("criterion {id} {name}: PASS - {detail}");
            true
        }
        Err(detail) => {
            println!("criterion {id} {name}: FAIL - {detail}");
            false
        }
    }
}

fn main() {
    let mut ok = true;
    ok &= run(1, "spectrum exactness", spectrum_exactness);
    ok &= run(2, "gray synthesis", gray_synthesis);
    ok &= run(3, "xor block cost", xor_block_cost);
    ok &= run(4, "pebbling soundness", pebbling_soundness);
    ok &= run(5, "end-to-end oracles", end_to_end);
    let matrix = run_matrix(&matrix_config());
    print!("{}", matrix.to_markdown());
    ok &= run(6, "directional trade-offs", || directional(&matrix));
    ok &= run(7, "performance envelope", || performance(&matrix));
    ok &= run(8, "determinism", || determinism(&matrix));
    if !ok {
        std::process::exit(1);
    }
}
