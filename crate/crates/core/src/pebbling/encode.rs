use log::debug;

use super::sat::{Cnf, Lit, SatResult, Solver};
use super::strategy::{Move, PebblingDag, PebblingStrategy};
use crate::error::{Error, Result};
use crate::reversible::validate_strategy;

pub const DEFAULT_CONFLICT_LIMIT: u64 = 50_000;

/// Steps added per deepening round. Beyond the outputs' single computes,
/// moves come in compute/uncompute pairs.
pub const DEEPENING_STRIDE: usize = 2;

/// Pebbling game under a budget. `pebbles` bounds the non-output nodes
/// pebbled at any time, i.e. the ancillae.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PebblingInstance {
    pub dag: PebblingDag,
    pub pebbles: usize,
    pub max_steps: usize,
    /// Per SAT call; `None` searches to completion.
    pub conflict_limit: Option<u64>,
    pub moves: MoveMode,
}

/// How many nodes may toggle in one time step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MoveMode {
    /// Any set of nodes whose predecessors stay pebbled across the step.
    #[default]
    Parallel,
    /// At most one node per step; steps equal moves.
    Sequential,
}

impl PebblingInstance {
    /// Step budget defaults to three times the Bennett move count.
    pub fn new(dag: PebblingDag, pebbles: usize) -> Self {
        let max_steps = 3 * dag.bennett_steps().max(1);
        Self { dag, pebbles, max_steps, conflict_limit: Some(DEFAULT_CONFLICT_LIMIT), moves: MoveMode::default() }
    }

    pub fn with_moves(mut self, moves: MoveMode) -> Self {
        self.moves = moves;
        self
    }

    /// Fewest steps any strategy needs: the Bennett move count when moves
    /// are sequential; otherwise computing and then clearing the longest
    /// chain of non-outputs that ends in an output.
    pub fn min_steps(&self) -> usize {
        match self.moves {
            MoveMode::Sequential => self.dag.bennett_steps(),
            MoveMode::Parallel => {
                let dag = &self.dag;
                let mut chain = vec![0usize; dag.len()];
                let mut longest = 0;
                for v in 0..dag.len() {
                    let below = dag.preds(v).iter().filter(|&&u| !dag.is_output(u)).map(|&u| chain[u]).max();
                    chain[v] = 1 + below.unwrap_or(0);
                    if dag.is_output(v) {
                        longest = longest.max(chain[v]);
                    }
                }
                (2 * longest).saturating_sub(1)
            }
        }
    }

    pub fn with_max_steps(mut self, steps: usize) -> Self {
        self.max_steps = steps;
        self
    }

    pub fn with_conflict_limit(mut self, limit: Option<u64>) -> Self {
        self.conflict_limit = limit;
        self
    }

    /// Fewest pebbles any single move needs: the node (unless an output)
    /// and its non-output predecessors.
    pub fn min_pebbles(&self) -> usize {
        let req = self.dag.required();
        (0..self.dag.len())
            .filter(|&v| req[v])
            .map(|v| {
                let preds = self.dag.preds(v).iter().filter(|&&u| !self.dag.is_output(u)).count();
                preds + usize::from(!self.dag.is_output(v))
            })
            .max()
            .unwrap_or(0)
    }
}

/// CNF for a fixed number of steps with the variable map needed to decode.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub cnf: Cnf,
    /// Required nodes; all others stay unpebbled.
    nodes: Vec<usize>,
    /// `state[t][i]`: node `nodes[i]` is pebbled after `t` moves.
    state: Vec<Vec<u32>>,
}

impl Encoding {
    pub fn steps(&self) -> usize {
        self.state.len() - 1
    }

    /// Reads the moves out of a model; idle steps are dropped. Within a
    /// step, removals come before placements so the count never peaks
    /// above either end of the step.
    pub fn decode(&self, model: &[bool]) -> PebblingStrategy {
        let mut moves = Vec::new();
        for t in 0..self.steps() {
            let mut on = Vec::new();
            for (i, &v) in self.nodes.iter().enumerate() {
                let (a, b) = (model[self.state[t][i] as usize], model[self.state[t + 1][i] as usize]);
                if a && !b {
                    moves.push(Move::off(v));
                } else if !a && b {
                    on.push(Move::on(v));
                }
            }
            moves.extend(on);
        }
        PebblingStrategy::new(moves)
    }
}

/// Encodes the game with `steps` time steps.
pub fn encode(dag: &PebblingDag, pebbles: usize, steps: usize, moves: MoveMode) -> Encoding {
    let req = dag.required();
    let nodes: Vec<usize> = (0..dag.len()).filter(|&v| req[v]).collect();
    let mut index = vec![usize::MAX; dag.len()];
    for (i, &v) in nodes.iter().enumerate() {
        index[v] = i;
    }
    let n = nodes.len();
    let mut cnf = Cnf::new();
    let state: Vec<Vec<u32>> = (0..=steps).map(|_| (0..n).map(|_| cnf.new_var()).collect()).collect();

    for i in 0..n {
        cnf.add_clause(&[Lit::neg(state[0][i])]);
        let last = Lit::new(state[steps][i], !dag.is_output(nodes[i]));
        cnf.add_clause(&[last]);
    }

    let counted: Vec<usize> = (0..n).filter(|&i| !dag.is_output(nodes[i])).collect();
    let mut active_prev: Option<u32> = None;
    for t in 0..steps {
        let (cur, next) = (&state[t], &state[t + 1]);
        let mut toggles = Vec::with_capacity(n);
        for (i, &v) in nodes.iter().enumerate() {
            let (a, b) = (cur[i], next[i]);
            // toggle <-> a xor b
            let c = cnf.new_var();
            cnf.add_clause(&[Lit::pos(a), Lit::neg(b), Lit::pos(c)]);
            cnf.add_clause(&[Lit::neg(a), Lit::pos(b), Lit::pos(c)]);
            cnf.add_clause(&[Lit::pos(a), Lit::pos(b), Lit::neg(c)]);
            cnf.add_clause(&[Lit::neg(a), Lit::neg(b), Lit::neg(c)]);
            toggles.push(Lit::pos(c));
            for &u in dag.preds(v) {
                let j = index[u];
                cnf.add_clause(&[Lit::neg(c), Lit::pos(cur[j])]);
                cnf.add_clause(&[Lit::neg(c), Lit::pos(next[j])]);
            }
            if dag.is_output(v) {
                cnf.add_clause(&[Lit::neg(a), Lit::pos(b)]);
            }
        }
        if moves == MoveMode::Sequential {
            at_most_one(&mut cnf, &toggles);
        }
        // idle steps only at the end
        let active = cnf.new_var();
        let mut any = vec![Lit::neg(active)];
        any.extend(&toggles);
        cnf.add_clause(&any);
        for &c in &toggles {
            cnf.add_clause(&[!c, Lit::pos(active)]);
        }
        if let Some(p) = active_prev {
            cnf.add_clause(&[Lit::neg(active), Lit::pos(p)]);
        }
        active_prev = Some(active);

        let pebbled: Vec<Lit> = counted.iter().map(|&i| Lit::pos(next[i])).collect();
        at_most_k(&mut cnf, &pebbled, pebbles);
    }
    Encoding { cnf, nodes, state }
}

/// Ladder encoding.
fn at_most_one(cnf: &mut Cnf, lits: &[Lit]) {
    if lits.len() < 2 {
        return;
    }
    let mut prev = cnf.new_var();
    cnf.add_clause(&[!lits[0], Lit::pos(prev)]);
    for &x in &lits[1..] {
        cnf.add_clause(&[!x, Lit::neg(prev)]);
        let a = cnf.new_var();
        cnf.add_clause(&[!x, Lit::pos(a)]);
        cnf.add_clause(&[Lit::neg(prev), Lit::pos(a)]);
        prev = a;
    }
}

/// Sequential counter over whichever of `lits` or their negations needs
/// fewer registers.
fn at_most_k(cnf: &mut Cnf, lits: &[Lit], k: usize) {
    let n = lits.len();
    if k >= n {
        return;
    }
    if k == 0 {
        for &x in lits {
            cnf.add_clause(&[!x]);
        }
        return;
    }
    if k <= n - k {
        counter_at_most(cnf, lits, k);
    } else {
        let negated: Vec<Lit> = lits.iter().map(|&x| !x).collect();
        counter_at_least(cnf, &negated, n - k);
    }
}

fn counter_at_most(cnf: &mut Cnf, x: &[Lit], k: usize) {
    let n = x.len();
    // r[i][j]: at least j+1 of x[0..=i] are true
    let r: Vec<Vec<u32>> = (0..n - 1).map(|_| (0..k).map(|_| cnf.new_var()).collect()).collect();
    cnf.add_clause(&[!x[0], Lit::pos(r[0][0])]);
    for &v in &r[0][1..] {
        cnf.add_clause(&[Lit::neg(v)]);
    }
    for i in 1..n - 1 {
        cnf.add_clause(&[!x[i], Lit::pos(r[i][0])]);
        cnf.add_clause(&[Lit::neg(r[i - 1][0]), Lit::pos(r[i][0])]);
        for j in 1..k {
            cnf.add_clause(&[!x[i], Lit::neg(r[i - 1][j - 1]), Lit::pos(r[i][j])]);
            cnf.add_clause(&[Lit::neg(r[i - 1][j]), Lit::pos(r[i][j])]);
        }
        cnf.add_clause(&[!x[i], Lit::neg(r[i - 1][k - 1])]);
    }
    cnf.add_clause(&[!x[n - 1], Lit::neg(r[n - 2][k - 1])]);
}

fn counter_at_least(cnf: &mut Cnf, y: &[Lit], m: usize) {
    let n = y.len();
    // r[i][j] only if at least j+1 of y[0..=i] are true
    let mut r: Vec<Vec<u32>> = Vec::with_capacity(n);
    for i in 0..n {
        let width = m.min(i + 1);
        let row: Vec<u32> = (0..width).map(|_| cnf.new_var()).collect();
        for (j, &v) in row.iter().enumerate() {
            let below = (i > 0 && j < r[i - 1].len()).then(|| Lit::pos(r[i - 1][j]));
            let mut with_y = vec![Lit::neg(v), y[i]];
            with_y.extend(below);
            cnf.add_clause(&with_y);
            if j > 0 {
                let mut with_prev = vec![Lit::neg(v), Lit::pos(r[i - 1][j - 1])];
                with_prev.extend(below);
                cnf.add_clause(&with_prev);
            }
        }
        r.push(row);
    }
    cnf.add_clause(&[Lit::pos(r[n - 1][m - 1])]);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Strategy(PebblingStrategy),
    Unsat,
    ConflictLimitHit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PebblingSolution {
    pub result: SolveResult,
    /// Peak non-output pebbles of the returned strategy.
    pub peak: usize,
    pub sat_calls: usize,
    pub conflicts: u64,
}

/// Iterative deepening on the step count from the Bennett move count, a
/// lower bound for every strategy, up to `max_steps`.
pub fn solve(inst: &PebblingInstance) -> Result<PebblingSolution> {
    let mut out = PebblingSolution { result: SolveResult::Unsat, peak: 0, sat_calls: 0, conflicts: 0 };
    if inst.pebbles < inst.min_pebbles() {
        return Ok(out);
    }
    let mut steps = inst.min_steps().max(1);
    while steps <= inst.max_steps {
        let enc = encode(&inst.dag, inst.pebbles, steps, inst.moves);
        let mut solver = Solver::new(enc.cnf.num_vars());
        let mut ok = true;
        for c in enc.cnf.clauses() {
            ok &= solver.add_clause(c);
        }
        let res = if ok { solver.solve(inst.conflict_limit) } else { SatResult::Unsat };
        out.sat_calls += 1;
        out.conflicts += solver.conflicts();
        debug!("pebbling P={} T={steps}: {:?} after {} conflicts", inst.pebbles, kind(&res), solver.conflicts());
        match res {
            SatResult::Sat(model) => {
                let strategy = prune(&inst.dag, enc.decode(&model), inst.pebbles);
                out.peak = validate_strategy(&inst.dag, &strategy, Some(inst.pebbles))
                    .map_err(|e| Error::Pebbling(format!("decoded strategy is invalid: {e}")))?;
                out.result = SolveResult::Strategy(strategy);
                return Ok(out);
            }
            SatResult::LimitHit => {
                out.result = SolveResult::ConflictLimitHit;
                return Ok(out);
            }
            SatResult::Unsat => steps += DEEPENING_STRIDE,
        }
    }
    Ok(out)
}

/// Drops pairs of moves on the same node that nothing in between relies
/// on: a pebble placed and removed with no successor moving meanwhile, or
/// removed and placed again when keeping it stays within `budget`.
pub fn prune(dag: &PebblingDag, strategy: PebblingStrategy, budget: usize) -> PebblingStrategy {
    let mut moves = strategy.moves;
    let mut succs = vec![Vec::new(); dag.len()];
    for v in 0..dag.len() {
        for &u in dag.preds(v) {
            succs[u].push(v);
        }
    }
    loop {
        let mut removed = false;
        let mut i = 0;
        while i < moves.len() {
            let v = moves[i].node;
            let Some(j) = (i + 1..moves.len()).find(|&j| moves[j].node == v) else {
                i += 1;
                continue;
            };
            let used = moves[i + 1..j].iter().any(|m| succs[v].contains(&m.node));
            let fits = moves[i].pebble || dag.is_output(v) || {
                let mut count = pebbles_before(dag, &moves, i);
                moves[i + 1..j].iter().all(|m| {
                    if !dag.is_output(m.node) {
                        if m.pebble {
                            count += 1;
                        } else {
                            count -= 1;
                        }
                    }
                    count < budget
                })
            };
            if !used && fits && moves[i].pebble != moves[j].pebble {
                moves.remove(j);
                moves.remove(i);
                removed = true;
            } else {
                i += 1;
            }
        }
        if !removed {
            return PebblingStrategy::new(moves);
        }
    }
}

fn pebbles_before(dag: &PebblingDag, moves: &[Move], i: usize) -> usize {
    let mut count = 0usize;
    for m in &moves[..=i] {
        if !dag.is_output(m.node) {
            if m.pebble {
                count += 1;
            } else {
                count -= 1;
            }
        }
    }
    count
}

fn kind(r: &SatResult) -> &'static str {
    match r {
        SatResult::Sat(_) => "sat",
        SatResult::Unsat => "unsat",
        SatResult::LimitHit => "limit",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pebbling::sat::sat_solve;

    fn strategy(inst: &PebblingInstance) -> PebblingStrategy {
        match solve(inst).unwrap().result {
            SolveResult::Strategy(s) => s,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_node() {
        let dag = PebblingDag::chain(1);
        let s = strategy(&PebblingInstance::new(dag.clone(), 1).with_max_steps(1));
        assert_eq!(s.to_string(), "+0");
        // outputs do not count against the budget
        assert_eq!(strategy(&PebblingInstance::new(dag, 0)).step_count(), 1);
    }

    #[test]
    fn three_chain_with_two_pebbles() {
        for mode in [MoveMode::Parallel, MoveMode::Sequential] {
            let inst = PebblingInstance::new(PebblingDag::chain(3), 2).with_moves(mode);
            let s = strategy(&inst);
            assert_eq!(s.step_count(), 5);
            assert_eq!(s.to_string(), "+0 +1 +2 -1 -0");
        }
    }

    #[test]
    fn step_lower_bounds() {
        let inst = PebblingInstance::new(PebblingDag::chain(4), 3);
        assert_eq!(inst.min_steps(), 7);
        assert_eq!(inst.clone().with_moves(MoveMode::Sequential).min_steps(), 7);
        // two independent leaves under one output
        let fork = PebblingDag::new(vec![vec![], vec![], vec![0, 1]], vec![false, false, true]).unwrap();
        let inst = PebblingInstance::new(fork, 2);
        assert_eq!(inst.min_steps(), 3);
        assert_eq!(strategy(&inst).step_count(), 5);
    }

    #[test]
    fn prune_drops_idle_pebbles() {
        let dag = PebblingDag::chain(3);
        let s = PebblingStrategy::from_text("+0\n+1\n-1\n+1\n+2\n-1\n+1\n-1\n-0\n").unwrap();
        assert_eq!(prune(&dag, s, 2).to_string(), "+0 +1 +2 -1 -0");
        // an extra pebble that would exceed the budget while kept is not merged
        let s = PebblingStrategy::from_text("+0\n+1\n-0\n+2\n+0\n-1\n-0\n").unwrap();
        assert_eq!(prune(&dag, s.clone(), 1).to_string(), s.to_string());
    }

    #[test]
    fn three_chain_with_one_pebble_is_unsat() {
        for t in [5, 7, 11, 21] {
            for mode in [MoveMode::Parallel, MoveMode::Sequential] {
                let enc = encode(&PebblingDag::chain(3), 1, t, mode);
                assert_eq!(sat_solve(&enc.cnf, None), SatResult::Unsat);
            }
        }
        let inst = PebblingInstance::new(PebblingDag::chain(3), 1);
        assert_eq!(solve(&inst).unwrap().result, SolveResult::Unsat);
    }

    #[test]
    fn long_chain_recomputes_under_a_tight_budget() {
        // 7-node chain: Bennett needs 6 ancillae, 4 suffice with recomputation
        let dag = PebblingDag::chain(7);
        let inst = PebblingInstance::new(dag.clone(), 4).with_conflict_limit(None).with_moves(MoveMode::Sequential);
        let sol = solve(&inst).unwrap();
        let SolveResult::Strategy(s) = sol.result else { panic!("{sol:?}") };
        assert!(sol.peak <= 4);
        assert!(s.step_count() > dag.bennett_steps());
        validate_strategy(&dag, &s, Some(4)).unwrap();
    }

    #[test]
    fn min_pebbles_counts_widest_move() {
        let dag = PebblingDag::new(vec![vec![], vec![], vec![0, 1], vec![2]], vec![false, false, false, true]).unwrap();
        let inst = PebblingInstance::new(dag, 2);
        assert_eq!(inst.min_pebbles(), 3);
        assert_eq!(solve(&inst).unwrap().result, SolveResult::Unsat);
    }

    #[test]
    fn cardinality_encodings_agree_with_counting() {
        for n in 1..=6usize {
            for k in 0..=n {
                for bits in 0u32..1 << n {
                    let mut cnf = Cnf::new();
                    let vars: Vec<u32> = (0..n).map(|_| cnf.new_var()).collect();
                    let lits: Vec<Lit> = vars.iter().map(|&v| Lit::pos(v)).collect();
                    at_most_k(&mut cnf, &lits, k);
                    for (i, &v) in vars.iter().enumerate() {
                        cnf.add_clause(&[Lit::new(v, bits >> i & 1 == 0)]);
                    }
                    let sat = matches!(sat_solve(&cnf, None), SatResult::Sat(_));
                    assert_eq!(sat, bits.count_ones() as usize <= k, "n={n} k={k} bits={bits:b}");
                }
            }
        }
    }

    #[test]
    fn at_most_one_forbids_pairs() {
        for n in 1..=5usize {
            for bits in 0u32..1 << n {
                let mut cnf = Cnf::new();
                let vars: Vec<u32> = (0..n).map(|_| cnf.new_var()).collect();
                let lits: Vec<Lit> = vars.iter().map(|&v| Lit::pos(v)).collect();
                at_most_one(&mut cnf, &lits);
                for (i, &v) in vars.iter().enumerate() {
                    cnf.add_clause(&[Lit::new(v, bits >> i & 1 == 0)]);
                }
                let sat = matches!(sat_solve(&cnf, None), SatResult::Sat(_));
                assert_eq!(sat, bits.count_ones() <= 1);
            }
        }
    }
}
