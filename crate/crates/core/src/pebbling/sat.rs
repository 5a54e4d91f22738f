//! Conflict-driven clause-learning SAT solver and CNF plumbing.
//!
//! Two watched literals, VSIDS branching, first-UIP learning with local
//! minimization, phase saving and Luby restarts. The search is fully
//! deterministic: no randomness and no hashing on the hot path.

use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;

use crate::error::{Error, Result};

/// Literal: `2 * var + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(var: u32) -> Self {
        Lit(var << 1)
    }

    pub fn neg(var: u32) -> Self {
        Lit(var << 1 | 1)
    }

    pub fn new(var: u32, negated: bool) -> Self {
        Lit(var << 1 | u32::from(negated))
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    fn index(self) -> usize {
        self.0 as usize
    }

    /// DIMACS integer (1-based, negative for negated).
    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var()) + 1;
        if self.is_neg() {
            -v
        } else {
            v
        }
    }

    pub fn from_dimacs(x: i64) -> Self {
        let var = (x.unsigned_abs() - 1) as u32;
        Lit::new(var, x < 0)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

/// Clause list over variables `0..num_vars`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self) -> u32 {
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn add_clause(&mut self, lits: &[Lit]) {
        for l in lits {
            self.num_vars = self.num_vars.max(l.var() + 1);
        }
        self.clauses.push(lits.to_vec());
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{} ", l.to_dimacs());
            }
            out.push_str("0\n");
        }
        out
    }

    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut cnf = Cnf::new();
        let mut current = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
                continue;
            }
            if let Some(rest) = t.strip_prefix("p cnf") {
                let nv: u32 = rest
                    .split_whitespace()
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse { line: i + 1, message: "malformed header".into() })?;
                cnf.num_vars = cnf.num_vars.max(nv);
                continue;
            }
            for tok in t.split_whitespace() {
                let x: i64 =
                    tok.parse().map_err(|_| Error::Parse { line: i + 1, message: format!("bad literal '{tok}'") })?;
                if x == 0 {
                    cnf.add_clause(&current);
                    current.clear();
                } else {
                    current.push(Lit::from_dimacs(x));
                }
            }
        }
        if !current.is_empty() {
            cnf.add_clause(&current);
        }
        Ok(cnf)
    }

    /// Whether `model` satisfies every clause.
    pub fn check(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| model.get(l.var() as usize).is_some_and(|&v| v != l.is_neg())))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Vec<bool>),
    Unsat,
    LimitHit,
}

/// Solves `cnf`, giving up after `conflict_limit` conflicts.
pub fn sat_solve(cnf: &Cnf, conflict_limit: Option<u64>) -> SatResult {
    let mut s = Solver::new(cnf.num_vars());
    for c in cnf.clauses() {
        if !s.add_clause(c) {
            return SatResult::Unsat;
        }
    }
    s.solve(conflict_limit)
}

/// Runs an external DIMACS solver (`program args.. file`) and reads its
/// `s`/`v` lines.
pub fn solve_external(cnf: &Cnf, program: &str, args: &[String], work_dir: &Path) -> Result<SatResult> {
    let path = work_dir.join(format!("pebbling-{}-{}.cnf", std::process::id(), cnf.clauses.len()));
    std::fs::write(&path, cnf.to_dimacs())?;
    let output = Command::new(program).args(args).arg(&path).output();
    let _ = std::fs::remove_file(&path);
    let output = output?;
    let text = String::from_utf8_lossy(&output.stdout);
    let mut model = vec![false; cnf.num_vars() as usize];
    let mut status = None;
    for line in text.lines() {
        let t = line.trim();
        if let Some(s) = t.strip_prefix("s ") {
            status = Some(s.trim().to_string());
        } else if let Some(v) = t.strip_prefix("v ") {
            for tok in v.split_whitespace() {
                let x: i64 = tok.parse().unwrap_or(0);
                if x > 0 && (x as usize) <= model.len() {
                    model[x as usize - 1] = true;
                }
            }
        }
    }
    match status.as_deref() {
        Some("SATISFIABLE") => Ok(SatResult::Sat(model)),
        Some("UNSATISFIABLE") => Ok(SatResult::Unsat),
        Some(_) => Ok(SatResult::LimitHit),
        None => Err(Error::Pebbling(format!("external solver '{program}' printed no status line"))),
    }
}

const UNDEF: i8 = -1;
const NO_REASON: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Watcher {
    clause: u32,
    blocker: Lit,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    activity: f64,
}

/// Max-heap of variables ordered by activity.
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<u32>,
}

const NOT_IN_HEAP: u32 = u32::MAX;

impl VarHeap {
    fn new(n: u32) -> Self {
        Self { heap: (0..n).collect(), pos: (0..n).collect() }
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] != NOT_IN_HEAP
    }

    fn better(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i] as usize] = i as u32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && Self::better(act, self.heap[r], self.heap[l]) { r } else { l };
            if !Self::better(act, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i] as usize] = i as u32;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        self.pos[v as usize] = (self.heap.len() - 1) as u32;
        self.sift_up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.pos[v as usize] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }
}

/// CDCL solver state.
pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    value: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    heap: VarHeap,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    ok: bool,
    num_learnts: usize,
    max_learnts: f64,
    conflicts: u64,
}

impl Solver {
    pub fn new(num_vars: u32) -> Self {
        let n = num_vars as usize;
        Self {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            value: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            phase: vec![false; n],
            activity: vec![0.0; n],
            var_inc: 1.0,
            clause_inc: 1.0,
            heap: VarHeap::new(num_vars),
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![false; n],
            ok: true,
            num_learnts: 0,
            max_learnts: 0.0,
            conflicts: 0,
        }
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[l.var() as usize];
        if v == UNDEF {
            UNDEF
        } else {
            v ^ i8::from(l.is_neg())
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = l.var() as usize;
        self.value[v] = i8::from(!l.is_neg());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds an original clause at decision level 0; returns `false` once the
    /// formula is known unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return true;
        }
        c.retain(|&l| self.lit_value(l) != 0);
        if c.iter().any(|&l| self.lit_value(l) == 1) {
            return true;
        }
        match c.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(c[0], NO_REASON);
                self.ok = self.propagate().is_none();
                self.ok
            }
            _ => {
                self.attach(c, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let id = self.clauses.len() as u32;
        self.watches[lits[0].index()].push(Watcher { clause: id, blocker: lits[1] });
        self.watches[lits[1].index()].push(Watcher { clause: id, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, activity: 0.0 });
        if learnt {
            self.num_learnts += 1;
        }
        id
    }

    /// Unit propagation; returns a conflicting clause.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cid = w.clause as usize;
                let lits = &mut self.clauses[cid].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let first_val = {
                    let v = self.value[first.var() as usize];
                    if v == UNDEF {
                        UNDEF
                    } else {
                        v ^ i8::from(first.is_neg())
                    }
                };
                if first != w.blocker && first_val == 1 {
                    ws[j] = Watcher { clause: w.clause, blocker: first };
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    let l = lits[k];
                    let v = self.value[l.var() as usize];
                    let lv = if v == UNDEF { UNDEF } else { v ^ i8::from(l.is_neg()) };
                    if lv != 0 {
                        lits.swap(1, k);
                        let new_watch = lits[1];
                        self.watches[new_watch.index()].push(Watcher { clause: w.clause, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = w;
                j += 1;
                if first_val == 0 {
                    conflict = Some(w.clause);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, w.clause);
                }
            }
            ws.truncate(j);
            self.watches[false_lit.index()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: u32) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, c: u32) {
        let cl = &mut self.clauses[c as usize];
        if !cl.learnt {
            return;
        }
        cl.activity += self.clause_inc;
        if cl.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP analysis; returns the learnt clause (asserting literal
    /// first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            self.bump_clause(confl);
            let start = usize::from(p.is_some());
            let lits = self.clauses[confl as usize].lits.clone();
            for &q in &lits[start..] {
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(q.var());
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            let v = lit.var() as usize;
            self.seen[v] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[v];
        }
        learnt[0] = !p.unwrap();

        // drop literals implied by the rest of the clause
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, &q)| {
                if i == 0 {
                    return true;
                }
                let r = self.reason[q.var() as usize];
                if r == NO_REASON {
                    return true;
                }
                !self.clauses[r as usize].lits[1..].iter().all(|&l| {
                    let v = l.var() as usize;
                    self.seen[v] || self.level[v] == 0
                })
            })
            .collect();
        for &q in &learnt[1..] {
            self.seen[q.var() as usize] = false;
        }
        let mut out: Vec<Lit> = learnt.iter().zip(&keep).filter(|(_, &k)| k).map(|(&l, _)| l).collect();

        let mut bt = 0;
        if out.len() > 1 {
            let mut max_i = 1;
            for i in 2..out.len() {
                if self.level[out[i].var() as usize] > self.level[out[max_i].var() as usize] {
                    max_i = i;
                }
            }
            out.swap(1, max_i);
            bt = self.level[out[1].var() as usize];
        }
        (out, bt)
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var() as usize;
            self.phase[v] = !l.is_neg();
            self.value[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.heap.insert(l.var(), &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    /// Removes the less active half of the learnt clauses. Only called at
    /// decision level 0, where no learnt clause is a needed reason.
    fn reduce_db(&mut self) {
        let mut learnt: Vec<(f64, usize)> = self
            .clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| c.learnt && c.lits.len() > 2)
            .map(|(i, c)| (c.activity, i))
            .collect();
        learnt.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut drop = vec![false; self.clauses.len()];
        for &(_, i) in &learnt[..learnt.len() / 2] {
            drop[i] = true;
        }
        let old = std::mem::take(&mut self.clauses);
        self.num_learnts = 0;
        for w in self.watches.iter_mut() {
            w.clear();
        }
        for r in self.reason.iter_mut() {
            *r = NO_REASON;
        }
        for (i, c) in old.into_iter().enumerate() {
            if !drop[i] {
                let activity = c.activity;
                let id = self.attach(c.lits, c.learnt);
                self.clauses[id as usize].activity = activity;
            }
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.value[v as usize] == UNDEF {
                return Some(Lit::new(v, !self.phase[v as usize]));
            }
        }
        None
    }

    pub fn solve(&mut self, conflict_limit: Option<u64>) -> SatResult {
        if !self.ok {
            return SatResult::Unsat;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return SatResult::Unsat;
        }
        self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        let mut restart_idx = 0u32;
        let mut budget = luby(restart_idx) * 100;
        let mut since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SatResult::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.backtrack(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let asserting = learnt[0];
                    let id = self.attach(learnt, true);
                    self.bump_clause(id);
                    self.enqueue(asserting, id);
                }
                self.var_inc /= 0.95;
                self.clause_inc /= 0.999;
                if conflict_limit.is_some_and(|l| self.conflicts >= l) {
                    self.backtrack(0);
                    return SatResult::LimitHit;
                }
            } else {
                if since_restart >= budget {
                    self.backtrack(0);
                    restart_idx += 1;
                    budget = luby(restart_idx) * 100;
                    since_restart = 0;
                    if self.num_learnts as f64 >= self.max_learnts {
                        self.reduce_db();
                        self.max_learnts *= 1.1;
                    }
                    continue;
                }
                match self.pick_branch() {
                    None => {
                        let model = self.value.iter().map(|&v| v == 1).collect();
                        self.backtrack(0);
                        return SatResult::Sat(model);
                    }
                    Some(l) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, NO_REASON);
                    }
                }
            }
        }
    }
}

/// Luby sequence 1 1 2 1 1 2 4 ... (0-based).
fn luby(mut i: u32) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < u64::from(i) + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != u64::from(i) {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size as u32;
    }
    1 << seq
}
