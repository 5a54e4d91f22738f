//! Equivalence-checking miter benchmarks for arithmetic identities.
//!
//! Each benchmark joins two word-level circuits over shared `w`-bit operands
//! `a`, `b`, `c` (inputs ordered `a0..a(w-1) b0.. c0..`, least significant
//! bit first), XORs their outputs bitwise and OR-reduces the differences into
//! a single output. Faults are injected into the second circuit only.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::xag::{Signal, Xag, XagBuilder};

pub const MIN_WIDTH: usize = 2;
pub const MAX_WIDTH: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `(a + b) + c` against `a + (b + c)`.
    AddAssoc,
    /// `(a * b) * c` against `a * (b * c)`.
    MultAssoc,
    /// `a * (b + c)` against `a * b + a * c`.
    MultDistr,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::AddAssoc, Family::MultAssoc, Family::MultDistr];

    pub fn name(self) -> &'static str {
        match self {
            Family::AddAssoc => "addassoc",
            Family::MultAssoc => "multassoc",
            Family::MultDistr => "multdistr",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "addassoc" => Ok(Family::AddAssoc),
            "multassoc" => Ok(Family::MultAssoc),
            "multdistr" => Ok(Family::MultDistr),
            other => Err(Error::Config(format!("unknown benchmark family '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub family: Family,
    pub width: usize,
    pub faults: usize,
    pub seed: u64,
}

impl BenchmarkSpec {
    pub fn new(family: Family, width: usize) -> Self {
        Self { family, width, faults: 1, seed: 1 }
    }

    pub fn with_faults(mut self, faults: usize) -> Self {
        self.faults = faults;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_WIDTH..=MAX_WIDTH).contains(&self.width) {
            return Err(Error::Config(format!(
                "bitwidth {} outside {MIN_WIDTH}..={MAX_WIDTH}",
                self.width
            )));
        }
        Ok(())
    }

    /// Benchmark name such as `addassoc4`.
    pub fn name(&self) -> String {
        format!("{}{}", self.family, self.width)
    }
}

/// Substitution applied at a fault site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    /// AND becomes XOR and vice versa.
    SwapOperation,
    /// The gate output is inverted.
    ComplementOutput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultSite {
    /// Index of the faulty gate among the gates of the second circuit, in
    /// construction order.
    pub gate: usize,
    pub kind: FaultKind,
}

/// Description of a generated instance, written next to it as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub name: String,
    pub family: Family,
    pub width: usize,
    pub faults: usize,
    pub seed: u64,
    pub fault_sites: Vec<FaultSite>,
    pub inputs: usize,
    pub outputs: usize,
    pub nodes: usize,
    pub and_gates: usize,
    pub xor_gates: usize,
    pub adder: String,
    pub multiplier: String,
    pub word_semantics: String,
}

/// Bit-level operations the arithmetic structures are written against.
trait BitOps {
    type Bit: Copy;
    fn and(&mut self, a: Self::Bit, b: Self::Bit) -> Self::Bit;
    fn xor(&mut self, a: Self::Bit, b: Self::Bit) -> Self::Bit;
    fn not(&mut self, a: Self::Bit) -> Self::Bit;
}

struct XagOps<'a>(&'a mut XagBuilder);

impl BitOps for XagOps<'_> {
    type Bit = Signal;
    fn and(&mut self, a: Signal, b: Signal) -> Signal {
        self.0.and(a, b)
    }
    fn xor(&mut self, a: Signal, b: Signal) -> Signal {
        self.0.xor(a, b)
    }
    fn not(&mut self, a: Signal) -> Signal {
        !a
    }
}

struct BoolOps;

impl BitOps for BoolOps {
    type Bit = bool;
    fn and(&mut self, a: bool, b: bool) -> bool {
        a && b
    }
    fn xor(&mut self, a: bool, b: bool) -> bool {
        a ^ b
    }
    fn not(&mut self, a: bool) -> bool {
        !a
    }
}

/// Counts gate calls and applies the substitutions of `sites`.
struct Faulty<'s, O> {
    inner: O,
    sites: &'s [FaultSite],
    counter: usize,
}

impl<'s, O: BitOps> Faulty<'s, O> {
    fn new(inner: O, sites: &'s [FaultSite]) -> Self {
        Self { inner, sites, counter: 0 }
    }

    fn gate(&mut self, is_and: bool, a: O::Bit, b: O::Bit) -> O::Bit {
        let idx = self.counter;
        self.counter += 1;
        let fault = self.sites.iter().find(|s| s.gate == idx).map(|s| s.kind);
        let op_and = is_and ^ matches!(fault, Some(FaultKind::SwapOperation));
        let r = if op_and { self.inner.and(a, b) } else { self.inner.xor(a, b) };
        if matches!(fault, Some(FaultKind::ComplementOutput)) {
            self.inner.not(r)
        } else {
            r
        }
    }
}

impl<O: BitOps> BitOps for Faulty<'_, O> {
    type Bit = O::Bit;
    fn and(&mut self, a: O::Bit, b: O::Bit) -> O::Bit {
        self.gate(true, a, b)
    }
    fn xor(&mut self, a: O::Bit, b: O::Bit) -> O::Bit {
        self.gate(false, a, b)
    }
    fn not(&mut self, a: O::Bit) -> O::Bit {
        self.inner.not(a)
    }
}

/// Ripple-carry adder truncated to `a.len()` bits.
fn add<O: BitOps>(ops: &mut O, a: &[O::Bit], b: &[O::Bit]) -> Vec<O::Bit> {
    let w = a.len();
    let mut sum = Vec::with_capacity(w);
    let mut carry: Option<O::Bit> = None;
    for i in 0..w {
        let p = ops.xor(a[i], b[i]);
        let last = i + 1 == w;
        match carry {
            None => {
                sum.push(p);
                if !last {
                    carry = Some(ops.and(a[i], b[i]));
                }
            }
            Some(c) => {
                sum.push(ops.xor(p, c));
                if !last {
                    // majority as (a & b) ^ (c & (a ^ b))
                    let g = ops.and(a[i], b[i]);
                    let t = ops.and(c, p);
                    carry = Some(ops.xor(g, t));
                }
            }
        }
    }
    sum
}

/// Shift-and-add array multiplier truncated to `a.len()` bits.
fn mul<O: BitOps>(ops: &mut O, a: &[O::Bit], b: &[O::Bit]) -> Vec<O::Bit> {
    let w = a.len();
    let mut acc: Vec<O::Bit> = (0..w).map(|i| ops.and(a[i], b[0])).collect();
    for j in 1..w {
        let pp: Vec<O::Bit> = (0..w - j).map(|i| ops.and(a[i], b[j])).collect();
        let high = add(ops, &acc[j..], &pp);
        acc.truncate(j);
        acc.extend(high);
    }
    acc
}

fn left_side<O: BitOps>(ops: &mut O, family: Family, a: &[O::Bit], b: &[O::Bit], c: &[O::Bit]) -> Vec<O::Bit> {
    match family {
        Family::AddAssoc => {
            let ab = add(ops, a, b);
            add(ops, &ab, c)
        }
        Family::MultAssoc => {
            let ab = mul(ops, a, b);
            mul(ops, &ab, c)
        }
        Family::MultDistr => {
            let bc = add(ops, b, c);
            mul(ops, a, &bc)
        }
    }
}

fn right_side<O: BitOps>(ops: &mut O, family: Family, a: &[O::Bit], b: &[O::Bit], c: &[O::Bit]) -> Vec<O::Bit> {
    match family {
        Family::AddAssoc => {
            let bc = add(ops, b, c);
            add(ops, a, &bc)
        }
        Family::MultAssoc => {
            let bc = mul(ops, b, c);
            mul(ops, a, &bc)
        }
        Family::MultDistr => {
            let ab = mul(ops, a, b);
            let ac = mul(ops, a, c);
            add(ops, &ab, &ac)
        }
    }
}

/// Seed-deterministic choice of fault sites in the second circuit.
pub fn fault_sites(spec: &BenchmarkSpec) -> Result<Vec<FaultSite>> {
    spec.validate()?;
    let w = spec.width;
    let zeros = vec![false; w];
    let mut counter = Faulty::new(BoolOps, &[]);
    right_side(&mut counter, spec.family, &zeros, &zeros, &zeros);
    let gates = counter.counter;
    if spec.faults > gates {
        return Err(Error::Config(format!(
            "{} faults requested but the faulty circuit has only {gates} gates",
            spec.faults
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // Redraw while the miter is a constant: a fault on an unshared output
    // bit makes the two sides differ everywhere, which is a useless oracle.
    let mut sites = Vec::new();
    for _ in 0..MAX_FAULT_DRAWS {
        sites = draw_sites(&mut rng, gates, spec.faults);
        if spec.faults == 0 || !miter_is_constant(spec, &sites) {
            break;
        }
    }
    Ok(sites)
}

const MAX_FAULT_DRAWS: usize = 64;

fn draw_sites(rng: &mut ChaCha8Rng, gates: usize, faults: usize) -> Vec<FaultSite> {
    let mut picked: Vec<usize> = sample(rng, gates, faults).into_vec();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|gate| FaultSite {
            gate,
            kind: if rng.gen_bool(0.5) {
                FaultKind::SwapOperation
            } else {
                FaultKind::ComplementOutput
            },
        })
        .collect()
}

/// Exhaustive up to 15 inputs, 4096 seeded samples above.
fn miter_is_constant(spec: &BenchmarkSpec, sites: &[FaultSite]) -> bool {
    let n = 3 * spec.width;
    let eval = |x: &[bool]| miter_value(spec, sites, x);
    let mut first = None;
    let mut check = |x: Vec<bool>| {
        let v = eval(&x);
        *first.get_or_insert(v) == v
    };
    if n <= 15 {
        (0..1usize << n).all(|k| check((0..n).map(|i| k >> i & 1 == 1).collect()))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
        (0..4096).all(|_| check((0..n).map(|_| rng.gen_bool(0.5)).collect()))
    }
}

fn miter_value(spec: &BenchmarkSpec, sites: &[FaultSite], assignment: &[bool]) -> bool {
    let w = spec.width;
    let (a, rest) = assignment.split_at(w);
    let (b, c) = rest.split_at(w);
    let mask = (1u64 << w) - 1;
    let (av, bv, cv) = (word_value(a), word_value(b), word_value(c));
    let exact = match spec.family {
        Family::AddAssoc => (av + bv + cv) & mask,
        Family::MultAssoc => (av * bv * cv) & mask,
        Family::MultDistr => (av * ((bv + cv) & mask)) & mask,
    };
    let right = if sites.is_empty() {
        exact
    } else {
        word_value(&right_side(&mut Faulty::new(BoolOps, sites), spec.family, a, b, c))
    };
    exact != right
}

/// Builds the miter network of `spec`.
pub fn generate(spec: &BenchmarkSpec) -> Result<Xag> {
    Ok(generate_with_manifest(spec)?.0)
}

pub fn generate_with_manifest(spec: &BenchmarkSpec) -> Result<(Xag, BenchmarkManifest)> {
    let sites = fault_sites(spec)?;
    let w = spec.width;
    let mut b = XagBuilder::new();
    let word = |b: &mut XagBuilder, name: char| -> Vec<Signal> {
        (0..w).map(|i| b.named_input(format!("{name}{i}"))).collect()
    };
    let a = word(&mut b, 'a');
    let bb = word(&mut b, 'b');
    let c = word(&mut b, 'c');

    let left = left_side(&mut XagOps(&mut b), spec.family, &a, &bb, &c);
    let right = right_side(&mut Faulty::new(XagOps(&mut b), &sites), spec.family, &a, &bb, &c);

    let mut diffs: Vec<Signal> = left.iter().zip(&right).map(|(&l, &r)| b.xor(l, r)).collect();
    while diffs.len() > 1 {
        let mut next = Vec::with_capacity(diffs.len().div_ceil(2));
        for pair in diffs.chunks(2) {
            next.push(match pair {
                [x, y] => b.or(*x, *y),
                [x] => *x,
                _ => unreachable!(),
            });
        }
        diffs = next;
    }
    b.named_output(diffs[0], "miter");
    let xag = b.finish();
    let manifest = BenchmarkManifest {
        name: spec.name(),
        family: spec.family,
        width: w,
        faults: spec.faults,
        seed: spec.seed,
        fault_sites: sites,
        inputs: xag.input_count(),
        outputs: xag.output_count(),
        nodes: xag.node_count(),
        and_gates: xag.and_count(),
        xor_gates: xag.xor_count(),
        adder: "ripple-carry".into(),
        multiplier: "shift-and-add array".into(),
        word_semantics: "unsigned, truncated to w bits".into(),
    };
    Ok((xag, manifest))
}

fn word_value(bits: &[bool]) -> u64 {
    bits.iter().rev().fold(0, |acc, &b| acc << 1 | u64::from(b))
}

/// Miter value computed without the XAG: the fault-free side by integer
/// arithmetic, the faulty side by replaying the gate structure on booleans.
pub fn reference_function(spec: &BenchmarkSpec, assignment: &[bool]) -> Result<bool> {
    spec.validate()?;
    let w = spec.width;
    if assignment.len() != 3 * w {
        return Err(Error::SizeMismatch { expected: 3 * w, got: assignment.len() });
    }
    let sites = if spec.faults == 0 { Vec::new() } else { fault_sites(spec)? };
    Ok(miter_value(spec, &sites, assignment))
}
