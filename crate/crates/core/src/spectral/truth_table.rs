use std::fmt;

use crate::error::{Error, Result};

/// Largest variable count a [`TruthTable`] can hold.
pub const MAX_VARS: usize = 16;

/// Bit-packed truth table of a Boolean function over at most 16 variables.
///
/// Bit `x` holds `f(x1, ..., xn)` where `x = (x1 x2 ... xn)` read as a binary
/// number, so `x1` is the most significant index bit and `xn` the least.
/// Every component of the crate (mapper, gray synthesis, simulators) uses this
/// convention.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    vars: usize,
    words: Vec<u64>,
}

fn word_count(vars: usize) -> usize {
    if vars <= 6 {
        1
    } else {
        1 << (vars - 6)
    }
}

fn tail_mask(vars: usize) -> u64 {
    if vars >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << vars)) - 1
    }
}

impl TruthTable {
    /// Constant-0 function over `vars` variables.
    pub fn zero(vars: usize) -> Self {
        assert!(vars <= MAX_VARS, "truth table limited to {MAX_VARS} variables");
        Self {
            vars,
            words: vec![0; word_count(vars)],
        }
    }

    pub fn one(vars: usize) -> Self {
        Self::zero(vars).complement()
    }

    pub fn constant(vars: usize, value: bool) -> Self {
        if value {
            Self::one(vars)
        } else {
            Self::zero(vars)
        }
    }

    /// Projection onto variable `var` (0-based, so `var == 0` is `x1`).
    pub fn var(vars: usize, var: usize) -> Self {
        assert!(var < vars);
        let shift = vars - 1 - var;
        Self::from_fn(vars, |x| (x >> shift) & 1 == 1)
    }

    pub fn from_fn(vars: usize, f: impl Fn(usize) -> bool) -> Self {
        let mut tt = Self::zero(vars);
        for x in 0..tt.len() {
            if f(x) {
                tt.set(x, true);
            }
        }
        tt
    }

    /// Builds a table from the low `2^vars` bits of `bits`; `vars <= 6`.
    pub fn from_u64(vars: usize, bits: u64) -> Self {
        assert!(vars <= 6);
        Self {
            vars,
            words: vec![bits & tail_mask(vars)],
        }
    }

    /// Parity of the listed variables, optionally complemented.
    pub fn parity(vars: usize, support: &[usize], complemented: bool) -> Self {
        let mask = support.iter().fold(0usize, |m, &v| {
            assert!(v < vars);
            m | 1 << (vars - 1 - v)
        });
        Self::from_fn(vars, |x| ((x & mask).count_ones() & 1 == 1) ^ complemented)
    }

    /// Parses the hexadecimal form produced by `Display` (most significant
    /// nibble first).
    pub fn from_hex(vars: usize, hex: &str) -> Result<Self> {
        if vars > MAX_VARS {
            return Err(Error::TooManyVariables { vars, max: MAX_VARS });
        }
        let hex = hex.trim().trim_start_matches("0x");
        let len = 1usize << vars;
        let digits = len.div_ceil(4);
        if hex.len() != digits {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected {digits} hex digits for {vars} variables, got {}", hex.len()),
            });
        }
        let mut tt = Self::zero(vars);
        for (pos, ch) in hex.chars().rev().enumerate() {
            let nibble = ch.to_digit(16).ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("invalid hex digit '{ch}'"),
            })? as usize;
            for b in 0..4 {
                let idx = pos * 4 + b;
                if nibble >> b & 1 == 1 {
                    if idx >= len {
                        return Err(Error::Parse {
                            line: 0,
                            message: "hex value exceeds table size".into(),
                        });
                    }
                    tt.set(idx, true);
                }
            }
        }
        Ok(tt)
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Number of rows, `2^vars`.
    pub fn len(&self) -> usize {
        1 << self.vars
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        debug_assert!(x < self.len());
        self.words[x >> 6] >> (x & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, value: bool) {
        debug_assert!(x < self.len());
        let bit = 1u64 << (x & 63);
        if value {
            self.words[x >> 6] |= bit;
        } else {
            self.words[x >> 6] &= !bit;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        self.complement().is_zero()
    }

    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        out.mask_tail();
        out
    }

    pub fn and(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn xor(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a ^ b)
    }

    fn zip(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.vars, other.vars, "variable count mismatch");
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| op(a, b))
            .collect();
        let mut out = Self { vars: self.vars, words };
        out.mask_tail();
        out
    }

    fn mask_tail(&mut self) {
        if self.vars < 6 {
            self.words[0] &= tail_mask(self.vars);
        }
    }

    /// Re-expresses this function over a larger variable list.
    ///
    /// `positions[i]` is the index, inside the new `vars`-variable space, of
    /// this table's variable `i`.
    pub fn extend(&self, vars: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.vars);
        let shifts: Vec<usize> = positions
            .iter()
            .map(|&p| {
                assert!(p < vars);
                vars - 1 - p
            })
            .collect();
        let n = self.vars;
        Self::from_fn(vars, |x| {
            let mut local = 0usize;
            for (i, &s) in shifts.iter().enumerate() {
                local |= (x >> s & 1) << (n - 1 - i);
            }
            self.get(local)
        })
    }

    /// True iff the function depends on variable `var`.
    pub fn depends_on(&self, var: usize) -> bool {
        let bit = 1usize << (self.vars - 1 - var);
        (0..self.len()).any(|x| x & bit == 0 && self.get(x) != self.get(x | bit))
    }

    /// Evaluates the table under an assignment given in variable order.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        assert_eq!(assignment.len(), self.vars);
        let x = assignment
            .iter()
            .fold(0usize, |acc, &b| acc << 1 | usize::from(b));
        self.get(x)
    }

    /// Hexadecimal string, most significant nibble (highest indices) first.
    pub fn to_hex(&self) -> String {
        let digits = self.len().div_ceil(4);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u32;
            for b in 0..4 {
                let idx = d * 4 + b;
                if idx < self.len() && self.get(idx) {
                    nibble |= 1 << b;
                }
            }
            s.push(char::from_digit(nibble, 16).unwrap());
        }
        s
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({}, 0x{})", self.vars, self.to_hex())
    }
}
