use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Gate, QuantumCircuit, Register};
use crate::error::{Error, Result};
use crate::xag::Xag;

pub const MAX_STATEVECTOR_QUBITS: usize = 16;
pub const MAX_UNITARY_QUBITS: usize = 10;
/// Widest register set the sparse simulator can index.
pub const MAX_SPARSE_QUBITS: usize = 128;
/// Input-count cap of the exhaustive oracle check.
pub const MAX_ORACLE_INPUTS: usize = 14;

const PRUNE: f64 = 1e-14;

fn rz_phases(angle: f64) -> (Complex64, Complex64) {
    (Complex64::from_polar(1.0, -angle / 2.0), Complex64::from_polar(1.0, angle / 2.0))
}

fn apply_dense(v: &mut [Complex64], g: &Gate) {
    match *g {
        Gate::H(q) => {
            let m = 1usize << q;
            for i in 0..v.len() {
                if i & m == 0 {
                    let (a, b) = (v[i], v[i | m]);
                    v[i] = (a + b) * FRAC_1_SQRT_2;
                    v[i | m] = (a - b) * FRAC_1_SQRT_2;
                }
            }
        }
        Gate::Cx { control, target } => {
            let (mc, mt) = (1usize << control, 1usize << target);
            for i in 0..v.len() {
                if i & mc != 0 && i & mt == 0 {
                    v.swap(i, i | mt);
                }
            }
        }
        Gate::Rz { qubit, angle } => {
            let m = 1usize << qubit;
            let (p0, p1) = rz_phases(angle.radians());
            for (i, a) in v.iter_mut().enumerate() {
                *a *= if i & m == 0 { p0 } else { p1 };
            }
        }
    }
}

/// Final state of `c` started in the basis state `basis` (qubit `q` is bit
/// `q` of the amplitude index).
pub fn simulate_statevector(c: &QuantumCircuit, basis: &[bool]) -> Result<Vec<Complex64>> {
    let n = c.qubit_count();
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::TooManyQubits { qubits: n, max: MAX_STATEVECTOR_QUBITS });
    }
    if basis.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: basis.len() });
    }
    let start = basis.iter().enumerate().fold(0usize, |acc, (i, &b)| acc | usize::from(b) << i);
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
    v[start] = Complex64::new(1.0, 0.0);
    for g in c.gates() {
        apply_dense(&mut v, g);
    }
    Ok(v)
}

/// Row-major `2^n x 2^n` matrix of the circuit: entry `(r, c)` is
/// `<r|U|c>`.
pub fn build_unitary(c: &QuantumCircuit) -> Result<Vec<Complex64>> {
    let n = c.qubit_count();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits { qubits: n, max: MAX_UNITARY_QUBITS });
    }
    let dim = 1usize << n;
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|col| {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[col] = Complex64::new(1.0, 0.0);
            for g in c.gates() {
                apply_dense(&mut v, g);
            }
            v
        })
        .collect();
    let mut u = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (col, v) in columns.iter().enumerate() {
        for (row, a) in v.iter().enumerate() {
            u[row * dim + col] = *a;
        }
    }
    Ok(u)
}

/// Largest elementwise deviation between `a` and `b` after removing the
/// global phase. The phase is fixed by the first entry of `a` with
/// non-negligible magnitude. Returns infinity on length mismatch.
pub fn phase_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let Some(i) = a.iter().position(|z| z.norm() > 1e-6) else {
        return a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    };
    if b[i].norm() < 1e-12 {
        return f64::INFINITY;
    }
    let ratio = b[i] / a[i];
    let phase = ratio / ratio.norm();
    a.iter().zip(b).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max)
}

pub fn equal_up_to_phase(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    phase_deviation(a, b) < tol
}

/// Statevector storing only nonzero amplitudes, keyed by basis index.
#[derive(Clone, Debug)]
pub struct SparseState {
    qubits: usize,
    amps: HashMap<u128, Complex64>,
}

impl SparseState {
    pub fn basis(qubits: usize, index: u128) -> Result<Self> {
        if qubits > MAX_SPARSE_QUBITS {
            return Err(Error::TooManyQubits { qubits, max: MAX_SPARSE_QUBITS });
        }
        Ok(Self { qubits, amps: HashMap::from([(index, Complex64::new(1.0, 0.0))]) })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, index: u128) -> Complex64 {
        self.amps.get(&index).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Basis index with the largest magnitude (lowest index on ties).
    pub fn dominant(&self) -> Option<(u128, Complex64)> {
        self.amps
            .iter()
            .map(|(&k, &a)| (k, a))
            .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()).then(y.0.cmp(&x.0)))
    }

    pub fn apply(&mut self, g: &Gate) {
        match *g {
            Gate::H(q) => {
                let m = 1u128 << q;
                let mut next: HashMap<u128, Complex64> = HashMap::with_capacity(self.amps.len() * 2);
                for (&k, &a) in &self.amps {
                    let a = a * FRAC_1_SQRT_2;
                    *next.entry(k & !m).or_default() += a;
                    *next.entry(k | m).or_default() += if k & m == 0 { a } else { -a };
                }
                next.retain(|_, a| a.norm() > PRUNE);
                self.amps = next;
            }
            Gate::Cx { control, target } => {
                let (mc, mt) = (1u128 << control, 1u128 << target);
                self.amps = self.amps.drain().map(|(k, a)| (if k & mc != 0 { k ^ mt } else { k }, a)).collect();
            }
            Gate::Rz { qubit, angle } => {
                let m = 1u128 << qubit;
                let (p0, p1) = rz_phases(angle.radians());
                for (k, a) in self.amps.iter_mut() {
                    *a *= if k & m == 0 { p0 } else { p1 };
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleFailure {
    /// Classical input, bit `i` is `x[i]`.
    pub x: u64,
    /// Initial output register, bit `j` is `y[j]`.
    pub y: u64,
    pub reason: String,
}

impl fmt::Display for OracleFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x = {:#b}, y = {:#b}: {}", self.x, self.y, self.reason)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub cases: usize,
    pub max_deviation: f64,
    pub failure: Option<OracleFailure>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks `|x>|y>|0> -> |x>|y xor f(x)>|0>` for every classical `(x, y)`,
/// ignoring global phase, with tolerance `tol` on the amplitudes.
pub fn verify_oracle(c: &QuantumCircuit, xag: &Xag, tol: f64) -> Result<OracleReport> {
    let (n, m) = (c.inputs(), c.outputs());
    if xag.input_count() != n {
        return Err(Error::SizeMismatch { expected: n, got: xag.input_count() });
    }
    if xag.output_count() != m {
        return Err(Error::SizeMismatch { expected: m, got: xag.output_count() });
    }
    if n > MAX_ORACLE_INPUTS {
        return Err(Error::Config(format!("exhaustive oracle check limited to {MAX_ORACLE_INPUTS} inputs, got {n}")));
    }
    if c.qubit_count() > MAX_SPARSE_QUBITS || m > 63 {
        return Err(Error::TooManyQubits { qubits: c.qubit_count(), max: MAX_SPARSE_QUBITS });
    }
    let per_x: Vec<(f64, Option<OracleFailure>)> = (0..1u64 << n)
        .into_par_iter()
        .map(|x| {
            let assignment: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
            let f = xag.evaluate(&assignment).expect("input count checked");
            let fx = f.iter().enumerate().fold(0u64, |acc, (j, &b)| acc | u64::from(b) << j);
            let mut worst = 0.0f64;
            for y in 0..1u64 << m {
                let start = u128::from(x) | u128::from(y) << n;
                let expected = u128::from(x) | u128::from(y ^ fx) << n;
                let mut st = SparseState::basis(c.qubit_count(), start).expect("size checked");
                for g in c.gates() {
                    st.apply(g);
                }
                let amp = st.amplitude(expected);
                let rest = (st.norm_sqr() - amp.norm_sqr()).max(0.0).sqrt();
                let dev = (amp.norm() - 1.0).abs().max(rest);
                worst = worst.max(dev);
                if dev >= tol {
                    let reason = diagnose(c, &st, expected, dev);
                    return (worst, Some(OracleFailure { x, y, reason }));
                }
            }
            (worst, None)
        })
        .collect();
    let max_deviation = per_x.iter().map(|r| r.0).fold(0.0, f64::max);
    let failure = per_x.into_iter().find_map(|r| r.1);
    Ok(OracleReport { cases: 1usize << (n + m), max_deviation, failure })
}

fn diagnose(c: &QuantumCircuit, st: &SparseState, expected: u128, dev: f64) -> String {
    let Some((got, _)) = st.dominant() else {
        return "empty state".into();
    };
    let diff = got ^ expected;
    let touched = |reg: Register| (0..c.qubit_count()).any(|q| diff >> q & 1 == 1 && c.register_of(q).0 == reg);
    if touched(Register::Input) {
        "input register modified".into()
    } else if touched(Register::Ancilla) {
        "ancilla not |0>".into()
    } else if touched(Register::Output) {
        "wrong output value".into()
    } else {
        format!("amplitude deviation {dev:.3e}")
    }
}
