//! Spectral decomposition of single-target gates into `{H, CNOT, Rz}`.
//!
//! A gate with control function `f` equals `H(t) D H(t)` with the diagonal
//! `D|x,y> = (-1)^(y f(x))|x,y>`. Writing `f` through its Walsh spectrum
//! turns `D` into a sum of phases on parities of the wires, and each parity
//! term becomes one `Rz` inside a CNOT parity network.

use crate::error::{Error, Result};
use crate::mapper::LutFunction;
use crate::qcirc::{DyadicAngle, Gate, Qubit};
use crate::reversible::SingleTargetGate;
use crate::spectral::{walsh_spectrum, TruthTable};

/// Largest control count decomposed through the spectrum.
pub const MAX_CONTROLS: usize = 8;

/// Phase `angle` applied to the parity of the wires in `support`.
///
/// Wire `i < n` is control `i`; wire `n` is the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseTerm {
    pub support: u32,
    pub angle: DyadicAngle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhasePolynomial {
    /// Number of controls.
    pub controls: usize,
    pub terms: Vec<PhaseTerm>,
    /// Phase by which the synthesized circuit differs from the gate.
    pub global_phase: DyadicAngle,
}

impl PhasePolynomial {
    pub fn target_wire(&self) -> usize {
        self.controls
    }
}

/// Phase terms of `D` for control function `f`, angles reduced to
/// `(-pi, pi]`, zero terms dropped.
pub fn phase_polynomial(f: &TruthTable) -> Result<PhasePolynomial> {
    let n = f.vars();
    if n > MAX_CONTROLS {
        return Err(Error::TooManyVariables { vars: n, max: MAX_CONTROLS });
    }
    let spectrum = walsh_spectrum(f);
    let b = n as u32 + 1;
    let target = 1u32 << n;
    let mut terms = Vec::new();
    let mut push = |support: u32, angle: DyadicAngle| {
        let angle = angle.normalized();
        if !angle.is_zero() {
            terms.push(PhaseTerm { support, angle });
        }
    };
    let s0 = i64::from(spectrum.coeffs()[0]);
    push(target, DyadicAngle::new(-((1i64 << n) - s0), b));
    for (w, s) in spectrum.nonzero() {
        if w == 0 {
            continue;
        }
        // spectrum index bit n-1-i belongs to control i
        let support = (0..n).filter(|&i| w >> (n - 1 - i) & 1 == 1).fold(0u32, |m, i| m | 1 << i);
        push(support, DyadicAngle::new(-i64::from(s), b));
        push(support | target, DyadicAngle::new(i64::from(s), b));
    }
    let global_phase = terms.iter().fold(DyadicAngle::ZERO, |acc, t| acc + -halve(t.angle)).normalized();
    Ok(PhasePolynomial { controls: n, terms, global_phase })
}

fn halve(a: DyadicAngle) -> DyadicAngle {
    DyadicAngle::new(a.numerator(), a.log2_den() + 1)
}

/// Wire currently accumulating a parity, and that parity.
type Accumulator = Option<(usize, u32)>;

fn accumulator_for(support: u32, target_wire: usize) -> usize {
    if support >> target_wire & 1 == 1 {
        target_wire
    } else {
        support.trailing_zeros() as usize
    }
}

fn transition_cost(acc: Accumulator, support: u32) -> u32 {
    match acc {
        Some((w, p)) if support >> w & 1 == 1 => (p ^ support).count_ones(),
        Some((_, p)) => p.count_ones() - 1 + support.count_ones() - 1,
        None => support.count_ones() - 1,
    }
}

fn cnots_onto(wire: usize, mask: u32, out: &mut Vec<(usize, usize)>) {
    let mut m = mask & !(1 << wire);
    while m != 0 {
        let j = m.trailing_zeros() as usize;
        out.push((j, wire));
        m &= m - 1;
    }
}

/// CNOT parity network realizing every term on local wires `0..=n`.
///
/// One wire at a time accumulates a parity; terms are visited in greedy
/// nearest-neighbour order of CNOT cost, and the accumulator is restored
/// before switching wires and at the end.
pub fn parity_network(poly: &PhasePolynomial) -> Vec<LocalGate> {
    let t = poly.target_wire();
    let mut remaining: Vec<PhaseTerm> = poly.terms.clone();
    remaining.sort();
    let mut acc: Accumulator = None;
    let mut out = Vec::new();
    let mut cx = Vec::new();
    while !remaining.is_empty() {
        let (idx, _) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, term)| (transition_cost(acc, term.support), term.support))
            .unwrap();
        let term = remaining.remove(idx);
        cx.clear();
        let wire = match acc {
            Some((w, p)) if term.support >> w & 1 == 1 => {
                cnots_onto(w, p ^ term.support, &mut cx);
                w
            }
            other => {
                if let Some((w, p)) = other {
                    cnots_onto(w, p, &mut cx);
                }
                let w = accumulator_for(term.support, t);
                cnots_onto(w, term.support, &mut cx);
                w
            }
        };
        out.extend(cx.iter().map(|&(c, tg)| LocalGate::Cx(c, tg)));
        out.push(LocalGate::Rz(wire, term.angle));
        acc = Some((wire, term.support));
    }
    if let Some((w, p)) = acc {
        cx.clear();
        cnots_onto(w, p, &mut cx);
        out.extend(cx.iter().map(|&(c, tg)| LocalGate::Cx(c, tg)));
    }
    out
}

/// Gate on local wires (controls `0..n`, target `n`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalGate {
    Cx(usize, usize),
    Rz(usize, DyadicAngle),
}

/// Decomposes `g` into `{H, CNOT, Rz}` on the gate's own qubits.
///
/// Parity control functions take the CNOT-only path of
/// [`synthesize_xor_block`].
pub fn synthesize_stg(g: &SingleTargetGate) -> Result<Vec<Gate>> {
    let table = match &g.function {
        LutFunction::Parity { complemented } => return Ok(synthesize_xor_block(&g.controls, *complemented, g.target)),
        LutFunction::Table(t) => t,
    };
    let poly = phase_polynomial(table)?;
    if poly.terms.is_empty() {
        return Ok(Vec::new());
    }
    let qubit = |w: usize| if w == poly.controls { g.target } else { g.controls[w] };
    let mut out = vec![Gate::H(g.target)];
    out.extend(parity_network(&poly).into_iter().map(|lg| match lg {
        LocalGate::Cx(c, t) => Gate::Cx { control: qubit(c), target: qubit(t) },
        LocalGate::Rz(w, angle) => Gate::Rz { qubit: qubit(w), angle },
    }));
    out.push(Gate::H(g.target));
    Ok(out)
}

/// One CNOT per control onto `target`, then an unconditional flip
/// (`H Rz(pi) H`) when `complemented`.
pub fn synthesize_xor_block(controls: &[Qubit], complemented: bool, target: Qubit) -> Vec<Gate> {
    let mut out: Vec<Gate> = controls.iter().map(|&c| Gate::Cx { control: c, target }).collect();
    if complemented {
        out.extend(flip(target));
    }
    out
}

/// Unconditional NOT up to global phase.
pub fn flip(q: Qubit) -> [Gate; 3] {
    [Gate::H(q), Gate::Rz { qubit: q, angle: DyadicAngle::PI }, Gate::H(q)]
}

/// Checked variant of [`synthesize_xor_block`] for a table that must be a
/// parity of all its variables.
pub fn synthesize_parity_table(controls: &[Qubit], f: &TruthTable, target: Qubit) -> Result<Vec<Gate>> {
    let p = crate::spectral::is_parity_function(f).ok_or(Error::NotParity)?;
    if p.support.len() != controls.len() {
        return Err(Error::NotParity);
    }
    Ok(synthesize_xor_block(controls, p.complemented, target))
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::qcirc::{build_unitary, QuantumCircuit};

    /// Permutation matrix of the gate on qubits `0..n` (controls) and `n`
    /// (target), built straight from the truth table.
    fn stg_matrix(f: &TruthTable) -> Vec<Complex64> {
        let n = f.vars();
        let dim = 1usize << (n + 1);
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        for col in 0..dim {
            // qubit i is bit i of the index, variable i is the MSB side of x
            let x = (0..n).fold(0usize, |acc, i| acc << 1 | (col >> i & 1));
            let row = if f.get(x) { col ^ (1 << n) } else { col };
            m[row * dim + col] = Complex64::new(1.0, 0.0);
        }
        m
    }

    fn random_table(rng: &mut ChaCha8Rng, n: usize) -> TruthTable {
        let mut t = TruthTable::zero(n);
        for x in 0..1usize << n {
            t.set(x, rng.gen_bool(0.5));
        }
        t
    }

    fn gate_for(f: &TruthTable) -> SingleTargetGate {
        let n = f.vars();
        SingleTargetGate::new((0..n).collect(), LutFunction::Table(f.clone()), n).unwrap()
    }

    fn unitary_of(n: usize, gates: &[Gate]) -> Vec<Complex64> {
        let mut c = QuantumCircuit::new(n + 1, 0, 0);
        c.extend(gates.iter().copied()).unwrap();
        build_unitary(&c).unwrap()
    }

    fn check(f: &TruthTable) {
        let gates = synthesize_stg(&gate_for(f)).unwrap();
        let u = unitary_of(f.vars(), &gates);
        let target = stg_matrix(f);
        let poly = phase_polynomial(f).unwrap();
        let phase = Complex64::from_polar(1.0, poly.global_phase.radians());
        let dev = u.iter().zip(&target).map(|(a, b)| (a - b * phase).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-9, "{f}: deviation {dev}");
        let rz = gates.iter().filter(|g| matches!(g, Gate::Rz { .. })).count();
        assert!(rz <= 2 * walsh_spectrum(f).nonzero_count() + 1);
    }

    #[test]
    fn exhaustive_small_functions() {
        for n in 0..=2 {
            for bits in 0..1u64 << (1 << n) {
                check(&TruthTable::from_u64(n, bits));
            }
        }
    }

    #[test]
    fn random_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 3..=5 {
            for _ in 0..20 {
                check(&random_table(&mut rng, n));
            }
        }
    }

    #[test]
    fn constant_functions() {
        assert!(synthesize_stg(&gate_for(&TruthTable::zero(3))).unwrap().is_empty());
        let one = synthesize_stg(&gate_for(&TruthTable::one(2))).unwrap();
        assert_eq!(one, flip(2).to_vec());
    }

    #[test]
    fn toffoli_uses_seven_rotations() {
        let and2 = TruthTable::var(2, 0).and(&TruthTable::var(2, 1));
        let gates = synthesize_stg(&gate_for(&and2)).unwrap();
        assert_eq!(gates.iter().filter(|g| matches!(g, Gate::Rz { .. })).count(), 7);
        check(&and2);
    }

    #[test]
    fn parity_and_majority_term_counts() {
        let p = TruthTable::var(2, 0).xor(&TruthTable::var(2, 1));
        let poly = phase_polynomial(&p).unwrap();
        assert_eq!(poly.terms.len(), 3);
        let supports: Vec<u32> = poly.terms.iter().map(|t| t.support).collect();
        assert!(supports.contains(&0b011) && supports.contains(&0b111) && supports.contains(&0b100));

        let maj = TruthTable::from_fn(3, |x| x.count_ones() >= 2);
        assert!(phase_polynomial(&maj).unwrap().terms.len() <= 9);
    }

    #[test]
    fn single_control_is_cnot_like() {
        let poly = phase_polynomial(&TruthTable::var(1, 0)).unwrap();
        // y x1 = (x1 + y - (x1 xor y)) / 2
        assert_eq!(poly.terms.len(), 3);
        for t in &poly.terms {
            assert_eq!(t.angle.log2_den(), 1);
        }
    }

    #[test]
    fn angles_are_dyadic_with_bounded_denominator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=6 {
            let f = random_table(&mut rng, n);
            for t in phase_polynomial(&f).unwrap().terms {
                assert!(t.angle.log2_den() <= n as u32 + 1);
                assert!(t.support != 0);
            }
        }
    }

    #[test]
    fn network_restores_linear_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            let f = random_table(&mut rng, n);
            let poly = phase_polynomial(&f).unwrap();
            let mut wires: Vec<u32> = (0..=n).map(|i| 1 << i).collect();
            let mut seen = Vec::new();
            for g in parity_network(&poly) {
                match g {
                    LocalGate::Cx(c, t) => wires[t] ^= wires[c],
                    LocalGate::Rz(w, a) => seen.push(PhaseTerm { support: wires[w], angle: a }),
                }
            }
            assert_eq!(wires, (0..=n).map(|i| 1u32 << i).collect::<Vec<_>>());
            let mut want = poly.terms.clone();
            want.sort();
            seen.sort();
            assert_eq!(seen, want);
        }
    }

    #[test]
    fn xor_blocks_are_cnot_only() {
        for m in 1..=10 {
            let controls: Vec<usize> = (0..m).collect();
            let gates = synthesize_xor_block(&controls, false, m);
            assert_eq!(gates.len(), m);
            assert!(gates.iter().all(|g| matches!(g, Gate::Cx { target, .. } if *target == m)));
        }
    }

    #[test]
    fn xnor_block_on_clean_target() {
        let gates = synthesize_xor_block(&[0, 1], true, 2);
        assert_eq!(gates.iter().filter(|g| matches!(g, Gate::Cx { .. })).count(), 2);
        let mut c = QuantumCircuit::new(2, 1, 0);
        c.extend(gates).unwrap();
        for x in 0..4usize {
            let basis = [x & 1 == 1, x & 2 == 2, false];
            let v = crate::qcirc::simulate_statevector(&c, &basis).unwrap();
            let expect = x | usize::from((x & 1 == 1) == (x & 2 == 2)) << 2;
            assert!((v[expect].norm() - 1.0).abs() < 1e-12);
        }
        let xnor = TruthTable::var(2, 0).xor(&TruthTable::var(2, 1)).complement();
        assert_eq!(synthesize_parity_table(&[0, 1], &xnor, 2).unwrap().len(), 5);
        assert!(synthesize_parity_table(&[0, 1], &TruthTable::var(2, 0), 2).is_err());
    }
}
