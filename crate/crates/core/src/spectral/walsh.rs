use super::TruthTable;

/// Rademacher-Walsh spectrum of a Boolean function.
///
/// `coeffs()[j]` is the correlation of the `{1, -1}`-encoded function with the
/// parity of the variables selected by the binary expansion of `j`, using the
/// same index convention as [`TruthTable`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Spectrum {
    vars: usize,
    coeffs: Vec<i32>,
}

impl Spectrum {
    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn coeffs(&self) -> &[i32] {
        &self.coeffs
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    /// Sum of squared coefficients; `4^n` for every Boolean function.
    pub fn energy(&self) -> u64 {
        self.coeffs.iter().map(|&c| (c as i64 * c as i64) as u64).sum()
    }

    /// Iterator over `(mask, coefficient)` pairs with nonzero coefficient.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, i32)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| (j, c))
    }
}

/// In-place fast Walsh-Hadamard butterfly over `data.len()` (a power of two).
pub fn fwht(data: &mut [i32]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(h * 2) {
            for i in block..block + h {
                let (a, b) = (data[i], data[i + h]);
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Computes `S = H_n F` with `F[x] = (-1)^f(x)`.
pub fn walsh_spectrum(tt: &TruthTable) -> Spectrum {
    let mut coeffs: Vec<i32> = (0..tt.len())
        .map(|x| if tt.get(x) { -1 } else { 1 })
        .collect();
    fwht(&mut coeffs);
    Spectrum {
        vars: tt.vars(),
        coeffs,
    }
}

pub fn nonzero_count(s: &Spectrum) -> usize {
    s.nonzero_count()
}

/// Affine parity decomposition `f = (xor of support) ^ complemented`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityFunction {
    /// 0-based variable indices, ascending.
    pub support: Vec<usize>,
    pub complemented: bool,
}

/// Returns the support and polarity if `tt` is an affine parity function.
///
/// Constants qualify with an empty support.
pub fn is_parity_function(tt: &TruthTable) -> Option<ParityFunction> {
    let n = tt.vars();
    let complemented = tt.get(0);
    let mut mask = 0usize;
    for v in 0..n {
        let bit = 1 << (n - 1 - v);
        if tt.get(bit) != complemented {
            mask |= bit;
        }
    }
    let ok = (0..tt.len()).all(|x| tt.get(x) == (((x & mask).count_ones() & 1 == 1) ^ complemented));
    ok.then(|| ParityFunction {
        support: (0..n).filter(|v| mask >> (n - 1 - v) & 1 == 1).collect(),
        complemented,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct `H_n * F` product using the recursive definition of `H_n`.
    fn hadamard_entry(n: usize, row: usize, col: usize) -> i32 {
        if n == 0 {
            return 1;
        }
        let half = 1 << (n - 1);
        let sign = if row >= half && col >= half { -1 } else { 1 };
        sign * hadamard_entry(n - 1, row % half, col % half)
    }

    fn matrix_spectrum(tt: &TruthTable) -> Vec<i32> {
        let n = tt.vars();
        (0..tt.len())
            .map(|row| {
                (0..tt.len())
                    .map(|col| hadamard_entry(n, row, col) * if tt.get(col) { -1 } else { 1 })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn majority_example() {
        let maj = TruthTable::from_fn(3, |x| x.count_ones() >= 2);
        let s = walsh_spectrum(&maj);
        assert_eq!(s.coeffs(), &[0, 4, 4, 0, 4, 0, 0, -4]);
        assert_eq!(s.nonzero_count(), 4);
        assert_eq!(is_parity_function(&maj), None);
    }

    #[test]
    fn constant_and_and() {
        let s = walsh_spectrum(&TruthTable::zero(4));
        assert_eq!(s.coeffs()[0], 16);
        assert_eq!(s.nonzero_count(), 1);
        let and = TruthTable::var(2, 0).and(&TruthTable::var(2, 1));
        assert_eq!(walsh_spectrum(&and).coeffs(), &[2, 2, 2, -2]);
        assert_eq!(walsh_spectrum(&TruthTable::zero(0)).coeffs(), &[1]);
    }

    #[test]
    fn exhaustive_three_vars_against_matrix() {
        for bits in 0..256u64 {
            let tt = TruthTable::from_u64(3, bits);
            let s = walsh_spectrum(&tt);
            assert_eq!(s.coeffs(), matrix_spectrum(&tt).as_slice());
            assert_eq!(s.energy(), 64);
        }
    }

    #[test]
    fn involution() {
        let tt = TruthTable::from_fn(5, |x| (x * 7 + 3) % 5 < 2);
        let mut s = walsh_spectrum(&tt).coeffs().to_vec();
        fwht(&mut s);
        for (x, v) in s.iter().enumerate() {
            assert_eq!(*v, 32 * if tt.get(x) { -1 } else { 1 });
        }
    }

    #[test]
    fn parity_detection() {
        let f = TruthTable::parity(3, &[0, 2], false);
        assert_eq!(
            is_parity_function(&f),
            Some(ParityFunction { support: vec![0, 2], complemented: false })
        );
        let xnor = TruthTable::parity(2, &[0, 1], true);
        assert_eq!(
            is_parity_function(&xnor),
            Some(ParityFunction { support: vec![0, 1], complemented: true })
        );
        assert_eq!(walsh_spectrum(&TruthTable::parity(6, &[0, 1, 2, 3, 4, 5], false)).nonzero_count(), 1);
    }

    #[test]
    fn parity_iff_single_coefficient() {
        for bits in 0..65536u64 {
            let tt = TruthTable::from_u64(4, bits);
            assert_eq!(
                is_parity_function(&tt).is_some(),
                walsh_spectrum(&tt).nonzero_count() == 1
            );
        }
    }
}
