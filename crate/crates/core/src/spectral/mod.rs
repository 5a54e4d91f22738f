//! Truth tables and their Rademacher-Walsh spectra.
//!
//! The number of nonzero spectral coefficients is the cost kernel of the
//! spectral LUT mapper, and the coefficients themselves drive the phase
//! polynomial used by gray synthesis.

mod truth_table;
mod walsh;

pub use truth_table::{TruthTable, MAX_VARS};
pub use walsh::{fwht, is_parity_function, nonzero_count, walsh_spectrum, ParityFunction, Spectrum};
