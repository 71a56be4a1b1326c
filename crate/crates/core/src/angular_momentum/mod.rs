//! Wigner 3-j and 6-j symbols over half-integer angular momenta.
//!
//! Symbols are evaluated with the Racah single-sum formulas in exact rational
//! arithmetic. Only the final square root is taken in floating point, so the
//! result carries at most a couple of ulps of error. Structural zeros (broken
//! triangle, nonzero projection sum, vanishing exact sum) are flagged through
//! [`SymbolValue::is_exact_zero`].

mod half_int;
mod racah;

pub use half_int::{triangle, HalfInt};
pub use racah::{wigner_3j, wigner_6j, SymbolValue, MAX_TWICE_J};
