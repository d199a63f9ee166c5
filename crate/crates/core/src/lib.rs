//! Two- and three-point correlation functions of the Riemann zeros.
//!
//! The zeros near height `E` are modelled by a GUE-type determinantal process
//! whose kernel is the universal sine kernel with the mean counting function
//! replaced by the smooth counting function plus a prime sum truncated at
//! `p*`. Averaging the determinants over the prime phases gives the
//! correlation functions; [`phase_average`] does this average numerically and
//! serves as the oracle for the closed forms in [`correlations`].
//!
//! The crate is `no_std` (with `alloc`); file formats, parallel drivers and
//! the command line live in the `zerocorr` companion crate.
#![no_std]
// comparisons are written negated on purpose so NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod correlations;
pub mod density;
pub mod empirical;
pub mod error;
pub mod kernel;
pub mod numeric;
pub mod phase_average;
pub mod primes;
pub mod zeta;

pub use error::{Error, Result};
pub use num_complex::Complex64;
