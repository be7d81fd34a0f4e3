//! Numerical toolkit for two-sided estimates of the iterated commutator
//! `[b2, [b1, H]]` of the Hilbert transform with pointwise multiplication.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: uniform windows, dyadic intervals, cell-average functions.
//! - [`young`]: Young functions, complementary functions, Luxemburg norms,
//!   Orlicz maximal functions and the `B_p` classification.
//! - [`conditions`]: the joint oscillation conditions `S_p`, `T_p`,
//!   `S_{A,B}`, `T_C` evaluated over interval scans.
//! - [`singular`]: discrete Hilbert transforms, the iterated commutator,
//!   its norm estimate and the maximal truncations used by sparse domination.
//! - [`sparse`]: the stopping-time construction of sparse families and the
//!   four sparse forms dominating the commutator.
//! - [`gallery`]: closed-form symbol pairs and test functions with exact
//!   cell averages.
//! - [`cli`]: the `itercomm` command-line frontend.
//!
//! Suprema over "all intervals" are always finite scans here; every reported
//! supremum is a lower bound for the true one.

pub mod cli;
pub mod conditions;
pub mod error;
pub mod gallery;
pub mod grid;
pub mod singular;
pub mod sparse;
pub mod young;

pub use error::{Error, Result};
pub use num_complex::Complex64;
