// comparisons are written negated on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod functionals;
pub mod ground_state;
pub mod morawetz;
pub mod nonlinearity;
pub mod ode;
pub mod radial;
pub mod runner;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use nonlinearity::Nonlinearity;
