//! Frank-Wolfe for the ℓ1-relaxed exact-sparse reconstruction problem.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`linalg`]: dense vectors, unit-norm dictionaries and small spectral routines.
//! * [`analysis`]: coherence, the Babel function and the recovery / rate constants
//!   derived from them.
//! * [`solvers`]: Frank-Wolfe over the ℓ1 ball with exact line search, plus
//!   Matching Pursuit and Orthogonal Matching Pursuit baselines. Every solver
//!   emits a full iteration trace.
//! * [`instances`]: seeded construction of dictionaries and m-sparse signals.
//! * [`certify`]: post-hoc checks on traces (entry iteration of the geometric
//!   rate, ball entry, per-iteration invariants).
//!
//! File formats, the experiment runner and the CLI live in the `fwsparse-cli` crate.

#![no_std]
// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod certify;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{Dictionary, Matrix, SupportSet, Vector};
