//! File formats, seeded experiment runner and solver comparison on top of
//! `fwsparse-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod error;
pub mod io;
pub mod runner;

pub use error::HarnessError;
