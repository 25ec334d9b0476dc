//! Exact simulation of `f(p)`-coins from independent tosses of a coin with
//! unknown bias `p`.
//!
//! * [`ratfunc`]: exact polynomial arithmetic and the Bernstein/Polya certificate.
//! * [`automaton`]: finite coin automata, execution and exact extraction of
//!   the simulated rational function.
//! * [`blocks`]: block simulations built from a rational function, including
//!   the multi-letter (dice) variant.
//! * [`pushdown`]: pushdown coin automata, the first-passage fixed point and
//!   the ladder construction for `sqrt(p)`.
//! * [`expr`], [`document`], [`montecarlo`]: expression parsing, machine
//!   files and the seeded statistical harness used by the CLI.

pub mod automaton;
pub mod blocks;
pub mod document;
mod error;
pub mod expr;
pub mod montecarlo;
pub mod pushdown;
pub mod ratfunc;
pub mod source;

pub use error::{Error, Result};
