//! Simulation and analysis core for a variable-pitch-propeller quadcopter.
//!
//! `no_std` with `alloc`. File formats and the command line live in the
//! `heliquad` crate.

#![no_std]
// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod allocation;
pub mod harness;
pub mod mechanism;
pub mod nn;
pub mod controller;
pub mod dynamics;
pub mod propeller;

mod numeric;

pub use numeric::wrap_pi;
