//! Discrete ordered median problem (DOMP) toolkit.
//!
//! Given `n` sites that double as clients, a cost matrix with free
//! self-service (zero diagonal), and a weight vector applied to the sorted
//! allocation costs, the DOMP asks for the `p` open sites minimizing the
//! weighted sum of sorted costs. This crate provides:
//!
//! * the instance model and objective evaluation ([`instance`]),
//! * exhaustive enumeration oracles used as ground truth ([`oracle`]),
//! * the sorting-permutation feasibility program ([`sortperm`]),
//! * the flat variable vector, its equality system, and slack completion
//!   for the binary quadratic formulation ([`qform`]),
//! * the lifted-matrix conic programs over moment matrices ([`lift`]),
//! * a first-order splitting solver for the doubly nonnegative relaxation
//!   of those programs, with a dense symmetric eigensolver ([`dnn`], [`eig`]),
//! * a deterministic generator for reproducible instance families ([`gen`]).
//!
//! The crate is `no_std` (with `alloc`) so the numerical kernels can be
//! embedded anywhere; file formats and the command line live in the
//! companion `domp-cli` crate.
//!
//! Everything is deterministic: builders emit rows in a fixed documented
//! order, and all randomness flows from explicit 64-bit seeds.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
// Index-heavy numerics throughout: range loops mirror the subscripts in the
// underlying formulas better than iterator chains would.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod dnn;
pub mod eig;
pub mod error;
pub mod gen;
pub mod instance;
pub mod lift;
pub mod oracle;
pub mod qform;
pub mod rng;
pub mod sortperm;
#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use instance::{BinMatrix, Instance, InteractionCosts, LocationSolution};
pub use qform::{LinearSystem, PhiLayout, PhiVector};
