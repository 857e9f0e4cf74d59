//! Numerical laboratory for Kashaev invariants at roots of unity.
//!
//! The crate evaluates the colored Jones polynomial `J_N(L; q)` at
//! `q = exp(2πi/N)` for a handful of hyperbolic knots and links, both by
//! contracting an `R`-matrix tangle and by closed-form state sums, and
//! compares the asymptotic growth with the volume and Chern–Simons invariant
//! obtained from dilogarithm potentials and their stationary points.

pub mod analysis;
pub mod backend;
pub mod dilog;
pub mod error;
pub mod links;
pub mod potentials;
pub mod qarith;
pub mod reference;
pub mod saddle;
pub mod statesum;
pub mod tangle;
pub mod verify;

pub use error::{Error, Result};
pub use links::LinkId;
