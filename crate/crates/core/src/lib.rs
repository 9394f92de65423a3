// Indexed loops over matrix rows/columns read better than iterator chains
// in the stencil and dense kernels below.
#![allow(clippy::needless_range_loop)]

//! Fault-prone geometric multigrid laboratory.
//!
//! Builds Poisson hierarchies on the unit interval/square/cube, runs W- and
//! V-cycles in which every smoothing, residual, restriction and prolongation
//! output can be hit by stochastic faults, applies replica-based detection
//! and laissez-faire mitigation, and estimates the resulting asymptotic
//! contraction rate (the Lyapunov spectral radius of the random iteration
//! matrix) together with deterministic and tensor-expectation bounds.

pub mod analysis;
pub mod cycle;
pub mod error;
pub mod fault;
pub mod grid;
pub mod harness;
pub mod linalg;

pub use error::{Error, Result};
