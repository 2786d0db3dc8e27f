//! Finite-volume experiments on `H = -Δ + Σ a_n ω_n χ_n`, a Schrödinger
//! operator whose random potential has fat-tailed couplings `ω_n` and a
//! decaying envelope `a_n = |n|^{-α}`.
//!
//! - [`disorder`]: the single-site law, site-coupled sampling, potential fields
//!   and exact event probabilities.
//! - [`operator`]: finite-difference assembly on boxes (Dirichlet) and unit
//!   cells (Neumann).
//! - [`spectral`]: dense and Lanczos eigensolvers, inertia counting, spectral
//!   distance and resolvent norms.
//! - [`analysis`]: localization fits, Weyl packets, the single-well curve and
//!   weighted potential sums.
//! - [`harness`]: seeded ensemble drivers and content-addressed persistence.
//! - [`cli`]: the `decaylab` command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod disorder;
pub mod error;
pub mod harness;
pub mod operator;
pub mod spectral;

pub use error::{Error, Result};
