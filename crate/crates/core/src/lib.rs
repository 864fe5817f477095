//! Stochastisation laboratory for parameter-dependent ODEs.
//!
//! A deterministic system `dx/dt = f(x; p)` can be made stochastic in three
//! ways: an external Itô perturbation of `p`, an external Stratonovich
//! perturbation, or a random ODE where `p` follows a sampled process `η_t`.
//! This crate builds each version for a catalog of models (Larmor and
//! Landau–Lifshitz families, the Kubo oscillator, a scalar linear SDE and an
//! isochronous oscillator bank), integrates them, and checks which properties
//! of the deterministic system survive: invariant manifolds, equilibria,
//! Lyapunov functions, first integrals and Poisson / double-bracket structure.
//!
//! Module map:
//!
//! * [`vecalg`] – `R³` vector algebra, scalar fields, rigid-body Poisson and
//!   double brackets.
//! * [`noise`] – seeded, dyadically refinable Brownian paths and parameter
//!   processes for RODEs.
//! * [`integrate`] – model specifications, time-stepping schemes, the
//!   Stratonovich→Itô conversion, the generator and ensemble runs.
//! * [`models`] – the model catalog.
//! * [`analyze`] – invariance, equilibrium, stability, convergence and
//!   structure checkers.
//! * [`cli`] – the config-driven experiment runner behind the `stochlab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analyze;
pub mod cli;
pub mod error;
pub mod integrate;
pub mod models;
pub mod noise;
pub mod vecalg;

pub use error::{Error, Result};

/// A point in `R^n`.
pub type State = Vec<f64>;
