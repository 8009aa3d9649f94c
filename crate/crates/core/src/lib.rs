//! Finite-dimensional operator-algebra laboratory.
//!
//! Dense complex matrices stand in for observables and states. On top of
//! them sit Kraus channels and measurements, bipartite steering and
//! teleportation, broadcasting and cloning checks, two-party bit
//! commitment with its EPR attack, and three physics backends (classical,
//! quantum, dephased) evaluated against the same scenario battery.
//!
//! Batch workloads (Monte-Carlo runs, randomized sweeps, angle grids) run
//! on rayon when the `parallel` feature is enabled and fall back to plain
//! iteration otherwise; see [`par`].

pub mod algebra;
pub mod channels;
pub mod entangle;
mod error;
pub mod par;
pub mod protocols;
pub mod qmat;
pub mod random;
pub mod scenario;
pub mod tol;
pub mod worlds;

pub use error::{Error, Result};
pub use num_complex::Complex64;
