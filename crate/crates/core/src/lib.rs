//! Quantum Rabi model with single-photon (linear) and two-photon (nonlinear)
//! qubit-boson coupling.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = ω a†a + (Ω/2) σx + g1 σz (a† + a) + g2 σz [(a†)² + a² + χ (a†a + a a†)]
//! ```
//!
//! and this crate provides exact ground states in a truncated Fock basis,
//! the ground-state observables that distinguish the single-, double- and
//! broken-branch regimes, closed-form boundaries from the effective
//! displaced-oscillator picture, and deterministic phase-diagram sweeps.

pub mod analytic;
pub mod eigensolve;
pub mod error;
pub mod fockspace;
pub mod model;
pub mod observables;
pub mod report;
pub mod sweep;
pub mod wavefunction;

pub use error::{Error, Result};
pub use model::{DerivedScales, ModelParams};
