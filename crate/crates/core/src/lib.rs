//! Quantum and classical van der Pol oscillators.
//!
//! The quantum model is a harmonic oscillator with one-phonon gain (rate κ₁)
//! and two-phonon loss (rate κ₂); its classical counterpart is the noisy
//! amplitude equation `α̇ = α(κ₁ + 2κ₂ − 2κ₂|α|²) + ξ`. This crate provides
//! both sides and the estimators that make them comparable:
//!
//! - [`fock`]: truncated Fock-space operators and density matrices;
//! - [`lindblad`]: Liouvillian assembly, time evolution and exact steady states;
//! - [`wigner`]: Wigner functions, phase marginals and closed-form references;
//! - [`classical`]: the van der Pol ODE, Langevin ensembles and histogram estimators;
//! - [`meanfield`]: the self-consistent mean-field theory of globally coupled oscillators;
//! - [`ion`]: trapped-ion parameter mapping (Lamb-Dicke parameter, effective rates);
//! - [`export`]: CSV/JSON serialization of grids, distributions and phase diagrams.
//!
//! All rates are expressed in units of κ₁ except in [`ion`].

pub mod classical;
pub mod error;
pub mod export;
pub mod fock;
pub mod ion;
pub mod lindblad;
pub mod meanfield;
pub mod quadrature;
pub mod sparse;
pub mod wigner;

pub use error::{Result, VdpError};
pub use fock::{coherent_state, expectation, make_ladder_operators, tensor, DensityMatrix, FockOperator, FockSpace};
pub use lindblad::{build_liouvillian, evolve, steady_state, DissipatorSpec, HamiltonianSpec, Liouvillian};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
