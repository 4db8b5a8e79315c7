//! Exact Heisenberg-picture simulation of a driven, dissipative harmonic
//! oscillator coupled to a finite bosonic bath.
//!
//! The crate is organized around three independent routes to the same
//! physics, which cross-check one another:
//!
//! * [`propagator`] solves the single-excitation dynamics exactly (one
//!   hermitian eigendecomposition), producing the coefficient functions that
//!   drive everything else;
//! * [`density`] evaluates reduced-density-matrix elements from those
//!   coefficients through a compensated log-domain series, with closed forms
//!   for the degenerate limits;
//! * [`oracle`] brute-forces the truncated oscillator (x) bath Fock space and
//!   measures the same quantities by partial trace and two-point energy
//!   measurement.
//!
//! [`observables`], [`wigner`] and [`magnus`] build on the same coefficient
//! layer; [`sim`] bundles a validated scenario with its precomputed
//! propagator behind one facade.

pub mod density;
pub mod error;
pub mod magnus;
pub mod model;
pub mod numerics;
pub mod observables;
pub mod oracle;
pub mod par;
pub mod propagator;
pub mod sim;
pub mod verification;
pub mod wigner;

pub use error::{Error, Result};
pub use sim::Simulation;
