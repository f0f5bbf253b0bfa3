//! Phase-space analysis of sampled wavefunctions.
//!
//! The crate splits a wavefunction into amplitude and action, computes the
//! Bohm quantum potential and related fields, builds Fermi Hamiltonians and
//! quadratic Fermi sets, measures their symplectic capacities, and evolves
//! states under both the Schrödinger equation and its classical nonlinear
//! counterpart.

pub mod diff;
pub mod dynamics;
pub mod error;
pub mod fermi;
pub mod fft;
pub mod field;
pub mod grid;
pub mod interp;
pub mod io;
pub mod states;
pub mod symplectic;
pub mod verify;
pub mod wavefield;

pub use error::{Error, Result};
pub use field::{ScalarField, VectorField, WaveField};
pub use grid::{Grid, PhysicsParams};
pub use num_complex::Complex64;
pub use states::{Potential, StateKind, StateSpec};
pub use symplectic::QuadraticForm;
pub use verify::{Suite, SuiteReport, Verdict};
pub use wavefield::{CovarianceMatrix, PolarField};
