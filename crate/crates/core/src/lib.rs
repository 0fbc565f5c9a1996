//! Numerical laboratory for projected state ensembles with injected classical
//! randomness.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`]: dense complex matrices, statevectors, Hermitian eigensolver,
//!   bath projection and Schatten norms.
//! * [`random`]: seeded, splittable random streams; Haar unitaries, disorder,
//!   classical initial-state sources.
//! * [`model`]: the mixed-field Ising chain, disorder, Loschmidt echo and
//!   level-statistics diagnostics.
//! * [`permutations`]: symmetric-group utilities and the Weingarten oracle for
//!   exact Haar averages.
//! * [`ensemble`]: projected ensembles, moment operators, frame potentials and
//!   closed-form benchmarks.
//! * [`shadows`]: classical shadow tomography driven by projected ensembles.
//!
//! Qubit ordering is fixed crate-wide: qubit 0 is the most significant bit of
//! an amplitude index, and subsystem A occupies the leading qubits.

pub mod ensemble;
pub mod error;
pub mod model;
pub mod permutations;
pub mod qcore;
pub mod random;
pub mod shadows;

pub use error::{Error, Result};
pub use num_complex::Complex64;
