//! History Fock spaces on a finite periodic time lattice.
//!
//! The crate builds the operators of a space-time formulation of quantum
//! mechanics — time-translation generator, quantum actions, their
//! diagonalizing unitaries, physical subspaces, foliation and propagator
//! ratios, and the relativistic scalar-field action — and numerically
//! certifies the identities relating them. Everything runs at desk scale:
//! dense one-body matrices up to a few thousand, sparse many-body operators
//! up to the configured dimension bound.

pub mod error;
pub mod fock;
pub mod lattice;
pub mod linalg;
pub mod onebody;
pub mod physical;
pub mod quadratic;
pub mod relfield;
pub mod suite;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
