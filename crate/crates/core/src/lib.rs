//! Finite-dimensional twisted and pseudo-Riemannian spectral triples.
//!
//! Each module builds concrete matrices for one layer of the theory and
//! exposes residual checks for the identities that hold there.

pub mod clifford;
pub mod error;
pub mod geometry;
pub mod krein;
pub mod linalg;
pub mod morphism;
pub mod product;

pub use error::{Error, Result};
