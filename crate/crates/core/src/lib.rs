//! Computable pieces of the principal-symbol calculus for order-zero operators on
//! noncommutative tori, SU(2) and Moyal spaces: twisted torus arithmetic, sphere
//! polynomial calculus, symbol maps with compactness certificates, trace estimators
//! for log-divergent spectra, spin-block matrix models, and symplectic tooling.

pub mod dixmier;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod moyal;
pub mod sphere;
pub mod su2;
pub mod symbol;
pub mod symplectic;
pub mod torus;

pub use error::{Error, Result};
