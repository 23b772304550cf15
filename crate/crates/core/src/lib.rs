//! Exact analysis of coupled Volterra-gyrostat low-order models.
//!
//! A model is a superposition of gyrostats over a shared set of modes. The
//! crate assembles the vector field, counts quadratic invariants, tests the
//! Jacobi identity for the associated Poisson matrix, extracts Casimirs,
//! builds Hamiltonian hierarchies and checks conservation numerically.

pub mod error;
pub mod exactmath;
pub mod glom;
pub mod hamiltonian;
pub mod hierarchy;
pub mod invariants;
pub mod simulate;

pub use error::{Error, Result};
