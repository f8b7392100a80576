//! Uhrig dynamical decoupling for small system + spin-bath models.
//!
//! Dense linear algebra on Hermitian operators, polarization-based
//! decompositions, UDD pulse schedules, seeded bath models, propagation under
//! delta and Gaussian pulses, and a brute-force check of the UDD product
//! identity.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod linalg;
pub mod models;
pub mod pulses;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
