//! Number field censuses, quadratic class-group torsion and an exact
//! Chebyshev sieve engine.

pub mod arith;
pub mod classgroup;
pub mod cubic;
pub mod densities;
mod error;
pub mod quadratic;
pub mod sieve;
pub mod torsion;

pub use error::{Error, Result};
