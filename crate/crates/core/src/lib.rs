//! Secret key agreement from correlated sources by spectrum slicing.

pub mod bits;
pub mod bounds;
pub mod error;
pub mod hashing;
pub mod numeric;
pub mod prob;
pub mod protocol;
pub mod reconciliation;
pub mod rng;
pub mod source;
pub mod spectrum;

pub use error::{Error, Result};
