//! Reference oracles for the test suites.
//!
//! Nothing in here depends on `schemagraph-core`: every oracle is a separate,
//! deliberately naive implementation so that agreement with the production code
//! means something.

pub mod closure;
pub mod family;
pub mod fixtures;
pub mod interpreter;
