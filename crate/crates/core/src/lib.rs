//! Random coding error exponents for binary linear codes restricted to a
//! constant-composition subcode and decoded over the full code with an
//! additive metric, the metric that closes the gap to the
//! constant-composition exponent, and a Monte-Carlo simulator of the
//! underlying code ensemble.

pub mod curve;
pub mod dmc;
pub mod error;
pub mod exponent;
pub mod optimizer;
pub mod search;
pub mod sim;

pub use error::{Error, Result};
