//! Discover the branches of a set-valued mapping hidden in `(x, y)` samples.
//!
//! A regressor trained with logcosh loss settles on the dominant branch of a
//! multi-valued dataset. Samples it fits well are claimed by that branch, the
//! rest are refit, and the loop repeats until little data is left.

pub mod cli;
pub mod error;
pub mod extraction;
pub mod loss;
pub mod metrics;
pub mod network;
pub mod synthdata;

pub use error::{Error, Result};
