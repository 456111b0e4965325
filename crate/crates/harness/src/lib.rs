//! Config-driven experiment runner: synthetic sweeps, geometry checks,
//! tabular runs and audits of external risk tables.

pub mod audit;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod results;
pub mod seeds;
pub mod simulate;
pub mod tabular;

pub use error::{HarnessError, Result};
