//! Fair risk minimization under subpopulation shift: risk profiles and fair
//! subspaces, polytope geometry with an LP engine, a reductions-based
//! constrained trainer, bias generators and data loaders.

pub mod bias;
pub mod data;
pub mod error;
pub mod geometry;
pub mod profile;
pub mod solver;

pub use error::{Error, Result};
