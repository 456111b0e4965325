//! Logistic base learner, randomized classifiers and the constrained trainer.

mod classifier;
mod eval;
mod logistic;
mod reductions;

pub use classifier::{LinearClassifier, RandomizedClassifier};
pub use eval::{evaluate, expected_losses, Evaluation};
pub use logistic::{weighted_logistic_fit, LogisticFit};
pub use reductions::{train_constrained, ConstraintSpec, Selection};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};

pub const MAX_BOUND: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Rounds of the exponentiated-gradient loop.
    pub iterations: usize,
    /// Bound `B` on the total multiplier mass; `None` uses `1 / epsilon`,
    /// capped at [`MAX_BOUND`].
    pub bound: Option<f64>,
    /// Round `t` steps by `eta0 / (B sqrt(t))`.
    pub eta0: f64,
    pub l2: f64,
    pub max_newton_steps: usize,
    /// Gradient-norm tolerance of the Newton solver.
    pub tol: f64,
    pub selection: Selection,
    /// Carried for reproducibility records; training itself is deterministic.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            iterations: 25,
            bound: None,
            eta0: 2.0,
            l2: 1e-6,
            max_newton_steps: 100,
            tol: 1e-8,
            selection: Selection::Uniform,
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// Multiplier bound used for a constraint slack of `epsilon`.
    pub fn bound_for(&self, epsilon: f64) -> f64 {
        self.bound.unwrap_or_else(|| (1.0 / epsilon).min(MAX_BOUND))
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        for (name, v) in [("bound", self.bound.unwrap_or(1.0)), ("eta0", self.eta0), ("tol", self.tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::InvalidArgument(format!("l2 must be >= 0, got {}", self.l2)));
        }
        Ok(())
    }
}

/// A single logistic fit with uniform row weights.
pub fn train_unconstrained(dataset: &LabeledDataset, config: &SolverConfig) -> Result<RandomizedClassifier> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let fit = weighted_logistic_fit(dataset, &vec![1.0; dataset.len()], config)?;
    Ok(RandomizedClassifier::single(fit.classifier))
}
