//! Exponentiated-gradient reduction of fairness-constrained classification
//! to a sequence of weighted logistic fits.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::profile::FairKind;
use crate::solver::classifier::{LinearClassifier, RandomizedClassifier};
use crate::solver::logistic::fit_with_labels;
use crate::solver::SolverConfig;

/// Which output the trainer returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Uniform mixture over all rounds.
    #[default]
    Uniform,
    /// Uniform mixture over the first `t` rounds, with `t` minimizing an
    /// estimate of the Lagrangian duality gap.
    BestGap,
}

/// Moment constraints `|E[err | cell] - E[err | reference]| <= epsilon`.
///
/// Risk parity uses group cells against the whole sample. Conditional risk
/// parity uses `(group, label)` cells against their label slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSpec {
    pub kind: FairKind,
    pub epsilon: f64,
}

impl ConstraintSpec {
    pub fn new(kind: FairKind, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidArgument(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        Ok(ConstraintSpec { kind, epsilon })
    }

    pub fn equalized_odds(epsilon: f64) -> Result<Self> {
        ConstraintSpec::new(FairKind::ConditionalRiskParity, epsilon)
    }
}

/// Cell and reference-slice membership of every row.
struct Moments {
    cell_of: Vec<usize>,
    ref_of_cell: Vec<usize>,
    n_cell: Vec<f64>,
    n_ref: Vec<f64>,
}

impl Moments {
    fn new(dataset: &LabeledDataset, kind: FairKind) -> Result<Self> {
        let g = dataset.group_vocab().len();
        let l = dataset.label_vocab().len();
        let (n_cells, n_refs) = match kind {
            FairKind::RiskParity => (g, 1),
            FairKind::ConditionalRiskParity => (g * l, l),
        };
        let cell_of: Vec<usize> = (0..dataset.len())
            .map(|i| match kind {
                FairKind::RiskParity => dataset.group(i),
                FairKind::ConditionalRiskParity => dataset.group(i) * l + dataset.label(i),
            })
            .collect();
        let ref_of_cell: Vec<usize> = (0..n_cells)
            .map(|k| match kind {
                FairKind::RiskParity => 0,
                FairKind::ConditionalRiskParity => k % l,
            })
            .collect();
        let mut n_cell = vec![0.0; n_cells];
        let mut n_ref = vec![0.0; n_refs];
        for &k in &cell_of {
            n_cell[k] += 1.0;
            n_ref[ref_of_cell[k]] += 1.0;
        }
        if let Some(k) = n_cell.iter().position(|&c| c == 0.0) {
            let (group, disc) = match kind {
                FairKind::RiskParity => (dataset.group_vocab()[k].clone(), "all".to_string()),
                FairKind::ConditionalRiskParity => {
                    (dataset.group_vocab()[k / l].clone(), dataset.label_vocab()[k % l].clone())
                }
            };
            return Err(Error::EmptyCell { group, disc });
        }
        Ok(Moments {
            cell_of,
            ref_of_cell,
            n_cell,
            n_ref,
        })
    }

    fn n_cells(&self) -> usize {
        self.n_cell.len()
    }

    /// Per-cell error rates of a deterministic classifier.
    fn cell_errors(&self, dataset: &LabeledDataset, h: &LinearClassifier) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cells()];
        for i in 0..dataset.len() {
            if h.predict(dataset.row(i)) != dataset.label(i) {
                sums[self.cell_of[i]] += 1.0;
            }
        }
        sums.iter().zip(&self.n_cell).map(|(s, n)| s / n).collect()
    }

    /// Overall error and constraint values `gamma_k` from cell error rates.
    fn summarize(&self, cell_err: &[f64]) -> (f64, Vec<f64>) {
        let n: f64 = self.n_cell.iter().sum();
        let mut ref_err = vec![0.0; self.n_ref.len()];
        let mut total = 0.0;
        for (k, &r) in cell_err.iter().enumerate() {
            ref_err[self.ref_of_cell[k]] += r * self.n_cell[k];
            total += r * self.n_cell[k];
        }
        for (e, n) in ref_err.iter_mut().zip(&self.n_ref) {
            *e /= n;
        }
        let gamma = cell_err
            .iter()
            .enumerate()
            .map(|(k, &r)| r - ref_err[self.ref_of_cell[k]])
            .collect();
        (total / n, gamma)
    }
}

/// `lambda_j = B exp(theta_j) / (1 + sum exp(theta))`.
fn multipliers(theta: &[f64], bound: f64) -> Vec<f64> {
    let m = theta.iter().copied().fold(0.0, f64::max);
    let e: Vec<f64> = theta.iter().map(|t| (t - m).exp()).collect();
    let denom = (-m).exp() + e.iter().sum::<f64>();
    e.iter().map(|v| bound * v / denom).collect()
}

/// Lagrangian `err + sum_j lambda_j (g_j - epsilon)` with `g = (gamma, -gamma)`.
fn lagrangian(err: f64, gamma: &[f64], lambda: &[f64], eps: f64) -> f64 {
    err + gamma
        .iter()
        .enumerate()
        .map(|(k, g)| lambda[2 * k] * (g - eps) + lambda[2 * k + 1] * (-g - eps))
        .sum::<f64>()
}

/// Trains a randomized classifier under `constraint`.
///
/// Each round the multipliers set a signed cost per row; the best response is
/// a logistic fit with weights `|c_i|` and labels flipped where `c_i < 0`. The
/// multipliers then move along the observed constraint violations with step
/// `eta0 / (B sqrt(t))`.
pub fn train_constrained(
    dataset: &LabeledDataset,
    constraint: &ConstraintSpec,
    config: &SolverConfig,
) -> Result<RandomizedClassifier> {
    config.validate()?;
    ConstraintSpec::new(constraint.kind, constraint.epsilon)?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let moments = Moments::new(dataset, constraint.kind)?;
    let k = moments.n_cells();
    let n = dataset.len() as f64;
    let eps = constraint.epsilon;
    let bound = config.bound_for(eps);

    let mut theta = vec![0.0; 2 * k];
    let mut members = Vec::with_capacity(config.iterations);
    let mut rounds: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(config.iterations);
    let mut weights = vec![0.0; dataset.len()];
    let mut labels = vec![0usize; dataset.len()];
    for t in 1..=config.iterations {
        let lambda = multipliers(&theta, bound);
        let mu: Vec<f64> = (0..k).map(|c| lambda[2 * c] - lambda[2 * c + 1]).collect();
        let mut mu_ref = vec![0.0; moments.n_ref.len()];
        for (c, &m) in mu.iter().enumerate() {
            mu_ref[moments.ref_of_cell[c]] += m;
        }
        for i in 0..dataset.len() {
            let c = moments.cell_of[i];
            let r = moments.ref_of_cell[c];
            let cost = 1.0 / n + mu[c] / moments.n_cell[c] - mu_ref[r] / moments.n_ref[r];
            weights[i] = cost.abs();
            labels[i] = if cost < 0.0 { 1 - dataset.label(i) } else { dataset.label(i) };
        }
        let h = if weights.iter().any(|&w| w > 0.0) {
            fit_with_labels(dataset, &weights, Some(&labels), config)?.classifier
        } else {
            LinearClassifier::constant(dataset.n_features(), 0)
        };
        let cell_err = moments.cell_errors(dataset, &h);
        let (err, gamma) = moments.summarize(&cell_err);
        let eta = config.eta0 / (bound * (t as f64).sqrt());
        for (c, g) in gamma.iter().enumerate() {
            theta[2 * c] += eta * (g - eps);
            theta[2 * c + 1] += eta * (-g - eps);
        }
        log::debug!(
            "round {t}: err {err:.4}, max |gamma| {:.4}",
            gamma.iter().fold(0.0f64, |a, g| a.max(g.abs()))
        );
        members.push(h);
        rounds.push((err, cell_err, lambda));
    }

    let keep = match config.selection {
        Selection::Uniform => members.len(),
        Selection::BestGap => best_gap_prefix(&moments, &rounds, eps, bound),
    };
    members.truncate(keep);
    RandomizedClassifier::uniform(members)
}

/// Length of the prefix whose averaged play has the smallest duality-gap
/// estimate. The best response to the averaged multipliers is approximated
/// by the best round classifier.
fn best_gap_prefix(moments: &Moments, rounds: &[(f64, Vec<f64>, Vec<f64>)], eps: f64, bound: f64) -> usize {
    let k = moments.n_cells();
    let mut cell_sum = vec![0.0; k];
    let mut lambda_sum = vec![0.0; 2 * k];
    let mut best = (f64::INFINITY, rounds.len());
    for (t, (_, cell_err, lambda)) in rounds.iter().enumerate() {
        for (s, v) in cell_sum.iter_mut().zip(cell_err) {
            *s += v;
        }
        for (s, v) in lambda_sum.iter_mut().zip(lambda) {
            *s += v;
        }
        let m = (t + 1) as f64;
        let q_cells: Vec<f64> = cell_sum.iter().map(|s| s / m).collect();
        let lam_bar: Vec<f64> = lambda_sum.iter().map(|s| s / m).collect();
        let (q_err, q_gamma) = moments.summarize(&q_cells);
        let worst = q_gamma.iter().fold(0.0f64, |a, g| a.max(g.abs() - eps));
        let upper = q_err + bound * worst.max(0.0);
        let mid = lagrangian(q_err, &q_gamma, &lam_bar, eps);
        let lower = rounds[..=t]
            .iter()
            .map(|(_, ce, _)| {
                let (e, g) = moments.summarize(ce);
                lagrangian(e, &g, &lam_bar, eps)
            })
            .fold(f64::INFINITY, f64::min);
        let gap = (upper - mid).max(mid - lower);
        if gap < best.0 {
            best = (gap, t + 1);
        }
    }
    best.1
}
