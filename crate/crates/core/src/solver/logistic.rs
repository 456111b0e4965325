use nalgebra::{DMatrix, DVector};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::solver::classifier::LinearClassifier;
use crate::solver::SolverConfig;

/// Outcome of [`weighted_logistic_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub classifier: LinearClassifier,
    /// Every positively weighted row had the same label; the classifier is
    /// the constant predictor of that label.
    pub degenerate: bool,
    pub newton_steps: usize,
    pub converged: bool,
}

#[inline]
fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

#[inline]
fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Newton's method with backtracking on
/// `sum_i w_i logloss_i / sum_i w_i + (l2 / 2) |theta|^2`, where `theta`
/// includes the bias. Labels are the dataset's label indices (0 or 1).
pub fn weighted_logistic_fit(
    dataset: &LabeledDataset,
    row_weights: &[f64],
    config: &SolverConfig,
) -> Result<LogisticFit> {
    fit_with_labels(dataset, row_weights, None, config)
}

/// As [`weighted_logistic_fit`], with `labels` overriding the dataset's.
pub(crate) fn fit_with_labels(
    dataset: &LabeledDataset,
    row_weights: &[f64],
    labels: Option<&[usize]>,
    config: &SolverConfig,
) -> Result<LogisticFit> {
    let n = dataset.len();
    let d = dataset.n_features();
    if row_weights.len() != n {
        return Err(Error::Shape(format!("{} weights for {n} rows", row_weights.len())));
    }
    if row_weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument("row weights must be finite and nonnegative".into()));
    }
    if dataset.label_vocab().len() > 2 {
        return Err(Error::Unsupported("logistic fit needs binary labels".into()));
    }
    let label = |i: usize| labels.map_or(dataset.label(i), |l| l[i]);
    let total: f64 = row_weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("all row weights are zero".into()));
    }

    let active: Vec<usize> = (0..n).filter(|&i| row_weights[i] > 0.0).collect();
    let first = label(active[0]);
    if active.iter().all(|&i| label(i) == first) {
        return Ok(LogisticFit {
            classifier: LinearClassifier::constant(d, first),
            degenerate: true,
            newton_steps: 0,
            converged: true,
        });
    }

    let p = d + 1;
    let lambda = config.l2;
    let w_norm: Vec<f64> = active.iter().map(|&i| row_weights[i] / total).collect();
    let y: Vec<f64> = active.iter().map(|&i| label(i) as f64).collect();
    let score = |theta: &[f64], i: usize| -> f64 {
        let x = dataset.row(i);
        x.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() + theta[d]
    };
    let objective = |theta: &[f64]| -> f64 {
        let mut f = 0.0;
        for (k, &i) in active.iter().enumerate() {
            let s = score(theta, i);
            f += w_norm[k] * (softplus(s) - y[k] * s);
        }
        f + 0.5 * lambda * theta.iter().map(|t| t * t).sum::<f64>()
    };

    let mut theta = vec![0.0; p];
    let mut f = objective(&theta);
    let mut steps = 0;
    let mut converged = false;
    for _ in 0..config.max_newton_steps {
        let mut grad = DVector::<f64>::zeros(p);
        let mut hess = DMatrix::<f64>::zeros(p, p);
        for (k, &i) in active.iter().enumerate() {
            let x = dataset.row(i);
            let s = score(&theta, i);
            let mu = sigmoid(s);
            let r = w_norm[k] * (mu - y[k]);
            let h = w_norm[k] * mu * (1.0 - mu);
            for a in 0..p {
                let xa = if a < d { x[a] } else { 1.0 };
                grad[a] += r * xa;
                for b in 0..=a {
                    let xb = if b < d { x[b] } else { 1.0 };
                    hess[(a, b)] += h * xa * xb;
                }
            }
        }
        for a in 0..p {
            grad[a] += lambda * theta[a];
            hess[(a, a)] += lambda;
            for b in 0..a {
                hess[(b, a)] = hess[(a, b)];
            }
        }
        if grad.norm() <= config.tol {
            converged = true;
            break;
        }
        let Some(chol) = hess.cholesky() else {
            log::warn!("logistic Hessian not positive definite; stopping early");
            break;
        };
        let dir = chol.solve(&(-&grad));
        let slope = grad.dot(&dir);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(dir.iter()).map(|(a, b)| a + t * b).collect();
            let fc = objective(&cand);
            if fc <= f + 1e-4 * t * slope {
                theta = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        steps += 1;
        if !accepted {
            // no further decrease representable in floating point
            converged = grad.norm() <= config.tol.sqrt();
            break;
        }
    }
    let bias = theta[d];
    theta.truncate(d);
    Ok(LogisticFit {
        classifier: LinearClassifier::new(theta, bias)?,
        degenerate: false,
        newton_steps: steps,
        converged,
    })
}
