//! Synthetic sweep over the minority mass of the training distribution.

use std::time::Instant;

use fairshift_core::data::{gaussian_sample, minority_joint, GaussianSpec, LabeledDataset};
use fairshift_core::solver::{evaluate, train_constrained, ConstraintSpec, SolverConfig};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::results::{sort_rows, ModelKind, ResultRow};
use crate::seeds::{cell_seed, stream};

/// Minority mass of the unbiased target distribution.
pub const TARGET_P_MINOR: f64 = 0.25;

/// Trains the baseline and fair model on `train` and scores both test sets.
/// The fairness gap is measured on `test_star`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn train_pair(
    mode: &str,
    parameter: &str,
    param_index: usize,
    repetition: usize,
    train: &LabeledDataset,
    test_star: &LabeledDataset,
    test_tilde: &LabeledDataset,
    eps: [f64; 2],
    config: &SolverConfig,
) -> Result<Vec<ResultRow>> {
    let space = fairshift_core::profile::GroupSpace::new(
        train.group_vocab().to_vec(),
        train.label_vocab().to_vec(),
    )
    .map_err(HarnessError::data("group space"))?;
    let mut rows = Vec::with_capacity(2);
    for (model, epsilon) in [(ModelKind::Baseline, eps[0]), (ModelKind::Fair, eps[1])] {
        let context = format!("{mode} cell ({parameter}, repetition {repetition}, {})", model.name());
        let start = Instant::now();
        let spec = ConstraintSpec::equalized_odds(epsilon).map_err(|e| HarnessError::Config(e.to_string()))?;
        let m = train_constrained(train, &spec, config).map_err(HarnessError::data(&context))?;
        let star = evaluate(&m, test_star, &space).map_err(HarnessError::data(&context))?;
        let tilde = evaluate(&m, test_tilde, &space).map_err(HarnessError::data(&context))?;
        rows.push(ResultRow {
            mode: mode.to_string(),
            repetition,
            parameter: parameter.to_string(),
            model,
            accuracy_on_pstar: star.accuracy,
            accuracy_on_ptilde: tilde.accuracy,
            fairness_gap: star.gap,
            wall_time: start.elapsed().as_secs_f64(),
            param_index,
        });
    }
    Ok(rows)
}

fn run_cell(cfg: &ExperimentConfig, p_idx: usize, rep: usize) -> Result<Vec<ResultRow>> {
    let sim = &cfg.simulate;
    let p = sim.p_minor[p_idx];
    let seed = cell_seed(cfg.seed, p_idx, rep);
    let params = sim.design.into();
    let draw = |p_minor: f64, n: usize, k: u64| -> Result<LabeledDataset> {
        let joint = minority_joint(p_minor).map_err(|e| HarnessError::Config(e.to_string()))?;
        gaussian_sample(&GaussianSpec::with_params(params, joint, n, stream(seed, k)))
            .map_err(HarnessError::data(format!("sampling for p_minor {p}, repetition {rep}")))
    };
    let train = draw(p, sim.n_train, 0)?;
    let test_star = draw(TARGET_P_MINOR, sim.n_test, 1)?;
    let test_tilde = draw(p, sim.n_test, 2)?;
    let solver = cfg.solver.to_config(sim.iterations, seed);
    train_pair(
        "simulate",
        &p.to_string(),
        p_idx,
        rep,
        &train,
        &test_star,
        &test_tilde,
        [sim.epsilon_baseline, sim.epsilon_fair],
        &solver,
    )
}

/// All `(p_minor, repetition)` cells, run on the current rayon pool and
/// returned sorted.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let cells: Vec<(usize, usize)> = (0..cfg.simulate.p_minor.len())
        .flat_map(|p| (0..cfg.simulate.repetitions).map(move |r| (p, r)))
        .collect();
    let nested: Vec<Vec<ResultRow>> = cells
        .par_iter()
        .map(|&(p, r)| run_cell(cfg, p, r))
        .collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = nested.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}
