//! Repeated split / train / evaluate runs on a tabular dataset.

use fairshift_core::data::{make_pstar_testset, read_csv_raw, split_train_test, RawTabular, Standardizer};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::results::{sort_rows, ResultRow};
use crate::seeds::{cell_seed, stream};
use crate::simulate::train_pair;

/// Reads the configured dataset, or explains how to obtain it.
pub fn load_raw(cfg: &ExperimentConfig) -> Result<RawTabular> {
    let t = &cfg.tabular;
    let schema = t.schema()?;
    let name = t.dataset.name();
    let path = t.resolve_path().ok_or_else(|| {
        HarnessError::Data(format!("no {name} dataset configured: {}", t.dataset.download_hint()))
    })?;
    if !path.exists() {
        return Err(HarnessError::Data(format!(
            "{name} dataset not found at {}: {}",
            path.display(),
            t.dataset.download_hint()
        )));
    }
    let raw = read_csv_raw(&path, &schema).map_err(HarnessError::data(path.display()))?;
    if raw.dropped_rows > 0 {
        log::info!("{}: dropped {} rows with missing values", path.display(), raw.dropped_rows);
    }
    Ok(raw)
}

fn run_rep(cfg: &ExperimentConfig, raw: &RawTabular, rep: usize) -> Result<Vec<ResultRow>> {
    let t = &cfg.tabular;
    let seed = cell_seed(cfg.seed, 0, rep);
    let ctx = |what: &str| format!("tabular repetition {rep}: {what}");
    let (mut train, mut test) =
        split_train_test(&raw.dataset, t.train_ratio, stream(seed, 0)).map_err(HarnessError::data(ctx("split")))?;
    // statistics come from the training split only
    let st = Standardizer::fit(&train, &raw.numeric_columns).map_err(HarnessError::data(ctx("standardize")))?;
    st.apply(&mut train).map_err(HarnessError::data(ctx("standardize")))?;
    st.apply(&mut test).map_err(HarnessError::data(ctx("standardize")))?;
    let test_star = make_pstar_testset(&test, stream(seed, 1)).map_err(HarnessError::data(ctx("P* test set")))?;
    let solver = cfg.solver.to_config(t.iterations, seed);
    train_pair(
        "tabular",
        t.dataset.name(),
        0,
        rep,
        &train,
        &test_star,
        &test,
        [t.epsilon_baseline, t.epsilon_fair()],
        &solver,
    )
}

pub fn run_tabular(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let raw = load_raw(cfg)?;
    run_tabular_on(cfg, &raw)
}

/// As [`run_tabular`] on already-parsed data.
pub fn run_tabular_on(cfg: &ExperimentConfig, raw: &RawTabular) -> Result<Vec<ResultRow>> {
    let nested: Vec<Vec<ResultRow>> = (0..cfg.tabular.repetitions)
        .into_par_iter()
        .map(|rep| run_rep(cfg, raw, rep))
        .collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = nested.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}
