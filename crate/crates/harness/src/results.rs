//! Result rows, their CSV form and per-cell summaries.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Baseline,
    Fair,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Baseline => "baseline",
            ModelKind::Fair => "fair",
        }
    }
}

/// One trained model evaluated on both test sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub mode: String,
    pub repetition: usize,
    pub parameter: String,
    pub model: ModelKind,
    pub accuracy_on_pstar: f64,
    pub accuracy_on_ptilde: f64,
    pub fairness_gap: f64,
    /// Seconds spent training and evaluating.
    pub wall_time: f64,
    /// Position of `parameter` in its grid.
    #[serde(skip)]
    pub param_index: usize,
}

/// Sorts by `(parameter, repetition, model)`.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| (a.param_index, a.repetition, a.model).cmp(&(b.param_index, b.repetition, b.model)));
}

pub fn write_rows<W: Write>(writer: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows_file(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_rows(std::fs::File::create(path)?, rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> MeanSd {
        let n = values.len() as f64;
        if values.is_empty() {
            return MeanSd { mean: f64::NAN, sd: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanSd { mean, sd }
    }
}

impl std::fmt::Display for MeanSd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} ± {:.4}", self.mean, self.sd)
    }
}

/// Aggregate over repetitions for one `(parameter, model)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub parameter: String,
    pub model: ModelKind,
    pub n: usize,
    pub accuracy_on_pstar: MeanSd,
    pub accuracy_on_ptilde: MeanSd,
    pub fairness_gap: MeanSd,
    pub param_index: usize,
}

/// Summaries in `(parameter, model)` order; `rows` need not be sorted.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, ModelKind, &str)> = rows
        .iter()
        .map(|r| (r.param_index, r.model, r.parameter.as_str()))
        .collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(pi, model, parameter)| {
            let mut sel: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.param_index == pi && r.model == model)
                .collect();
            sel.sort_by_key(|r| r.repetition);
            let col = |f: fn(&ResultRow) -> f64| MeanSd::of(&sel.iter().map(|r| f(r)).collect::<Vec<_>>());
            SummaryRow {
                parameter: parameter.to_string(),
                model,
                n: sel.len(),
                accuracy_on_pstar: col(|r| r.accuracy_on_pstar),
                accuracy_on_ptilde: col(|r| r.accuracy_on_ptilde),
                fairness_gap: col(|r| r.fairness_gap),
                param_index: pi,
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "parameter",
        "model",
        "n",
        "accuracy_on_pstar_mean",
        "accuracy_on_pstar_sd",
        "accuracy_on_ptilde_mean",
        "accuracy_on_ptilde_sd",
        "fairness_gap_mean",
        "fairness_gap_sd",
    ])?;
    for s in rows {
        let mut rec = vec![s.parameter.clone(), s.model.name().to_string(), s.n.to_string()];
        for m in [s.accuracy_on_pstar, s.accuracy_on_ptilde, s.fairness_gap] {
            rec.push(m.mean.to_string());
            rec.push(m.sd.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn print_summary(title: &str, rows: &[SummaryRow]) {
    println!("{title}");
    println!("{:>10} {:>9} {:>4}  {:>17}  {:>17}  {:>17}", "parameter", "model", "n", "acc P*", "acc P~", "gap");
    for s in rows {
        println!(
            "{:>10} {:>9} {:>4}  {:>17}  {:>17}  {:>17}",
            s.parameter,
            s.model.name(),
            s.n,
            s.accuracy_on_pstar.to_string(),
            s.accuracy_on_ptilde.to_string(),
            s.fairness_gap.to_string()
        );
    }
}
