//! CSV ingestion for tabular datasets with protected attributes.

use std::path::Path;

use crate::data::dataset::sorted_distinct;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};

/// A protected column. With `privileged` set, the column is binarized into
/// `privileged` and `non-<privileged>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtectedColumn {
    pub name: String,
    pub privileged: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularSchema {
    pub numeric: Vec<String>,
    /// One-hot encoded, one column per observed level.
    pub categorical: Vec<String>,
    /// Combined into one group attribute by cross product.
    pub protected: Vec<ProtectedColumn>,
    pub label: String,
    pub positive_label: String,
}

impl TabularSchema {
    pub fn validate(&self) -> Result<()> {
        let mut all: Vec<&str> = self
            .numeric
            .iter()
            .chain(&self.categorical)
            .map(String::as_str)
            .collect();
        all.extend(self.protected.iter().map(|p| p.name.as_str()));
        all.push(&self.label);
        let mut sorted = all.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Schema(format!("column `{}` used more than once", w[0])));
        }
        if self.protected.is_empty() {
            return Err(Error::Schema("at least one protected column is required".into()));
        }
        if self.numeric.is_empty() && self.categorical.is_empty() {
            return Err(Error::Schema("no feature columns".into()));
        }
        Ok(())
    }
}

/// Column-wise standardization fitted on one dataset and applied to others.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    columns: Vec<usize>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(dataset: &LabeledDataset, columns: &[usize]) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = dataset.len() as f64;
        let mut means = Vec::with_capacity(columns.len());
        let mut sds = Vec::with_capacity(columns.len());
        for &c in columns {
            if c >= dataset.n_features() {
                return Err(Error::Shape(format!("feature index {c} out of range")));
            }
            let mean = (0..dataset.len()).map(|i| dataset.row(i)[c]).sum::<f64>() / n;
            let var = (0..dataset.len())
                .map(|i| (dataset.row(i)[c] - mean).powi(2))
                .sum::<f64>()
                / n;
            means.push(mean);
            // constant columns are centred only
            sds.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Ok(Standardizer {
            columns: columns.to_vec(),
            means,
            sds,
        })
    }

    pub fn apply(&self, dataset: &mut LabeledDataset) -> Result<()> {
        let d = dataset.n_features();
        if let Some(&c) = self.columns.iter().find(|&&c| c >= d) {
            return Err(Error::Shape(format!("feature index {c} out of range")));
        }
        for row in dataset.features_mut().chunks_mut(d) {
            for (k, &c) in self.columns.iter().enumerate() {
                row[c] = (row[c] - self.means[k]) / self.sds[k];
            }
        }
        Ok(())
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sds(&self) -> &[f64] {
        &self.sds
    }
}

/// Parsed tabular data before any standardization.
#[derive(Debug, Clone)]
pub struct RawTabular {
    pub dataset: LabeledDataset,
    /// Feature indices holding numeric (not one-hot) columns.
    pub numeric_columns: Vec<usize>,
    /// Rows dropped for missing values.
    pub dropped_rows: usize,
}

#[derive(Debug, Clone)]
pub struct TabularData {
    pub dataset: LabeledDataset,
    pub standardizer: Standardizer,
    pub dropped_rows: usize,
}

/// Loads and standardizes numeric columns with statistics fitted on the file.
pub fn load_csv(path: impl AsRef<Path>, schema: &TabularSchema) -> Result<TabularData> {
    let raw = read_csv_raw(path, schema)?;
    let standardizer = Standardizer::fit(&raw.dataset, &raw.numeric_columns)?;
    let mut dataset = raw.dataset;
    standardizer.apply(&mut dataset)?;
    Ok(TabularData {
        dataset,
        standardizer,
        dropped_rows: raw.dropped_rows,
    })
}

pub fn read_csv_raw(path: impl AsRef<Path>, schema: &TabularSchema) -> Result<RawTabular> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_tabular(file, schema)
}

fn is_missing(v: &str) -> bool {
    matches!(v, "" | "NA" | "?" | "nan" | "NaN")
}

pub fn parse_tabular<R: std::io::Read>(reader: R, schema: &TabularSchema) -> Result<RawTabular> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    };
    let numeric_idx: Vec<usize> = schema.numeric.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let cat_idx: Vec<usize> = schema.categorical.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let prot_idx: Vec<usize> = schema
        .protected
        .iter()
        .map(|p| col(&p.name))
        .collect::<Result<_>>()?;
    let label_idx = col(&schema.label)?;

    struct Row {
        line: u64,
        numeric: Vec<f64>,
        cats: Vec<String>,
        prot: Vec<String>,
        label: String,
    }
    let mut rows = Vec::new();
    let mut dropped = 0usize;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let used = numeric_idx
            .iter()
            .chain(&cat_idx)
            .chain(&prot_idx)
            .chain(std::iter::once(&label_idx));
        if used.clone().any(|&i| rec.get(i).map_or(true, is_missing)) {
            dropped += 1;
            continue;
        }
        let numeric = numeric_idx
            .iter()
            .map(|&i| crate::profile::parse_f64(&rec[i], line))
            .collect::<Result<Vec<_>>>()?;
        let prot = prot_idx
            .iter()
            .zip(&schema.protected)
            .map(|(&i, p)| match &p.privileged {
                Some(v) if rec[i] == *v => v.clone(),
                Some(v) => format!("non-{v}"),
                None => rec[i].to_string(),
            })
            .collect();
        rows.push(Row {
            line,
            numeric,
            cats: cat_idx.iter().map(|&i| rec[i].to_string()).collect(),
            prot,
            label: rec[label_idx].to_string(),
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dropped > 0 {
        log::info!("dropped {dropped} rows with missing values");
    }

    // label vocabulary: [negative, positive]
    let label_values = sorted_distinct(&rows.iter().map(|r| r.label.clone()).collect::<Vec<_>>());
    let negatives: Vec<&String> = label_values
        .iter()
        .filter(|v| **v != schema.positive_label)
        .collect();
    if negatives.len() > 1 {
        let bad = rows
            .iter()
            .find(|r| r.label != schema.positive_label && r.label != *negatives[0])
            .expect("a second negative value exists");
        return Err(Error::parse(
            bad.line,
            format!("label `{}` outside the two allowed values", bad.label),
        ));
    }
    let negative = negatives
        .first()
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("not-{}", schema.positive_label));
    let label_vocab = vec![negative, schema.positive_label.clone()];

    let cat_levels: Vec<Vec<String>> = (0..cat_idx.len())
        .map(|k| sorted_distinct(&rows.iter().map(|r| r.cats[k].clone()).collect::<Vec<_>>()))
        .collect();
    let prot_levels: Vec<Vec<String>> = (0..prot_idx.len())
        .map(|k| sorted_distinct(&rows.iter().map(|r| r.prot[k].clone()).collect::<Vec<_>>()))
        .collect();
    // cross product, first protected column varying slowest
    let mut group_vocab = vec![String::new()];
    for (k, levels) in prot_levels.iter().enumerate() {
        group_vocab = group_vocab
            .iter()
            .flat_map(|prefix| {
                levels.iter().map(move |l| {
                    if k == 0 {
                        l.clone()
                    } else {
                        format!("{prefix}/{l}")
                    }
                })
            })
            .collect();
    }

    let mut feature_names: Vec<String> = schema.numeric.clone();
    for (name, levels) in schema.categorical.iter().zip(&cat_levels) {
        feature_names.extend(levels.iter().map(|l| format!("{name}={l}")));
    }
    let numeric_columns: Vec<usize> = (0..schema.numeric.len()).collect();

    let mut features = Vec::with_capacity(rows.len() * feature_names.len());
    let mut groups = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for r in &rows {
        features.extend_from_slice(&r.numeric);
        for (value, levels) in r.cats.iter().zip(&cat_levels) {
            features.extend(levels.iter().map(|l| if l == value { 1.0 } else { 0.0 }));
        }
        let key = r.prot.join("/");
        groups.push(group_vocab.iter().position(|g| *g == key).expect("cross product covers rows"));
        labels.push(usize::from(r.label == schema.positive_label));
    }
    let dataset = LabeledDataset::new(feature_names, features, groups, labels, group_vocab, label_vocab)?;
    Ok(RawTabular {
        dataset,
        numeric_columns,
        dropped_rows: dropped,
    })
}
