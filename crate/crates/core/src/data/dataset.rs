use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::profile::{format_f64, parse_f64};

/// Rows of `(features, group, label)` with explicit vocabularies.
///
/// Features are stored row-major. Group and label entries index into
/// `group_vocab` and `label_vocab`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    feature_names: Vec<String>,
    features: Vec<f64>,
    groups: Vec<usize>,
    labels: Vec<usize>,
    group_vocab: Vec<String>,
    label_vocab: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<f64>,
        groups: Vec<usize>,
        labels: Vec<usize>,
        group_vocab: Vec<String>,
        label_vocab: Vec<String>,
    ) -> Result<Self> {
        let n = groups.len();
        let d = feature_names.len();
        if labels.len() != n || features.len() != n * d {
            return Err(Error::Shape(format!(
                "{n} group entries, {} labels, {} feature values for {d} features",
                labels.len(),
                features.len()
            )));
        }
        if group_vocab.is_empty() || label_vocab.is_empty() {
            return Err(Error::Schema("empty group or label vocabulary".into()));
        }
        if let Some(&g) = groups.iter().find(|&&g| g >= group_vocab.len()) {
            return Err(Error::Schema(format!("group index {g} outside vocabulary")));
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= label_vocab.len()) {
            return Err(Error::Schema(format!("label index {y} outside vocabulary")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features".into()));
        }
        Ok(LabeledDataset {
            feature_names,
            features,
            groups,
            labels,
            group_vocab,
            label_vocab,
        })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.features[i * d..(i + 1) * d]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub(crate) fn features_mut(&mut self) -> &mut [f64] {
        &mut self.features
    }

    #[inline]
    pub fn group(&self, i: usize) -> usize {
        self.groups[i]
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn group_vocab(&self) -> &[String] {
        &self.group_vocab
    }

    pub fn label_vocab(&self) -> &[String] {
        &self.label_vocab
    }

    /// New dataset holding the given rows, in the given order. Vocabularies
    /// are kept as they are.
    pub fn subset(&self, rows: &[usize]) -> LabeledDataset {
        let d = self.n_features();
        let mut features = Vec::with_capacity(rows.len() * d);
        for &i in rows {
            features.extend_from_slice(self.row(i));
        }
        LabeledDataset {
            feature_names: self.feature_names.clone(),
            features,
            groups: rows.iter().map(|&i| self.groups[i]).collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            group_vocab: self.group_vocab.clone(),
            label_vocab: self.label_vocab.clone(),
        }
    }

    /// Row indices grouped by `(group, label)`, indexed `group * n_labels + label`.
    pub fn rows_by_cell(&self) -> Vec<Vec<usize>> {
        let nl = self.label_vocab.len();
        let mut cells = vec![Vec::new(); self.group_vocab.len() * nl];
        for i in 0..self.len() {
            cells[self.groups[i] * nl + self.labels[i]].push(i);
        }
        cells
    }

    /// Writes `features..., group, label` with a header row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.feature_names.clone();
        header.push("group".into());
        header.push("label".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.row(i).iter().map(|&v| format_f64(v)).collect();
            rec.push(self.group_vocab[self.groups[i]].clone());
            rec.push(self.label_vocab[self.labels[i]].clone());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the layout written by [`LabeledDataset::write_csv`]. Vocabularies
    /// are the sorted distinct values, unless given explicitly.
    pub fn read_csv<R: Read>(
        reader: R,
        group_vocab: Option<Vec<String>>,
        label_vocab: Option<Vec<String>>,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        let k = header.len();
        if k < 2 || &header[k - 2] != "group" || &header[k - 1] != "label" {
            return Err(Error::parse(1, "last two columns must be `group,label`"));
        }
        let feature_names: Vec<String> = header.iter().take(k - 2).map(str::to_string).collect();
        let mut features = Vec::new();
        let mut raw_groups = Vec::new();
        let mut raw_labels = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() != k {
                return Err(Error::parse(line, format!("expected {k} fields, found {}", rec.len())));
            }
            for f in rec.iter().take(k - 2) {
                features.push(parse_f64(f, line)?);
            }
            raw_groups.push(rec[k - 2].to_string());
            raw_labels.push(rec[k - 1].to_string());
        }
        let group_vocab = group_vocab.unwrap_or_else(|| sorted_distinct(&raw_groups));
        let label_vocab = label_vocab.unwrap_or_else(|| sorted_distinct(&raw_labels));
        let lookup = |vocab: &[String], v: &str, what: &str| {
            vocab
                .iter()
                .position(|x| x == v)
                .ok_or_else(|| Error::Schema(format!("{what} `{v}` not in vocabulary")))
        };
        let groups = raw_groups
            .iter()
            .map(|g| lookup(&group_vocab, g, "group"))
            .collect::<Result<_>>()?;
        let labels = raw_labels
            .iter()
            .map(|y| lookup(&label_vocab, y, "label"))
            .collect::<Result<_>>()?;
        LabeledDataset::new(feature_names, features, groups, labels, group_vocab, label_vocab)
    }
}

pub(crate) fn sorted_distinct(values: &[String]) -> Vec<String> {
    let mut v = values.to_vec();
    v.sort();
    v.dedup();
    v
}
