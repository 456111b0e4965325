//! Subpopulation-shifted training sets built from a target-domain sample.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::profile::{cell_indices, GroupMarginal};

#[derive(Debug, Clone, PartialEq)]
pub enum BiasKind {
    /// Rows of `(group, label)` survive independently with probability
    /// `keep_prob`; every other row is kept.
    UnderRepresentation {
        group: String,
        label: String,
        keep_prob: f64,
    },
    /// Stratified resampling to the cell masses of `target`.
    MarginalResample { target: GroupMarginal, n_out: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSpec {
    pub kind: BiasKind,
    pub seed: u64,
}

impl BiasSpec {
    pub fn apply(&self, dataset: &LabeledDataset) -> Result<LabeledDataset> {
        match &self.kind {
            BiasKind::UnderRepresentation {
                group,
                label,
                keep_prob,
            } => underrepresentation_filter(dataset, group, label, *keep_prob, self.seed),
            BiasKind::MarginalResample { target, n_out } => {
                Ok(reweight_to_marginal(dataset, target, *n_out, self.seed)?.dataset)
            }
        }
    }
}

fn check_keep_prob(keep_prob: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&keep_prob) {
        return Err(Error::InvalidArgument(format!("keep_prob {keep_prob} outside [0, 1]")));
    }
    Ok(())
}

/// Drops each `(group, label)` row independently with probability
/// `1 - keep_prob`.
pub fn underrepresentation_filter(
    dataset: &LabeledDataset,
    group: &str,
    label: &str,
    keep_prob: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    check_keep_prob(keep_prob)?;
    let g = dataset
        .group_vocab()
        .iter()
        .position(|x| x == group)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown group `{group}`")))?;
    let y = dataset
        .label_vocab()
        .iter()
        .position(|x| x == label)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown label `{label}`")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let keep: Vec<usize> = (0..dataset.len())
        .filter(|&i| {
            if dataset.group(i) == g && dataset.label(i) == y {
                rng.random::<f64>() < keep_prob
            } else {
                true
            }
        })
        .collect();
    Ok(dataset.subset(&keep))
}

/// Limiting joint after under-representation filtering:
/// `source * (1 - (1 - keep_prob) * 1{cell})`, renormalized.
pub fn underrepresentation_law(
    source: &GroupMarginal,
    group: &str,
    disc: &str,
    keep_prob: f64,
) -> Result<GroupMarginal> {
    check_keep_prob(keep_prob)?;
    let space = source.space();
    let a = space
        .group_index(group)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown group `{group}`")))?;
    let v = space
        .disc_index(disc)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown disc value `{disc}`")))?;
    let target = space.index(a, v);
    let weights = source
        .probs()
        .iter()
        .enumerate()
        .map(|(c, &p)| if c == target { p * keep_prob } else { p })
        .collect();
    GroupMarginal::from_weights(space.clone(), weights)
}

/// Splits `total` into integer parts proportional to `weights`: floors
/// first, then one extra unit per largest fractional part. Equal fractional
/// parts (within 1e-9) go to the lower index.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut parts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = parts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        let (fi, fj) = (exact[i] - exact[i].floor(), exact[j] - exact[j].floor());
        if (fi - fj).abs() <= 1e-9 {
            i.cmp(&j)
        } else {
            fj.total_cmp(&fi)
        }
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        parts[i] += 1;
    }
    parts
}

#[derive(Debug, Clone)]
pub struct Resampled {
    pub dataset: LabeledDataset,
    /// Cells (flat index in the target space) that needed replacement.
    pub with_replacement: Vec<usize>,
}

/// Stratified resampling to cell counts `largest_remainder(n_out, target)`.
/// Cells are drawn without replacement when the source has enough rows,
/// otherwise with replacement (logged).
pub fn reweight_to_marginal(
    dataset: &LabeledDataset,
    target: &GroupMarginal,
    n_out: usize,
    seed: u64,
) -> Result<Resampled> {
    let space = target.space();
    let cells = cell_indices(space, dataset)?;
    let mut by_cell = vec![Vec::new(); space.n_cells()];
    for (i, &c) in cells.iter().enumerate() {
        by_cell[c].push(i);
    }
    for (c, &p) in target.probs().iter().enumerate() {
        if p > 0.0 && by_cell[c].is_empty() {
            return Err(Error::EmptyCell {
                group: space.groups()[c / space.n_disc()].clone(),
                disc: space.disc_values()[c % space.n_disc()].clone(),
            });
        }
    }
    let quotas = largest_remainder(n_out, target.probs());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_out);
    let mut with_replacement = Vec::new();
    for (c, (&q, pool)) in quotas.iter().zip(&by_cell).enumerate() {
        if q == 0 {
            continue;
        }
        if q <= pool.len() {
            let mut picked: Vec<usize> = sample_indices(&mut rng, pool.len(), q)
                .into_iter()
                .map(|k| pool[k])
                .collect();
            picked.sort_unstable();
            rows.extend(picked);
        } else {
            log::warn!(
                "cell {c}: {q} rows requested from {} available, sampling with replacement",
                pool.len()
            );
            with_replacement.push(c);
            rows.extend((0..q).map(|_| pool[rng.random_range(0..pool.len())]));
        }
    }
    rows.sort_unstable();
    Ok(Resampled {
        dataset: dataset.subset(&rows),
        with_replacement,
    })
}
