use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::profile::{cell_indices, empirical_risk_profile_masked, FairKind, GroupSpace, RiskProfile};
use crate::solver::classifier::RandomizedClassifier;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    /// Expected 0-1 loss per cell; zero where the cell has no rows.
    pub profile: RiskProfile,
    /// Cells with at least one row.
    pub present: Vec<bool>,
    /// Largest within-column spread over present cells (over all present
    /// cells for a risk-parity space).
    pub gap: f64,
}

/// Expected 0-1 loss of the mixture on every row.
pub fn expected_losses(model: &RandomizedClassifier, dataset: &LabeledDataset) -> Result<Vec<f64>> {
    if model.n_features() != dataset.n_features() {
        return Err(Error::Shape(format!(
            "model has {} features, dataset {}",
            model.n_features(),
            dataset.n_features()
        )));
    }
    Ok((0..dataset.len())
        .map(|i| model.expected_loss(dataset.row(i), dataset.label(i)))
        .collect())
}

/// Deterministic evaluation by expected (not sampled) mixture loss.
pub fn evaluate(model: &RandomizedClassifier, dataset: &LabeledDataset, space: &GroupSpace) -> Result<Evaluation> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let losses = expected_losses(model, dataset)?;
    // validates that every row maps into the space
    cell_indices(space, dataset)?;
    let (profile, present) = empirical_risk_profile_masked(&losses, dataset, space)?;
    let accuracy = 1.0 - losses.iter().sum::<f64>() / losses.len() as f64;
    let kind = if space.is_trivial_disc() {
        FairKind::RiskParity
    } else {
        FairKind::ConditionalRiskParity
    };
    let gap = masked_gap(&profile, &present, kind);
    Ok(Evaluation {
        accuracy,
        profile,
        present,
        gap,
    })
}

fn masked_gap(profile: &RiskProfile, present: &[bool], kind: FairKind) -> f64 {
    let space = profile.space();
    let spread = |cells: &mut dyn Iterator<Item = usize>| {
        let (lo, hi) = cells
            .filter(|&c| present[c])
            .map(|c| profile.values()[c])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi >= lo {
            hi - lo
        } else {
            0.0
        }
    };
    match kind {
        FairKind::RiskParity => spread(&mut (0..space.n_cells())),
        FairKind::ConditionalRiskParity => (0..space.n_disc())
            .map(|v| spread(&mut (0..space.n_groups()).map(|a| space.index(a, v))))
            .fold(0.0, f64::max),
    }
}
