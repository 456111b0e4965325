use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::bias::{largest_remainder, reweight_to_marginal};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::profile::{GroupMarginal, GroupSpace};

/// Stratified split by `(group, label)` cell. The train side holds
/// `round(ratio * n)` rows, allocated across cells by largest remainder.
pub fn split_train_test(
    dataset: &LabeledDataset,
    ratio: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidArgument(format!("split ratio {ratio} outside [0, 1]")));
    }
    let n = dataset.len();
    let n_train = (ratio * n as f64).round() as usize;
    let mut cells = dataset.rows_by_cell();
    let sizes: Vec<f64> = cells.iter().map(|c| c.len() as f64).collect();
    let quotas = if n == 0 {
        vec![0; cells.len()]
    } else {
        largest_remainder(n_train, &sizes)
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n - n_train);
    for (rows, &q) in cells.iter_mut().zip(&quotas) {
        rows.shuffle(&mut rng);
        let q = q.min(rows.len());
        train.extend_from_slice(&rows[..q]);
        test.extend_from_slice(&rows[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

/// Subsamples `test` so that every group has equal mass within each label
/// while the label marginal of `test` is preserved. The output is the largest
/// such sample drawable without replacement.
pub fn make_pstar_testset(test: &LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let space = GroupSpace::new(test.group_vocab().to_vec(), test.label_vocab().to_vec())?;
    let counts: Vec<usize> = test.rows_by_cell().iter().map(Vec::len).collect();
    let n_groups = space.n_groups();
    let n_labels = space.n_disc();
    let label_mass: Vec<f64> = (0..n_labels)
        .map(|y| (0..n_groups).map(|a| counts[a * n_labels + y]).sum::<usize>() as f64 / test.len() as f64)
        .collect();
    let weights: Vec<f64> = (0..space.n_cells())
        .map(|c| label_mass[c % n_labels] / n_groups as f64)
        .collect();
    let target = GroupMarginal::from_weights(space.clone(), weights)?;

    // largest n_out whose cell quotas all fit
    let mut n_out = counts
        .iter()
        .zip(target.probs())
        .filter(|(_, &p)| p > 0.0)
        .map(|(&c, &p)| (c as f64 / p).floor() as usize)
        .min()
        .unwrap_or(0);
    while n_out > 0 {
        let quotas = largest_remainder(n_out, target.probs());
        if quotas.iter().zip(&counts).all(|(q, c)| q <= c) {
            break;
        }
        n_out -= 1;
    }
    if n_out == 0 {
        let c = counts.iter().position(|&c| c == 0).unwrap_or(0);
        return Err(Error::EmptyCell {
            group: space.groups()[c / n_labels].clone(),
            disc: space.disc_values()[c % n_labels].clone(),
        });
    }
    Ok(reweight_to_marginal(test, &target, n_out, seed)?.dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counted(cells: &[(usize, usize, usize)]) -> LabeledDataset {
        let mut groups = Vec::new();
        let mut labels = Vec::new();
        for &(a, y, n) in cells {
            groups.extend(std::iter::repeat(a).take(n));
            labels.extend(std::iter::repeat(y).take(n));
        }
        let n = groups.len();
        LabeledDataset::new(
            vec!["x".into()],
            (0..n).map(|i| i as f64).collect(),
            groups,
            labels,
            (0..4).map(|a| format!("g{a}")).collect(),
            vec!["0".into(), "1".into()],
        )
        .unwrap()
    }

    #[test]
    fn split_sizes_and_disjointness() {
        let ds = counted(&[(0, 0, 40), (0, 1, 30), (1, 0, 20), (1, 1, 10)]);
        let (train, test) = split_train_test(&ds, 0.7, 5).unwrap();
        assert_eq!((train.len(), test.len()), (70, 30));
        let mut ids: Vec<i64> = train.features().iter().chain(test.features()).map(|&v| v as i64).collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..100).collect::<Vec<_>>());
        let tc: Vec<usize> = train.rows_by_cell().iter().map(Vec::len).collect();
        assert_eq!(&tc[..4], &[28, 21, 14, 7]);
    }

    #[test]
    fn split_is_seeded() {
        let ds = counted(&[(0, 0, 40), (0, 1, 30), (1, 0, 20), (1, 1, 10)]);
        let a = split_train_test(&ds, 0.7, 5).unwrap();
        let b = split_train_test(&ds, 0.7, 5).unwrap();
        let c = split_train_test(&ds, 0.7, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn pstar_testset_equalizes_groups() {
        // COMPAS-shaped: four groups, unequal sizes, label rates differ by group
        let ds = counted(&[
            (0, 0, 120),
            (0, 1, 60),
            (1, 0, 300),
            (1, 1, 350),
            (2, 0, 90),
            (2, 1, 45),
            (3, 0, 410),
            (3, 1, 380),
        ]);
        let out = make_pstar_testset(&ds, 1).unwrap();
        let c: Vec<usize> = out.rows_by_cell().iter().map(Vec::len).collect();
        // label mass: y0 = 920/1755, y1 = 835/1755; binding cell (2,1) has 45
        // rows at target mass 835/(4*1755), so n_out = floor(45*4*1755/835) = 378
        assert_eq!(out.len(), 378);
        // remainders: y1 cells 0.962, y0 cells 0.538 (ties -> lowest index)
        assert_eq!(c, vec![50, 45, 50, 45, 49, 45, 49, 45]);
    }

    #[test]
    fn pstar_testset_empty_cell_errors() {
        let ds = counted(&[(0, 0, 10), (0, 1, 10), (1, 0, 10)]);
        let r = make_pstar_testset(&ds.subset(&(0..30).collect::<Vec<_>>()), 1);
        assert!(matches!(r, Err(Error::EmptyCell { .. })));
    }
}
