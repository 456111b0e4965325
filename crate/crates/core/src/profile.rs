//! Risk profiles, group marginals and the fair subspaces they are tested against.
//!
//! Every array in this module is indexed `[group][disc_value]` in the order
//! fixed by its [`GroupSpace`] and stored row-major.

use std::fmt;
use std::io::{Read, Write};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};

/// Label used for the single discriminative value of a risk-parity space.
pub const TRIVIAL_DISC: &str = "all";

/// Marginal entries must sum to one within this tolerance.
pub const MARGINAL_SUM_TOL: f64 = 1e-12;

/// Ordered groups (values of the sensitive attribute) crossed with ordered
/// values of the discriminative attribute.
///
/// A space with a single discriminative value treats the attribute as trivial
/// (risk parity). Otherwise the discriminative values are the class labels of
/// the datasets profiled against it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSpace {
    groups: Vec<String>,
    disc_values: Vec<String>,
}

impl GroupSpace {
    pub fn new<G, D>(groups: G, disc_values: D) -> Result<Self>
    where
        G: IntoIterator,
        G::Item: Into<String>,
        D: IntoIterator,
        D::Item: Into<String>,
    {
        let groups: Vec<String> = groups.into_iter().map(Into::into).collect();
        let disc_values: Vec<String> = disc_values.into_iter().map(Into::into).collect();
        check_labels("groups", &groups)?;
        check_labels("disc_values", &disc_values)?;
        Ok(GroupSpace {
            groups,
            disc_values,
        })
    }

    /// Space with a trivial discriminative attribute.
    pub fn risk_parity<G>(groups: G) -> Result<Self>
    where
        G: IntoIterator,
        G::Item: Into<String>,
    {
        GroupSpace::new(groups, [TRIVIAL_DISC])
    }

    /// `n_groups x n_disc` space with labels `a0.., v0..`.
    pub fn indexed(n_groups: usize, n_disc: usize) -> Result<Self> {
        if n_disc == 1 {
            return GroupSpace::risk_parity((0..n_groups).map(|a| format!("a{a}")));
        }
        GroupSpace::new(
            (0..n_groups).map(|a| format!("a{a}")),
            (0..n_disc).map(|v| format!("v{v}")),
        )
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn disc_values(&self) -> &[String] {
        &self.disc_values
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn n_disc(&self) -> usize {
        self.disc_values.len()
    }

    pub fn n_cells(&self) -> usize {
        self.groups.len() * self.disc_values.len()
    }

    pub fn is_trivial_disc(&self) -> bool {
        self.disc_values.len() == 1
    }

    #[inline]
    pub fn index(&self, group: usize, disc: usize) -> usize {
        debug_assert!(group < self.n_groups() && disc < self.n_disc());
        group * self.disc_values.len() + disc
    }

    pub fn group_index(&self, label: &str) -> Option<usize> {
        self.groups.iter().position(|g| g == label)
    }

    pub fn disc_index(&self, label: &str) -> Option<usize> {
        self.disc_values.iter().position(|v| v == label)
    }

    /// Cell labels in storage order, formatted `group|disc`.
    pub fn cell_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_cells());
        for g in &self.groups {
            for v in &self.disc_values {
                names.push(format!("{g}|{v}"));
            }
        }
        names
    }

    pub(crate) fn ensure_same(&self, other: &GroupSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "space {}x{} does not match space {}x{}",
                self.n_groups(),
                self.n_disc(),
                other.n_groups(),
                other.n_disc()
            )))
        }
    }
}

fn check_labels(what: &str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::InvalidSpace(format!("{what} is empty")));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::InvalidSpace(format!("duplicate label `{l}` in {what}")));
        }
    }
    Ok(())
}

/// A real array over the cells of a [`GroupSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct CellArray {
    space: GroupSpace,
    values: Vec<f64>,
}

impl CellArray {
    pub fn new(space: GroupSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.n_cells() {
            return Err(Error::Shape(format!(
                "expected {} values, got {}",
                space.n_cells(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cell array".into()));
        }
        Ok(CellArray { space, values })
    }

    /// Builds from nested rows `[group][disc]`.
    pub fn from_rows(space: GroupSpace, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != space.n_groups() || rows.iter().any(|r| r.len() != space.n_disc()) {
            return Err(Error::Shape(format!(
                "expected {}x{} rows",
                space.n_groups(),
                space.n_disc()
            )));
        }
        CellArray::new(space, rows.concat())
    }

    pub fn zeros(space: GroupSpace) -> Self {
        let n = space.n_cells();
        CellArray {
            space,
            values: vec![0.0; n],
        }
    }

    pub fn space(&self) -> &GroupSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, group: usize, disc: usize) -> f64 {
        self.values[self.space.index(group, disc)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values
            .chunks(self.space.n_disc())
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// Euclidean inner product over all cells.
    pub fn dot(&self, other: &CellArray) -> Result<f64> {
        self.space.ensure_same(&other.space)?;
        Ok(dot(&self.values, &other.values))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &CellArray) -> Result<CellArray> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &CellArray) -> Result<CellArray> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> CellArray {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> CellArray {
        CellArray {
            space: self.space.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &CellArray, f: impl Fn(f64, f64) -> f64) -> Result<CellArray> {
        self.space.ensure_same(&other.space)?;
        Ok(CellArray {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Lexicographic comparison of the stored values.
    pub fn lex_cmp(&self, other: &CellArray) -> std::cmp::Ordering {
        for (a, b) in self.values.iter().zip(&other.values) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }

    /// Writes the array as a CSV matrix: a header row `group,<disc values>`
    /// followed by one row per group.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["group".to_string()];
        header.extend(self.space.disc_values.iter().cloned());
        w.write_record(&header)?;
        for (a, g) in self.space.groups.iter().enumerate() {
            let mut rec = vec![g.clone()];
            rec.extend((0..self.space.n_disc()).map(|v| format_f64(self.get(a, v))));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV matrix layout produced by [`CellArray::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 {
            return Err(Error::parse(1, "header needs a group column and at least one value column"));
        }
        let disc: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut groups = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() != header.len() {
                return Err(Error::parse(
                    line,
                    format!("expected {} fields, found {}", header.len(), rec.len()),
                ));
            }
            groups.push(rec[0].to_string());
            for field in rec.iter().skip(1) {
                values.push(parse_f64(field, line)?);
            }
        }
        if groups.is_empty() {
            return Err(Error::parse(1, "no group rows"));
        }
        let space = GroupSpace::new(groups, disc)?;
        CellArray::new(space, values)
    }
}

impl fmt::Display for CellArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.values.chunks(self.space.n_disc()).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{row:?}")?;
        }
        write!(f, "]")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn format_f64(v: f64) -> String {
    // `{}` on f64 prints the shortest representation that round-trips.
    format!("{v}")
}

pub(crate) fn parse_f64(field: &str, line: u64) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("cannot parse `{field}` as a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{field}`")));
    }
    Ok(v)
}

/// Conditional expected losses per `(group, disc value)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskProfile(CellArray);

impl RiskProfile {
    pub fn new(space: GroupSpace, values: Vec<f64>) -> Result<Self> {
        CellArray::new(space, values).map(RiskProfile)
    }

    pub fn from_rows(space: GroupSpace, rows: &[Vec<f64>]) -> Result<Self> {
        CellArray::from_rows(space, rows).map(RiskProfile)
    }

    pub fn from_array(array: CellArray) -> Self {
        RiskProfile(array)
    }

    pub fn as_array(&self) -> &CellArray {
        &self.0
    }

    pub fn into_array(self) -> CellArray {
        self.0
    }
}

impl std::ops::Deref for RiskProfile {
    type Target = CellArray;
    fn deref(&self) -> &CellArray {
        &self.0
    }
}

impl fmt::Display for RiskProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Joint probabilities of `(group, disc value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMarginal(CellArray);

impl GroupMarginal {
    pub fn new(space: GroupSpace, probs: Vec<f64>) -> Result<Self> {
        GroupMarginal::from_array(CellArray::new(space, probs)?)
    }

    pub fn from_rows(space: GroupSpace, rows: &[Vec<f64>]) -> Result<Self> {
        GroupMarginal::from_array(CellArray::from_rows(space, rows)?)
    }

    pub fn from_array(array: CellArray) -> Result<Self> {
        if let Some(v) = array.values().iter().find(|&&v| v < 0.0) {
            return Err(Error::InvalidMarginal(format!("negative probability {v}")));
        }
        let total: f64 = array.values().iter().sum();
        if (total - 1.0).abs() > MARGINAL_SUM_TOL {
            return Err(Error::InvalidMarginal(format!("probabilities sum to {total}")));
        }
        Ok(GroupMarginal(array))
    }

    /// Normalizes nonnegative weights into a marginal.
    pub fn from_weights(space: GroupSpace, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidMarginal("weights must be nonnegative with positive sum".into()));
        }
        let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        renormalize(&mut probs);
        GroupMarginal::new(space, probs)
    }

    pub fn uniform(space: GroupSpace) -> Self {
        let n = space.n_cells();
        let mut probs = vec![1.0 / n as f64; n];
        renormalize(&mut probs);
        GroupMarginal(CellArray {
            space,
            values: probs,
        })
    }

    pub fn as_array(&self) -> &CellArray {
        &self.0
    }

    pub fn into_array(self) -> CellArray {
        self.0
    }

    pub fn probs(&self) -> &[f64] {
        self.0.values()
    }

    /// Total mass of each disc value column.
    pub fn column_sums(&self) -> Vec<f64> {
        let space = self.0.space();
        (0..space.n_disc())
            .map(|v| (0..space.n_groups()).map(|a| self.0.get(a, v)).sum())
            .collect()
    }

    /// Total mass of each group row.
    pub fn group_sums(&self) -> Vec<f64> {
        self.0
            .values()
            .chunks(self.0.space().n_disc())
            .map(|r| r.iter().sum())
            .collect()
    }
}

/// Pushes the rounding residue of a normalized vector into its largest entry
/// so that the sum is as close to one as floating point allows.
fn renormalize(probs: &mut [f64]) {
    let total: f64 = probs.iter().sum();
    if let Some(imax) = (0..probs.len()).max_by(|&i, &j| probs[i].total_cmp(&probs[j])) {
        probs[imax] += 1.0 - total;
    }
}

impl std::ops::Deref for GroupMarginal {
    type Target = CellArray;
    fn deref(&self) -> &CellArray {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FairKind {
    /// Equal risk across every cell.
    RiskParity,
    /// Equal risk across groups within each disc value column.
    ConditionalRiskParity,
}

impl FairKind {
    pub fn parse(s: &str) -> Option<FairKind> {
        match s.to_ascii_lowercase().as_str() {
            "rp" | "risk_parity" | "risk-parity" => Some(FairKind::RiskParity),
            "crp" | "conditional_risk_parity" | "conditional-risk-parity" | "eo" => {
                Some(FairKind::ConditionalRiskParity)
            }
            _ => None,
        }
    }
}

/// The linear subspace of fair arrays over a space.
#[derive(Debug, Clone, PartialEq)]
pub struct FairSubspace {
    space: GroupSpace,
    kind: FairKind,
}

impl FairSubspace {
    pub fn new(space: GroupSpace, kind: FairKind) -> Self {
        FairSubspace { space, kind }
    }

    pub fn space(&self) -> &GroupSpace {
        &self.space
    }

    pub fn kind(&self) -> FairKind {
        self.kind
    }

    /// Dimension of the orthogonal complement.
    pub fn perp_dim(&self) -> usize {
        match self.kind {
            FairKind::RiskParity => self.space.n_cells() - 1,
            FairKind::ConditionalRiskParity => (self.space.n_groups() - 1) * self.space.n_disc(),
        }
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, x: &CellArray) -> Result<CellArray> {
        self.space.ensure_same(x.space())?;
        let space = &self.space;
        let mut out = vec![0.0; space.n_cells()];
        match self.kind {
            FairKind::RiskParity => {
                let mean = x.values().iter().sum::<f64>() / space.n_cells() as f64;
                out.iter_mut().for_each(|o| *o = mean);
            }
            FairKind::ConditionalRiskParity => {
                for v in 0..space.n_disc() {
                    let mean = (0..space.n_groups()).map(|a| x.get(a, v)).sum::<f64>()
                        / space.n_groups() as f64;
                    for a in 0..space.n_groups() {
                        out[space.index(a, v)] = mean;
                    }
                }
            }
        }
        Ok(CellArray {
            space: space.clone(),
            values: out,
        })
    }

    /// Projection onto the orthogonal complement, `x - project(x)`.
    pub fn project_perp(&self, x: &CellArray) -> Result<CellArray> {
        x.sub(&self.project(x)?)
    }

    /// Largest within-column spread (CRP) or overall spread (RP).
    pub fn gap(&self, x: &CellArray) -> Result<f64> {
        self.space.ensure_same(x.space())?;
        let space = &self.space;
        let spread = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            hi - lo
        };
        Ok(match self.kind {
            FairKind::RiskParity => spread(&mut x.values().iter().copied()),
            FairKind::ConditionalRiskParity => (0..space.n_disc())
                .map(|v| spread(&mut (0..space.n_groups()).map(|a| x.get(a, v))))
                .fold(0.0, f64::max),
        })
    }

    pub fn contains(&self, x: &CellArray, tol: f64) -> Result<bool> {
        Ok(self.gap(x)? <= tol)
    }
}

/// `<marginal, profile>`: the overall risk of a profile under a marginal.
pub fn overall_risk(marginal: &GroupMarginal, profile: &RiskProfile) -> Result<f64> {
    marginal.as_array().dot(profile.as_array())
}

pub fn project_fair(x: &CellArray, fair: &FairSubspace) -> Result<CellArray> {
    fair.project(x)
}

pub fn project_fair_perp(x: &CellArray, fair: &FairSubspace) -> Result<CellArray> {
    fair.project_perp(x)
}

pub fn fairness_gap(profile: &RiskProfile, fair: &FairSubspace) -> Result<f64> {
    fair.gap(profile.as_array())
}

/// Maps every dataset row to its cell in `space`.
///
/// Groups are matched by label. A trivial discriminative attribute maps every
/// row to column 0; otherwise the row's class label must name a disc value.
pub fn cell_indices(space: &GroupSpace, dataset: &LabeledDataset) -> Result<Vec<usize>> {
    let group_map: Vec<usize> = dataset
        .group_vocab()
        .iter()
        .map(|g| {
            space
                .group_index(g)
                .ok_or_else(|| Error::Shape(format!("dataset group `{g}` is not in the space")))
        })
        .collect::<Result<_>>()?;
    let disc_map: Vec<usize> = if space.is_trivial_disc() {
        vec![0; dataset.label_vocab().len()]
    } else {
        dataset
            .label_vocab()
            .iter()
            .map(|y| {
                space
                    .disc_index(y)
                    .ok_or_else(|| Error::Shape(format!("dataset label `{y}` is not a disc value")))
            })
            .collect::<Result<_>>()?
    };
    Ok((0..dataset.len())
        .map(|i| space.index(group_map[dataset.group(i)], disc_map[dataset.label(i)]))
        .collect())
}

/// Row counts per cell.
pub fn cell_counts(space: &GroupSpace, dataset: &LabeledDataset) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; space.n_cells()];
    for c in cell_indices(space, dataset)? {
        counts[c] += 1;
    }
    Ok(counts)
}

/// Empirical joint of `(group, disc value)`.
pub fn empirical_marginal(space: &GroupSpace, dataset: &LabeledDataset) -> Result<GroupMarginal> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let counts = cell_counts(space, dataset)?;
    GroupMarginal::from_weights(space.clone(), counts.iter().map(|&c| c as f64).collect())
}

/// Per-cell mean of row losses. Fails on the first empty cell.
pub fn empirical_risk_profile(
    losses: &[f64],
    dataset: &LabeledDataset,
    space: &GroupSpace,
) -> Result<RiskProfile> {
    let (profile, present) = empirical_risk_profile_masked(losses, dataset, space)?;
    if let Some(c) = present.iter().position(|p| !p) {
        let n_disc = space.n_disc();
        return Err(Error::EmptyCell {
            group: space.groups()[c / n_disc].clone(),
            disc: space.disc_values()[c % n_disc].clone(),
        });
    }
    Ok(profile)
}

/// Lenient variant of [`empirical_risk_profile`]: empty cells are set to zero
/// and flagged `false` in the returned mask.
pub fn empirical_risk_profile_masked(
    losses: &[f64],
    dataset: &LabeledDataset,
    space: &GroupSpace,
) -> Result<(RiskProfile, Vec<bool>)> {
    if losses.len() != dataset.len() {
        return Err(Error::Shape(format!(
            "{} losses for {} rows",
            losses.len(),
            dataset.len()
        )));
    }
    let cells = cell_indices(space, dataset)?;
    let mut sums = vec![0.0; space.n_cells()];
    let mut counts = vec![0usize; space.n_cells()];
    for (&c, &l) in cells.iter().zip(losses) {
        sums[c] += l;
        counts[c] += 1;
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &n)| if n > 0 { s / n as f64 } else { 0.0 })
        .collect();
    let present = counts.iter().map(|&n| n > 0).collect();
    Ok((RiskProfile::new(space.clone(), values)?, present))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crp2() -> FairSubspace {
        FairSubspace::new(GroupSpace::indexed(2, 2).unwrap(), FairKind::ConditionalRiskParity)
    }

    fn rp2() -> FairSubspace {
        FairSubspace::new(GroupSpace::indexed(2, 1).unwrap(), FairKind::RiskParity)
    }

    fn arr(space: &GroupSpace, v: &[f64]) -> CellArray {
        CellArray::new(space.clone(), v.to_vec()).unwrap()
    }

    fn assert_close(a: &CellArray, b: &[f64]) {
        for (x, y) in a.values().iter().zip(b) {
            assert!((x - y).abs() < 1e-12, "{a} vs {b:?}");
        }
    }

    #[test]
    fn space_rejects_duplicates_and_empty() {
        assert!(GroupSpace::new(["a", "a"], ["y"]).is_err());
        assert!(GroupSpace::new(Vec::<String>::new(), ["y"]).is_err());
        assert!(GroupSpace::new(["a"], Vec::<String>::new()).is_err());
    }

    #[test]
    fn overall_risk_examples() {
        let s = GroupSpace::indexed(2, 2).unwrap();
        let m = GroupMarginal::uniform(s.clone());
        let r = RiskProfile::new(s.clone(), vec![0.2, 0.6, 0.4, 0.2]).unwrap();
        assert!((overall_risk(&m, &r).unwrap() - 0.35).abs() < 1e-12);
        let zero = RiskProfile::from_array(CellArray::zeros(s));
        assert_eq!(overall_risk(&m, &zero).unwrap(), 0.0);

        let s1 = GroupSpace::indexed(2, 1).unwrap();
        let m = GroupMarginal::new(s1.clone(), vec![0.9, 0.1]).unwrap();
        let r = RiskProfile::new(s1, vec![0.1, 0.4]).unwrap();
        assert!((overall_risk(&m, &r).unwrap() - 0.13).abs() < 1e-12);
    }

    #[test]
    fn overall_risk_space_mismatch() {
        let m = GroupMarginal::uniform(GroupSpace::indexed(2, 2).unwrap());
        let r = RiskProfile::new(GroupSpace::indexed(2, 1).unwrap(), vec![0.1, 0.2]).unwrap();
        assert!(matches!(overall_risk(&m, &r), Err(Error::Shape(_))));
    }

    #[test]
    fn marginal_validation() {
        let s = GroupSpace::indexed(2, 1).unwrap();
        assert!(GroupMarginal::new(s.clone(), vec![0.5, 0.6]).is_err());
        assert!(GroupMarginal::new(s.clone(), vec![1.1, -0.1]).is_err());
        assert!(GroupMarginal::new(s, vec![0.3, 0.7]).is_ok());
    }

    #[test]
    fn projection_examples() {
        let f = crp2();
        let x = arr(f.space(), &[0.2, 0.6, 0.4, 0.2]);
        assert_close(&project_fair(&x, &f).unwrap(), &[0.3, 0.4, 0.3, 0.4]);
        assert_close(&project_fair_perp(&x, &f).unwrap(), &[-0.1, 0.2, 0.1, -0.2]);
        let fair = arr(f.space(), &[0.3, 0.4, 0.3, 0.4]);
        assert_close(&project_fair(&fair, &f).unwrap(), fair.values());
        assert_close(&project_fair_perp(&fair, &f).unwrap(), &[0.0; 4]);

        let r = rp2();
        let x = arr(r.space(), &[0.2, 0.6]);
        assert_close(&project_fair(&x, &r).unwrap(), &[0.4, 0.4]);
        assert_close(&project_fair_perp(&x, &r).unwrap(), &[-0.2, 0.2]);
    }

    #[test]
    fn gap_examples() {
        let f = crp2();
        let p = RiskProfile::new(f.space().clone(), vec![0.3, 0.4, 0.3, 0.4]).unwrap();
        assert_eq!(fairness_gap(&p, &f).unwrap(), 0.0);
        let p = RiskProfile::new(f.space().clone(), vec![0.2, 0.6, 0.4, 0.2]).unwrap();
        assert!((fairness_gap(&p, &f).unwrap() - 0.4).abs() < 1e-12);
        let r = rp2();
        let p = RiskProfile::new(r.space().clone(), vec![0.1, 0.4]).unwrap();
        assert!((fairness_gap(&p, &r).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let s = GroupSpace::new(["m", "f"], ["0", "1"]).unwrap();
        let x = arr(&s, &[0.1, 0.25, 1.0 / 3.0, 0.0]);
        let mut buf = Vec::new();
        x.write_csv(&mut buf).unwrap();
        let back = CellArray::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, x);

        let bad = "group,0,1\nm,0.1,0.2\nf,0.3,oops\n";
        match CellArray::read_csv(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
