//! Gaussian class-conditional features per `(group, label)` cell.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::profile::{GroupMarginal, GroupSpace};

/// Mean and covariance for one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGaussian {
    pub mean: Vec<f64>,
    /// Row-major `d x d`.
    pub cov: Vec<f64>,
}

/// Gaussian features per `(group, label)` cell, with cells drawn from `joint`.
///
/// `cells` is indexed like `joint`: `group * n_labels + label`. The joint's
/// group labels and disc values become the dataset's vocabularies.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    pub cells: Vec<CellGaussian>,
    pub joint: GroupMarginal,
    pub n: usize,
    pub seed: u64,
}

/// Geometry of the default two-group design.
///
/// Cell `(a, y)` is centred at `(s_y * class_sep, g_a * (group_shift - s_y * tilt))`
/// with `s_y = -1, +1` for `y = 0, 1` and `g_a = -1, +1` for `a = 0, 1`.
/// Classes are separated along axis 1 and groups along axis 2. The per-group
/// class direction is tilted in opposite ways, so the pooled boundary
/// `x1 = 0` treats both groups alike while each group on its own prefers a
/// tilted boundary that misclassifies the other group's `y = 0` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignParams {
    pub class_sep: f64,
    pub group_shift: f64,
    pub tilt: f64,
    pub variance: f64,
}

impl Default for DesignParams {
    fn default() -> Self {
        DesignParams {
            class_sep: 1.0,
            group_shift: 2.0,
            tilt: 2.0,
            variance: 0.5,
        }
    }
}

impl DesignParams {
    pub fn cells(&self) -> Vec<CellGaussian> {
        let mut cells = Vec::with_capacity(4);
        for a in 0..2 {
            let g = if a == 0 { -1.0 } else { 1.0 };
            for y in 0..2 {
                let s = if y == 0 { -1.0 } else { 1.0 };
                cells.push(CellGaussian {
                    mean: vec![s * self.class_sep, g * (self.group_shift - s * self.tilt)],
                    cov: vec![self.variance, 0.0, 0.0, self.variance],
                });
            }
        }
        cells
    }
}

/// Two groups by two labels, both vocabularies `["0", "1"]`.
pub fn binary_space() -> GroupSpace {
    GroupSpace::new(["0", "1"], ["0", "1"]).expect("static labels")
}

/// Joint with `p(1, y) = p_minor` and `p(0, y) = 0.5 - p_minor` for both labels.
pub fn minority_joint(p_minor: f64) -> Result<GroupMarginal> {
    if !(0.0..=0.25).contains(&p_minor) {
        return Err(Error::InvalidArgument(format!(
            "p_minor must lie in [0, 0.25], got {p_minor}"
        )));
    }
    let major = 0.5 - p_minor;
    GroupMarginal::new(binary_space(), vec![major, major, p_minor, p_minor])
}

impl GaussianSpec {
    /// The default design under a given joint.
    pub fn default_design(joint: GroupMarginal, n: usize, seed: u64) -> Self {
        GaussianSpec::with_params(DesignParams::default(), joint, n, seed)
    }

    pub fn with_params(params: DesignParams, joint: GroupMarginal, n: usize, seed: u64) -> Self {
        GaussianSpec {
            cells: params.cells(),
            joint,
            n,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.cells.first().map_or(0, |c| c.mean.len())
    }
}

/// Draws `spec.n` rows: cells i.i.d. from the joint, then
/// `mean + chol(cov) * z` with standard normal `z`.
pub fn gaussian_sample(spec: &GaussianSpec) -> Result<LabeledDataset> {
    let space = spec.joint.space();
    if spec.cells.len() != space.n_cells() {
        return Err(Error::Shape(format!(
            "{} cell gaussians for {} cells",
            spec.cells.len(),
            space.n_cells()
        )));
    }
    let d = spec.dim();
    if d == 0 {
        return Err(Error::InvalidArgument("zero-dimensional features".into()));
    }
    let mut factors = Vec::with_capacity(spec.cells.len());
    for (c, cell) in spec.cells.iter().enumerate() {
        if cell.mean.len() != d || cell.cov.len() != d * d {
            return Err(Error::Shape(format!("cell {c}: inconsistent dimensions")));
        }
        factors.push(cholesky(&cell.cov, d).ok_or_else(|| {
            Error::InvalidArgument(format!("cell {c}: covariance is not symmetric positive definite"))
        })?);
    }
    let picker = WeightedIndex::new(spec.joint.probs())
        .map_err(|e| Error::InvalidMarginal(e.to_string()))?;

    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let n_disc = space.n_disc();
    let mut features = Vec::with_capacity(spec.n * d);
    let mut groups = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    let mut z = vec![0.0; d];
    for _ in 0..spec.n {
        let c = picker.sample(&mut rng);
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let cell = &spec.cells[c];
        let l = &factors[c];
        for i in 0..d {
            let mut v = cell.mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                v += l[i * d + j] * zj;
            }
            features.push(v);
        }
        groups.push(c / n_disc);
        labels.push(c % n_disc);
    }
    LabeledDataset::new(
        (0..d).map(|i| format!("x{i}")).collect(),
        features,
        groups,
        labels,
        space.groups().to_vec(),
        space.disc_values().to_vec(),
    )
}

/// Lower Cholesky factor (row-major), or `None` if `cov` is not SPD.
fn cholesky(cov: &[f64], d: usize) -> Option<Vec<f64>> {
    for i in 0..d {
        for j in 0..i {
            let (a, b) = (cov[i * d + j], cov[j * d + i]);
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return None;
            }
        }
    }
    let m = DMatrix::from_row_slice(d, d, cov);
    let chol = m.cholesky()?;
    let l = chol.l();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            out[i * d + j] = l[(i, j)];
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minority_joint_columns() {
        let j = minority_joint(0.1).unwrap();
        assert_eq!(j.probs(), &[0.4, 0.4, 0.1, 0.1]);
        assert_eq!(j.column_sums(), vec![0.5, 0.5]);
        assert!(minority_joint(0.3).is_err());
    }

    #[test]
    fn rejects_non_spd() {
        let joint = GroupMarginal::uniform(binary_space());
        let mut spec = GaussianSpec::default_design(joint, 10, 1);
        spec.cells[2].cov = vec![1.0, 2.0, 2.0, 1.0];
        assert!(matches!(gaussian_sample(&spec), Err(Error::InvalidArgument(_))));
        spec.cells[2].cov = vec![1.0, 0.1, 0.0, 1.0];
        assert!(gaussian_sample(&spec).is_err());
    }

    #[test]
    fn uniform_cell_counts_concentrate() {
        let joint = GroupMarginal::uniform(binary_space());
        let ds = gaussian_sample(&GaussianSpec::default_design(joint, 10_000, 3)).unwrap();
        let counts: Vec<usize> = ds.rows_by_cell().iter().map(Vec::len).collect();
        // multinomial sd = sqrt(n p (1 - p))
        let sd = (10_000.0f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - 2500.0).abs() <= 3.0 * sd, "count {c}");
        }
    }

    #[test]
    fn identity_covariance_means() {
        let joint = GroupMarginal::uniform(binary_space());
        let mut spec = GaussianSpec::default_design(joint, 40_000, 11);
        for c in spec.cells.iter_mut() {
            c.cov = vec![1.0, 0.0, 0.0, 1.0];
        }
        let ds = gaussian_sample(&spec).unwrap();
        for (c, rows) in ds.rows_by_cell().iter().enumerate() {
            let n = rows.len() as f64;
            for k in 0..2 {
                let mean = rows.iter().map(|&i| ds.row(i)[k]).sum::<f64>() / n;
                assert!(
                    (mean - spec.cells[c].mean[k]).abs() <= 3.0 / n.sqrt(),
                    "cell {c} axis {k}: {mean}"
                );
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let joint = minority_joint(0.05).unwrap();
        let a = gaussian_sample(&GaussianSpec::default_design(joint.clone(), 500, 9)).unwrap();
        let b = gaussian_sample(&GaussianSpec::default_design(joint.clone(), 500, 9)).unwrap();
        let c = gaussian_sample(&GaussianSpec::default_design(joint, 500, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
