use crate::profile::{CellArray, FairKind, FairSubspace, GroupSpace};

/// Orthonormal basis of the orthogonal complement of a fair subspace.
///
/// Helmert contrasts: within each disc column for CRP, over all cells for RP.
#[derive(Debug, Clone, PartialEq)]
pub struct FairBasis {
    fair: FairSubspace,
    vectors: Vec<CellArray>,
}

/// Helmert contrasts over `cells`, written into arrays of `space`.
fn helmert(space: &GroupSpace, cells: &[usize], out: &mut Vec<CellArray>) {
    for j in 1..cells.len() {
        let s = ((j * (j + 1)) as f64).sqrt();
        let mut v = vec![0.0; space.n_cells()];
        for &c in &cells[..j] {
            v[c] = 1.0 / s;
        }
        v[cells[j]] = -(j as f64) / s;
        out.push(CellArray::new(space.clone(), v).expect("finite contrast"));
    }
}

impl FairBasis {
    pub fn new(fair: &FairSubspace) -> Self {
        let space = fair.space();
        let mut vectors = Vec::with_capacity(fair.perp_dim());
        match fair.kind() {
            FairKind::RiskParity => {
                let cells: Vec<usize> = (0..space.n_cells()).collect();
                helmert(space, &cells, &mut vectors);
            }
            FairKind::ConditionalRiskParity => {
                for v in 0..space.n_disc() {
                    let cells: Vec<usize> = (0..space.n_groups()).map(|a| space.index(a, v)).collect();
                    helmert(space, &cells, &mut vectors);
                }
            }
        }
        FairBasis {
            fair: fair.clone(),
            vectors,
        }
    }

    pub fn fair(&self) -> &FairSubspace {
        &self.fair
    }

    pub fn vectors(&self) -> &[CellArray] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Coordinates `<b_k, x>` of `x` in the basis.
    pub fn coords(&self, x: &CellArray) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|b| crate::profile::dot(b.values(), x.values()))
            .collect()
    }

    /// `sum_k y_k b_k`.
    pub fn combine(&self, y: &[f64]) -> CellArray {
        let space = self.fair.space();
        let mut out = vec![0.0; space.n_cells()];
        for (b, &yk) in self.vectors.iter().zip(y) {
            for (o, &bv) in out.iter_mut().zip(b.values()) {
                *o += yk * bv;
            }
        }
        CellArray::new(space.clone(), out).expect("finite combination")
    }
}
