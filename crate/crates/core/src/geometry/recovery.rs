use crate::error::{Error, Result};
use crate::geometry::basis::FairBasis;
use crate::geometry::lp::{LinearProgram, LpStatus, Relation, VarKind, FEAS_TOL};
use crate::geometry::ops::{bayes_fair_check, minimize_linear, minimize_linear_fair, FairMin};
use crate::geometry::polytope::RiskPolytope;
use crate::profile::{dot, CellArray, FairSubspace, GroupMarginal, RiskProfile};

/// Evidence backing a [`RecoveryVerdict`].
#[derive(Debug, Clone, PartialEq)]
pub enum RecoveryCertificate {
    /// `f` in the orthogonal complement of the fair subspace with
    /// `<x - f, V_i - R*> <= 0` for every vertex.
    Recoverable { f: CellArray },
    /// A fair mixture `Q` with strictly smaller training risk than `R*`:
    /// `excess = <p_tilde, R*> - <p_tilde, Q> = <x, Q - R*> > 0`.
    NotRecoverable { point: RiskProfile, weights: Vec<f64>, excess: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryVerdict {
    pub recoverable: bool,
    /// Index of the vertex taken as `R*`.
    pub r_star_index: usize,
    pub r_star: RiskProfile,
    /// Fair optimum of the training-domain risk.
    pub fair_optimum_under_bias: FairMin,
    /// `Pi_F(p_star - p_tilde) - p_star`.
    pub x: CellArray,
    pub certificate: RecoveryCertificate,
}

impl RecoveryVerdict {
    /// Re-checks the certificate against `poly` and `fair` without any LP.
    pub fn verify(&self, poly: &RiskPolytope, fair: &FairSubspace) -> Result<bool> {
        let tol = poly.tie_tolerance();
        match (&self.certificate, self.recoverable) {
            (RecoveryCertificate::Recoverable { f }, true) => {
                if fair.project(f)?.max_abs() > 1e-9 * (1.0 + f.max_abs()) {
                    return Ok(false);
                }
                let g = self.x.sub(f)?;
                let base = dot(g.values(), self.r_star.values());
                Ok(poly
                    .vertices()
                    .iter()
                    .all(|v| dot(g.values(), v.values()) - base <= tol))
            }
            (RecoveryCertificate::NotRecoverable { point, weights, excess }, false) => {
                let mix = poly.mixture(weights)?;
                let simplex = weights.iter().all(|&w| w >= -FEAS_TOL)
                    && (weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
                let same = mix.sub(point)?.max_abs() <= 1e-9;
                let in_fair = fair.gap(point)? <= tol;
                let diff = point.sub(&self.r_star)?;
                let recomputed = dot(self.x.values(), diff.values());
                Ok(simplex && same && in_fair && *excess > 0.0 && (recomputed - excess).abs() <= 1e-9)
            }
            _ => Ok(false),
        }
    }
}

/// Decides whether fair training on `p_tilde` recovers the `p_star`-optimal
/// profile `R*`, via LP feasibility of
/// `exists f in F-perp: <x - f, V_i - R*> <= 0 for all i`.
///
/// `R*` is the lexicographically smallest `p_star`-optimal vertex. Fails with
/// a precondition error if some `p_star`-optimal vertex is unfair.
pub fn recovery_condition(
    poly: &RiskPolytope,
    p_star: &GroupMarginal,
    p_tilde: &GroupMarginal,
    fair: &FairSubspace,
) -> Result<RecoveryVerdict> {
    poly.space().ensure_same(p_star.space())?;
    poly.space().ensure_same(p_tilde.space())?;
    poly.space().ensure_same(fair.space())?;
    if !bayes_fair_check(poly, p_star, fair)? {
        return Err(Error::Precondition(
            "the target-optimal vertices are not all fair".into(),
        ));
    }
    let min = minimize_linear(poly, p_star)?;
    let r_star_index = *min
        .argmin
        .iter()
        .min_by(|&&a, &&b| poly[a].lex_cmp(&poly[b]))
        .expect("non-empty argmin");
    let r_star = poly[r_star_index].clone();

    let delta = p_star.as_array().sub(p_tilde.as_array())?;
    let x = fair.project(&delta)?.sub(p_star.as_array())?;

    let basis = FairBasis::new(fair);
    let k = basis.len();
    let mut lp = LinearProgram::new(k);
    for j in 0..k {
        lp.set_kind(j, VarKind::Free);
    }
    for v in poly.vertices() {
        let d = v.sub(&r_star)?;
        // <x, d> - sum_k y_k <b_k, d> <= 0
        let row: Vec<f64> = basis.coords(&d).iter().map(|c| -c).collect();
        lp.add_row(row, Relation::Le, -dot(x.values(), d.values()));
    }
    let sol = lp.solve();

    let fair_optimum = minimize_linear_fair(poly, p_tilde.as_array(), fair)?;
    let (recoverable, certificate) = match sol.status {
        LpStatus::Optimal => (true, RecoveryCertificate::Recoverable { f: basis.combine(&sol.x) }),
        LpStatus::Infeasible => {
            let excess = dot(p_tilde.probs(), r_star.values()) - fair_optimum.value;
            (
                false,
                RecoveryCertificate::NotRecoverable {
                    point: fair_optimum.profile.clone(),
                    weights: fair_optimum.weights.clone(),
                    excess,
                },
            )
        }
        status => return Err(Error::Lp(status)),
    };
    Ok(RecoveryVerdict {
        recoverable,
        r_star_index,
        r_star,
        fair_optimum_under_bias: fair_optimum,
        x,
        certificate,
    })
}
