use crate::error::{Error, Result};
use crate::geometry::basis::FairBasis;
use crate::geometry::lp::{LinearProgram, LpStatus, Relation, VarKind};
use crate::geometry::polytope::RiskPolytope;
use crate::profile::{dot, CellArray, FairSubspace, GroupMarginal, RiskProfile};

/// Minimum of a linear functional over the vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMin {
    pub value: f64,
    /// Vertices within the tie tolerance of `value`, in vertex order.
    pub argmin: Vec<usize>,
}

/// Minimum over the part of the hull inside the fair subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct FairMin {
    pub value: f64,
    pub profile: RiskProfile,
    /// Mixture weights over the vertices.
    pub weights: Vec<f64>,
}

pub fn minimize_linear(poly: &RiskPolytope, cost: &GroupMarginal) -> Result<LinearMin> {
    poly.space().ensure_same(cost.space())?;
    let values: Vec<f64> = poly.vertices().iter().map(|v| dot(cost.probs(), v.values())).collect();
    let value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tau = poly.tie_tolerance();
    let argmin = (0..values.len()).filter(|&i| values[i] <= value + tau).collect();
    Ok(LinearMin { value, argmin })
}

/// Minimizes `<cost, R>` over mixtures `R` of the vertices with `R` fair.
///
/// When the hull misses the fair subspace the error carries a separator
/// `w` in the orthogonal complement with `<w, V_i> >= 1` for all vertices.
pub fn minimize_linear_fair(poly: &RiskPolytope, cost: &CellArray, fair: &FairSubspace) -> Result<FairMin> {
    poly.space().ensure_same(cost.space())?;
    poly.space().ensure_same(fair.space())?;
    let basis = FairBasis::new(fair);
    let n = poly.len();
    let coords: Vec<Vec<f64>> = poly.vertices().iter().map(|v| basis.coords(v)).collect();

    let mut lp = LinearProgram::new(n);
    lp.set_objective(poly.vertices().iter().map(|v| dot(cost.values(), v.values())).collect());
    lp.add_row(vec![1.0; n], Relation::Eq, 1.0);
    for k in 0..basis.len() {
        lp.add_row(coords.iter().map(|c| c[k]).collect(), Relation::Eq, 0.0);
    }
    let sol = lp.solve();
    match sol.status {
        LpStatus::Optimal => {
            let total: f64 = sol.x.iter().sum();
            let weights: Vec<f64> = sol.x.iter().map(|w| w / total).collect();
            let profile = poly.mixture(&weights)?;
            let value = dot(cost.values(), profile.values());
            Ok(FairMin { value, profile, weights })
        }
        LpStatus::Infeasible => Err(match separator(&basis, &coords) {
            Some(w) => Error::Infeasible { separator: Box::new(w) },
            None => Error::Lp(LpStatus::Infeasible),
        }),
        status => Err(Error::Lp(status)),
    }
}

/// `w = sum_k y_k b_k` with `<w, V_i> >= 1` for every vertex, if one exists.
fn separator(basis: &FairBasis, coords: &[Vec<f64>]) -> Option<CellArray> {
    let k = basis.len();
    let mut lp = LinearProgram::new(k);
    for j in 0..k {
        lp.set_kind(j, VarKind::Free);
    }
    for c in coords {
        lp.add_row(c.clone(), Relation::Ge, 1.0);
    }
    let sol = lp.solve();
    (sol.status == LpStatus::Optimal).then(|| basis.combine(&sol.x))
}

/// Whether constraining to the fair set helps or hurts on the target domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftVerdict {
    /// `<P*, R~> <= <P*, R~_F>`: the constraint does not improve target risk.
    Harm,
    Help,
}

/// Direction in which the threshold separates the two verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    /// Harm when the majority mass is at least the threshold.
    HarmAtOrAbove,
    /// Harm when the majority mass is at most the threshold.
    HarmAtOrBelow,
}

/// Target-majority-mass threshold separating Harm from Help for two groups.
#[derive(Debug, Clone, PartialEq)]
pub struct RpThreshold {
    /// `None` when the unconstrained profile has equal group risks.
    pub threshold: Option<f64>,
    pub comparator: Comparator,
    pub majority: usize,
    r_tilde: [f64; 2],
    r_fair: [f64; 2],
}

impl RpThreshold {
    pub fn verdict(&self, majority_mass: f64) -> Option<ShiftVerdict> {
        let t = self.threshold?;
        let harm = match self.comparator {
            Comparator::HarmAtOrAbove => majority_mass >= t,
            Comparator::HarmAtOrBelow => majority_mass <= t,
        };
        Some(if harm { ShiftVerdict::Harm } else { ShiftVerdict::Help })
    }

    /// `<P*, R~ - R~_F>` at the given target majority mass.
    pub fn difference(&self, majority_mass: f64) -> f64 {
        let minority = 1 - self.majority;
        majority_mass * (self.r_tilde[self.majority] - self.r_fair[self.majority])
            + (1.0 - majority_mass) * (self.r_tilde[minority] - self.r_fair[minority])
    }
}

/// Threshold `(R~_min - R~F_min) / (R~_min - R~_maj)` on the target majority mass.
///
/// `r_tilde_fair` is taken as given; its fairness is not checked.
pub fn rp_threshold(r_tilde: &RiskProfile, r_tilde_fair: &RiskProfile, majority: usize) -> Result<RpThreshold> {
    let space = r_tilde.space();
    space.ensure_same(r_tilde_fair.space())?;
    if space.n_groups() != 2 || space.n_disc() != 1 {
        return Err(Error::Unsupported(format!(
            "threshold needs a risk-parity space with two groups, got {}x{}",
            space.n_groups(),
            space.n_disc()
        )));
    }
    if majority > 1 {
        return Err(Error::InvalidArgument(format!("majority index {majority} out of range")));
    }
    let minority = 1 - majority;
    let rt = [r_tilde.values()[0], r_tilde.values()[1]];
    let rf = [r_tilde_fair.values()[0], r_tilde_fair.values()[1]];
    let m = rt.iter().chain(&rf).map(|v| v.abs()).fold(0.0, f64::max);
    let tau = 1e-7 * (1.0 + m);
    let denom = rt[minority] - rt[majority];
    let (threshold, comparator) = if denom.abs() <= tau {
        (None, Comparator::HarmAtOrAbove)
    } else {
        let t = (rt[minority] - rf[minority]) / denom;
        let cmp = if denom > 0.0 {
            Comparator::HarmAtOrAbove
        } else {
            Comparator::HarmAtOrBelow
        };
        (Some(t), cmp)
    };
    Ok(RpThreshold {
        threshold,
        comparator,
        majority,
        r_tilde: rt,
        r_fair: rf,
    })
}

/// `<c, V_i - point> <= tau` for every vertex.
pub fn normal_cone_member(poly: &RiskPolytope, point: &CellArray, c: &CellArray) -> bool {
    let tau = poly.tie_tolerance();
    let base = dot(c.values(), point.values());
    poly.vertices()
        .iter()
        .all(|v| dot(c.values(), v.values()) - base <= tau)
}

/// Every `p_star`-optimal vertex lies in the fair subspace.
pub fn bayes_fair_check(poly: &RiskPolytope, p_star: &GroupMarginal, fair: &FairSubspace) -> Result<bool> {
    let tau = poly.tie_tolerance();
    let min = minimize_linear(poly, p_star)?;
    for &i in &min.argmin {
        if fair.gap(&poly[i])? > tau {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Splits `p_tilde - p_star` into its parts orthogonal to and inside the
/// fair subspace, returned in that order.
pub fn decompose_bias(
    p_star: &GroupMarginal,
    p_tilde: &GroupMarginal,
    fair: &FairSubspace,
) -> Result<(CellArray, CellArray)> {
    let delta = p_tilde.as_array().sub(p_star.as_array())?;
    let inside = fair.project(&delta)?;
    let orth = delta.sub(&inside)?;
    Ok((orth, inside))
}

/// Whether `p_tilde - p_star` is orthogonal to the fair subspace.
pub fn orthogonality_check(p_star: &GroupMarginal, p_tilde: &GroupMarginal, fair: &FairSubspace) -> Result<bool> {
    let (_, inside) = decompose_bias(p_star, p_tilde, fair)?;
    let m = p_star.max_abs().max(p_tilde.max_abs());
    Ok(inside.max_abs() <= 1e-7 * (1.0 + m))
}

/// Convenience for two-group risk-parity profiles.
pub fn rp_profile(values: [f64; 2]) -> RiskProfile {
    let space = crate::profile::GroupSpace::indexed(2, 1).expect("static space");
    RiskProfile::new(space, values.to_vec()).expect("finite values")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{FairKind, GroupSpace};

    fn rp2() -> GroupSpace {
        GroupSpace::indexed(2, 1).unwrap()
    }

    fn poly(space: &GroupSpace, vs: &[&[f64]]) -> RiskPolytope {
        RiskPolytope::from_values(space.clone(), &vs.iter().map(|v| v.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn marg(space: &GroupSpace, p: &[f64]) -> GroupMarginal {
        GroupMarginal::new(space.clone(), p.to_vec()).unwrap()
    }

    #[test]
    fn linear_min_examples() {
        let s = rp2();
        let p = poly(&s, &[&[0.0, 1.0], &[1.0, 0.0], &[0.5, 0.5]]);
        let m = minimize_linear(&p, &marg(&s, &[0.9, 0.1])).unwrap();
        assert!((m.value - 0.1).abs() < 1e-15);
        assert_eq!(m.argmin, vec![0]);

        let single = poly(&s, &[&[0.3, 0.7]]);
        let m = minimize_linear(&single, &marg(&s, &[0.5, 0.5])).unwrap();
        assert_eq!((m.value, m.argmin), (0.5, vec![0]));

        let sym = poly(&s, &[&[0.2, 0.4], &[0.4, 0.2]]);
        let m = minimize_linear(&sym, &marg(&s, &[0.5, 0.5])).unwrap();
        assert_eq!(m.argmin, vec![0, 1]);
    }

    #[test]
    fn fair_min_on_diagonal() {
        let s = rp2();
        let fair = FairSubspace::new(s.clone(), FairKind::RiskParity);
        let p = poly(&s, &[&[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        let cost = marg(&s, &[0.9, 0.1]);
        let m = minimize_linear_fair(&p, &cost, &fair).unwrap();
        assert!((m.value - 0.5).abs() < 1e-12);
        assert!((m.profile.values()[0] - 0.5).abs() < 1e-12);
        assert!((m.profile.values()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fair_min_equals_plain_when_inside() {
        let s = rp2();
        let fair = FairSubspace::new(s.clone(), FairKind::RiskParity);
        let p = poly(&s, &[&[0.2, 0.2], &[0.6, 0.6]]);
        let cost = marg(&s, &[0.3, 0.7]);
        let a = minimize_linear(&p, &cost).unwrap().value;
        let b = minimize_linear_fair(&p, &cost, &fair).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn fair_min_infeasible_has_separator() {
        let s = rp2();
        let fair = FairSubspace::new(s.clone(), FairKind::RiskParity);
        let p = poly(&s, &[&[0.0, 1.0], &[0.0, 0.5]]);
        match minimize_linear_fair(&p, &marg(&s, &[0.5, 0.5]), &fair) {
            Err(Error::Infeasible { separator }) => {
                assert!(fair.project(&separator).unwrap().max_abs() < 1e-12);
                for v in p.vertices() {
                    assert!(dot(separator.values(), v.values()) >= 1.0 - 1e-9);
                }
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn threshold_examples() {
        // index 0 = minority, 1 = majority
        let rt = rp_profile([0.4, 0.1]);
        let rf = rp_profile([0.3, 0.3]);
        let th = rp_threshold(&rt, &rf, 1).unwrap();
        assert!((th.threshold.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(th.verdict(0.5), Some(ShiftVerdict::Harm));
        assert!((th.difference(0.5) - (0.25 - 0.3)).abs() < 1e-15);
        assert_eq!(th.verdict(0.2), Some(ShiftVerdict::Help));
        assert!((th.difference(0.2) - (0.34 - 0.3)).abs() < 1e-15);

        let flat = rp_threshold(&rp_profile([0.2, 0.2]), &rf, 1).unwrap();
        assert_eq!(flat.threshold, None);
        assert_eq!(flat.verdict(0.7), None);

        let same = rp_threshold(&rt, &rt, 1).unwrap();
        assert_eq!(same.threshold, Some(0.0));
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(same.verdict(p), Some(ShiftVerdict::Harm));
            assert_eq!(same.difference(p), 0.0);
        }
    }

    #[test]
    fn threshold_rejects_more_groups() {
        let s = GroupSpace::indexed(3, 1).unwrap();
        let r = RiskProfile::new(s, vec![0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(rp_threshold(&r, &r, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn normal_cone_examples() {
        let s = rp2();
        let sq = poly(&s, &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let a = |x: f64, y: f64| CellArray::new(s.clone(), vec![x, y]).unwrap();
        assert!(normal_cone_member(&sq, &a(0.0, 0.0), &a(-1.0, -1.0)));
        assert!(!normal_cone_member(&sq, &a(0.0, 0.0), &a(1.0, 0.0)));
        assert!(!normal_cone_member(&sq, &a(0.5, 0.5), &a(0.3, -0.2)));
        assert!(normal_cone_member(&sq, &a(0.5, 0.5), &a(0.0, 0.0)));
    }

    #[test]
    fn bayes_fair_examples() {
        let s = rp2();
        let fair = FairSubspace::new(s.clone(), FairKind::RiskParity);
        let u = marg(&s, &[0.5, 0.5]);
        let sym = poly(&s, &[&[0.2, 0.2], &[0.1, 0.5], &[0.5, 0.1]]);
        assert!(bayes_fair_check(&sym, &u, &fair).unwrap());
        let unfair = poly(&s, &[&[0.1, 0.2], &[0.4, 0.4]]);
        assert!(!bayes_fair_check(&unfair, &u, &fair).unwrap());
        let tie = poly(&s, &[&[0.2, 0.2], &[0.1, 0.3]]);
        assert!(!bayes_fair_check(&tie, &u, &fair).unwrap());
    }

    #[test]
    fn decomposition_examples() {
        let s = GroupSpace::indexed(2, 2).unwrap();
        let fair = FairSubspace::new(s.clone(), FairKind::ConditionalRiskParity);
        let uni = GroupMarginal::uniform(s.clone());
        let sim = marg(&s, &[0.4, 0.4, 0.1, 0.1]);
        let (orth, inside) = decompose_bias(&uni, &sim, &fair).unwrap();
        let delta = [0.15, 0.15, -0.15, -0.15];
        for (o, d) in orth.values().iter().zip(delta) {
            assert!((o - d).abs() < 1e-15);
        }
        assert!(inside.max_abs() < 1e-15);
        assert!(orthogonality_check(&uni, &sim, &fair).unwrap());

        let (orth, inside) = decompose_bias(&uni, &uni, &fair).unwrap();
        assert_eq!((orth.max_abs(), inside.max_abs()), (0.0, 0.0));

        let shifted = marg(&s, &[0.35, 0.15, 0.35, 0.15]);
        let (orth, inside) = decompose_bias(&uni, &shifted, &fair).unwrap();
        assert!(orth.max_abs() < 1e-15);
        assert!((inside.values()[0] - 0.1).abs() < 1e-15 && (inside.values()[1] + 0.1).abs() < 1e-15);
        assert!(!orthogonality_check(&uni, &marg(&s, &[0.4, 0.1, 0.4, 0.1]), &fair).unwrap());

        let r = rp2();
        let rp = FairSubspace::new(r.clone(), FairKind::RiskParity);
        assert!(orthogonality_check(&marg(&r, &[0.5, 0.5]), &marg(&r, &[0.93, 0.07]), &rp).unwrap());
    }
}
