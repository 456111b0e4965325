//! The achievable risk set as a vertex-represented polytope, linear
//! minimization over it with and without the fair constraint, and the
//! recovery checks.

pub mod basis;
pub mod lp;
mod ops;
mod polytope;
pub mod random;
mod recovery;

pub use basis::FairBasis;
pub use ops::{
    bayes_fair_check, decompose_bias, minimize_linear, minimize_linear_fair, normal_cone_member,
    orthogonality_check, rp_profile, rp_threshold, Comparator, FairMin, LinearMin, RpThreshold, ShiftVerdict,
};
pub use polytope::{GeometryInstance, RiskPolytope, DEDUP_TOL};
pub use recovery::{recovery_condition, RecoveryCertificate, RecoveryVerdict};

use crate::error::Result;
use crate::profile::{dot, FairSubspace, RiskProfile};

/// Unconstrained and fair training-domain optima, scored on the target.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftComparison {
    /// Lexicographically smallest `p_tilde`-optimal vertex.
    pub r_tilde: RiskProfile,
    pub r_tilde_fair: RiskProfile,
    /// `<p_star, r_tilde>`.
    pub target_risk: f64,
    /// `<p_star, r_tilde_fair>`.
    pub target_risk_fair: f64,
}

impl ShiftComparison {
    /// True when the fair constraint strictly worsens target risk by more than `margin`.
    pub fn constraint_hurts(&self, margin: f64) -> bool {
        self.target_risk < self.target_risk_fair - margin
    }
}

pub fn compare_under_shift(inst: &GeometryInstance, fair: &FairSubspace) -> Result<ShiftComparison> {
    let poly = &inst.polytope;
    let min = minimize_linear(poly, &inst.p_tilde)?;
    let i = *min
        .argmin
        .iter()
        .min_by(|&&a, &&b| poly[a].lex_cmp(&poly[b]))
        .expect("non-empty argmin");
    let r_tilde = poly[i].clone();
    let fm = minimize_linear_fair(poly, inst.p_tilde.as_array(), fair)?;
    Ok(ShiftComparison {
        target_risk: dot(inst.p_star.probs(), r_tilde.values()),
        target_risk_fair: dot(inst.p_star.probs(), fm.profile.values()),
        r_tilde,
        r_tilde_fair: fm.profile,
    })
}

/// Text of the shipped conditional-risk-parity counterexample: the target
/// optimum is fair, yet constraining training-domain risk minimization to
/// the fair set raises target risk.
pub const COUNTEREXAMPLE_V1: &str = include_str!("../../fixtures/counterexample_v1.csv");

pub fn counterexample_v1() -> Result<GeometryInstance> {
    GeometryInstance::read_csv(COUNTEREXAMPLE_V1.as_bytes())
}
