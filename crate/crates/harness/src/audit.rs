//! Recovery verdict, bias decomposition and threshold for externally
//! supplied profiles and marginals.

use std::path::Path;

use fairshift_core::geometry::{
    bayes_fair_check, decompose_bias, minimize_linear, minimize_linear_fair, orthogonality_check, recovery_condition,
    rp_threshold, Comparator, GeometryInstance, RecoveryCertificate, RiskPolytope, ShiftVerdict,
};
use fairshift_core::profile::{CellArray, FairKind, FairSubspace, GroupMarginal};
use serde::Serialize;

use crate::config::AuditConfig;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    /// Component of `p_tilde - p_star` orthogonal to the fair subspace.
    pub orthogonal: Vec<f64>,
    pub residual: Vec<f64>,
    pub orthogonal_norm: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Orthogonal-complement element `f` with `<x - f, V_i - R*> <= 0` for every vertex.
    Recoverable { f: Vec<f64> },
    /// A fair mixture with lower training risk than `R*`.
    NotRecoverable { point: Vec<f64>, weights: Vec<f64>, excess: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recovery {
    pub recoverable: bool,
    pub r_star_index: usize,
    pub r_star: Vec<f64>,
    pub x: Vec<f64>,
    pub fair_optimum_under_bias: Vec<f64>,
    pub fair_optimum_value: f64,
    pub certificate: Certificate,
    pub certificate_verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub majority: usize,
    pub threshold: Option<f64>,
    pub comparator: &'static str,
    /// Verdict at the target majority mass.
    pub verdict: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub fair: &'static str,
    pub groups: Vec<String>,
    pub disc_values: Vec<String>,
    pub n_vertices: usize,
    pub bayes_fair: bool,
    /// The bias lies in the orthogonal complement of the fair subspace,
    /// which alone guarantees recovery.
    pub orthogonal_bias: bool,
    pub decomposition: Decomposition,
    /// Absent when the target optimum is not fair.
    pub recovery: Option<Recovery>,
    pub precondition_error: Option<String>,
    /// Two-group risk parity only.
    pub rp_threshold: Option<Threshold>,
}

fn marginal(path: &Path) -> Result<GroupMarginal> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
    let arr = CellArray::read_csv(file).map_err(HarnessError::data(path.display()))?;
    GroupMarginal::from_array(arr).map_err(HarnessError::data(path.display()))
}

/// Reads the audit inputs named in `cfg`.
pub fn load_audit_instance(cfg: &AuditConfig) -> Result<GeometryInstance> {
    if let Some(p) = &cfg.instance {
        return GeometryInstance::load(p).map_err(HarnessError::data(p.display()));
    }
    let (Some(prof), Some(ps), Some(pt)) = (&cfg.profiles, &cfg.p_star, &cfg.p_tilde) else {
        return Err(HarnessError::Config(
            "audit needs either `instance` or all of `profiles`, `p_star`, `p_tilde`".into(),
        ));
    };
    let file = std::fs::File::open(prof).map_err(|e| HarnessError::Data(format!("{}: {e}", prof.display())))?;
    let polytope = RiskPolytope::read_csv(file).map_err(HarnessError::data(prof.display()))?;
    let p_star = marginal(ps)?;
    let p_tilde = marginal(pt)?;
    for (m, path) in [(&p_star, ps), (&p_tilde, pt)] {
        if polytope.space().cell_names() != m.space().cell_names() {
            return Err(HarnessError::Data(format!(
                "{}: cells {:?} do not match the profile cells {:?}",
                path.display(),
                m.space().cell_names(),
                polytope.space().cell_names()
            )));
        }
    }
    // profile headers carry the cell names; reuse that space for the marginals
    let space = polytope.space().clone();
    let p_star = GroupMarginal::new(space.clone(), p_star.probs().to_vec()).map_err(HarnessError::data(ps.display()))?;
    let p_tilde = GroupMarginal::new(space, p_tilde.probs().to_vec()).map_err(HarnessError::data(pt.display()))?;
    Ok(GeometryInstance {
        polytope,
        p_star,
        p_tilde,
    })
}

pub fn audit(inst: &GeometryInstance, kind: Option<FairKind>) -> Result<AuditReport> {
    let poly = &inst.polytope;
    let space = poly.space();
    let kind = kind.unwrap_or(if space.is_trivial_disc() {
        FairKind::RiskParity
    } else {
        FairKind::ConditionalRiskParity
    });
    let fair = FairSubspace::new(space.clone(), kind);
    let d = HarnessError::data;
    let bayes_fair = bayes_fair_check(poly, &inst.p_star, &fair).map_err(d("target optimum"))?;
    let orthogonal_bias = orthogonality_check(&inst.p_star, &inst.p_tilde, &fair).map_err(d("orthogonality"))?;
    let (orth, resid) = decompose_bias(&inst.p_star, &inst.p_tilde, &fair).map_err(d("decomposition"))?;
    let decomposition = Decomposition {
        orthogonal_norm: orth.norm(),
        residual_norm: resid.norm(),
        orthogonal: orth.into_values(),
        residual: resid.into_values(),
    };

    let (recovery, precondition_error) = match recovery_condition(poly, &inst.p_star, &inst.p_tilde, &fair) {
        Ok(v) => {
            let certificate_verified = v.verify(poly, &fair).map_err(d("certificate"))?;
            let certificate = match &v.certificate {
                RecoveryCertificate::Recoverable { f } => Certificate::Recoverable { f: f.values().to_vec() },
                RecoveryCertificate::NotRecoverable { point, weights, excess } => Certificate::NotRecoverable {
                    point: point.values().to_vec(),
                    weights: weights.clone(),
                    excess: *excess,
                },
            };
            let rec = Recovery {
                recoverable: v.recoverable,
                r_star_index: v.r_star_index,
                r_star: v.r_star.values().to_vec(),
                x: v.x.values().to_vec(),
                fair_optimum_under_bias: v.fair_optimum_under_bias.profile.values().to_vec(),
                fair_optimum_value: v.fair_optimum_under_bias.value,
                certificate,
                certificate_verified,
            };
            (Some(rec), None)
        }
        Err(fairshift_core::Error::Precondition(msg)) => (None, Some(msg)),
        Err(e) => return Err(HarnessError::Data(format!("recovery check: {e}"))),
    };

    let rp = if kind == FairKind::RiskParity && space.n_groups() == 2 && space.is_trivial_disc() {
        let min = minimize_linear(poly, &inst.p_tilde).map_err(d("training optimum"))?;
        let i = *min
            .argmin
            .iter()
            .min_by(|&&a, &&b| poly[a].lex_cmp(&poly[b]))
            .expect("non-empty argmin");
        let fm = minimize_linear_fair(poly, inst.p_tilde.as_array(), &fair).map_err(d("fair training optimum"))?;
        let majority = usize::from(inst.p_tilde.probs()[1] > inst.p_tilde.probs()[0]);
        let th = rp_threshold(&poly[i], &fm.profile, majority).map_err(d("threshold"))?;
        Some(Threshold {
            majority,
            threshold: th.threshold,
            comparator: match th.comparator {
                Comparator::HarmAtOrAbove => "harm_at_or_above",
                Comparator::HarmAtOrBelow => "harm_at_or_below",
            },
            verdict: th.verdict(inst.p_star.probs()[majority]).map(|v| match v {
                ShiftVerdict::Harm => "harm",
                ShiftVerdict::Help => "help",
            }),
        })
    } else {
        None
    };

    Ok(AuditReport {
        fair: match kind {
            FairKind::RiskParity => "rp",
            FairKind::ConditionalRiskParity => "crp",
        },
        groups: space.groups().to_vec(),
        disc_values: space.disc_values().to_vec(),
        n_vertices: poly.len(),
        bayes_fair,
        orthogonal_bias,
        decomposition,
        recovery,
        precondition_error,
        rp_threshold: rp,
    })
}

pub fn run_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    let inst = load_audit_instance(cfg)?;
    audit(&inst, cfg.fair_kind()?)
}
