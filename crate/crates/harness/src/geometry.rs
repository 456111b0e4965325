//! Counterexample check and the two-group threshold sweep.

use std::path::Path;

use fairshift_core::geometry::{
    bayes_fair_check, compare_under_shift, counterexample_v1, minimize_linear, minimize_linear_fair, rp_threshold,
    Comparator, GeometryInstance, RiskPolytope, ShiftVerdict,
};
use fairshift_core::profile::{FairKind, FairSubspace, GroupMarginal, GroupSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::seeds::{cell_seed, stream};

/// Risk differences smaller than this count as ties.
pub const TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub source: String,
    pub bayes_fair: bool,
    /// Target risk of the unconstrained training optimum.
    pub target_risk: f64,
    /// Target risk of the fair training optimum.
    pub target_risk_fair: f64,
    pub holds: bool,
}

pub fn check_counterexample(inst: &GeometryInstance, source: &str) -> Result<CounterexampleReport> {
    let fair = FairSubspace::new(inst.polytope.space().clone(), FairKind::ConditionalRiskParity);
    let ctx = || format!("counterexample {source}");
    let bayes_fair = bayes_fair_check(&inst.polytope, &inst.p_star, &fair).map_err(HarnessError::data(ctx()))?;
    let cmp = compare_under_shift(inst, &fair).map_err(HarnessError::data(ctx()))?;
    Ok(CounterexampleReport {
        source: source.to_string(),
        bayes_fair,
        target_risk: cmp.target_risk,
        target_risk_fair: cmp.target_risk_fair,
        holds: bayes_fair && cmp.target_risk < cmp.target_risk_fair,
    })
}

/// One grid point of a sweep over the target majority mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub instance: usize,
    pub majority_mass: f64,
    pub risk: f64,
    pub risk_fair: f64,
    /// `risk - risk_fair`.
    pub difference: f64,
    /// `harm`, `help` or `tie`, from the inner products.
    pub direct: &'static str,
    /// `harm`, `help` or `undefined`, from the threshold.
    pub predicted: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingRow {
    pub instance: usize,
    pub source: String,
    pub r_tilde: [f64; 2],
    pub r_tilde_fair: [f64; 2],
    pub majority: usize,
    pub threshold: Option<f64>,
    pub comparator: &'static str,
    /// Sign change of the difference along the grid, interpolated.
    pub crossing: Option<f64>,
    /// Grid points where the threshold verdict contradicts the direct one.
    pub disagreements: usize,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryReport {
    pub counterexample: CounterexampleReport,
    pub crossings: Vec<CrossingRow>,
    #[serde(skip)]
    pub sweep: Vec<SweepPoint>,
}

impl GeometryReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.counterexample.holds {
            out.push(format!(
                "counterexample {}: bayes_fair {}, target risk {} vs fair {}",
                self.counterexample.source,
                self.counterexample.bayes_fair,
                self.counterexample.target_risk,
                self.counterexample.target_risk_fair
            ));
        }
        for c in self.crossings.iter().filter(|c| !c.consistent) {
            out.push(format!(
                "sweep instance {} ({}): threshold {:?}, crossing {:?}, {} disagreements",
                c.instance, c.source, c.threshold, c.crossing, c.disagreements
            ));
        }
        out
    }
}

fn comparator_name(c: Comparator) -> &'static str {
    match c {
        Comparator::HarmAtOrAbove => "harm_at_or_above",
        Comparator::HarmAtOrBelow => "harm_at_or_below",
    }
}

/// Interpolated sign changes of `d` over `grid`; zeros are skipped.
fn sign_changes(grid: &[f64], d: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for (j, &v) in d.iter().enumerate() {
        if v.abs() <= TIE * 1e-3 {
            continue;
        }
        if let Some(i) = last {
            if d[i].signum() != v.signum() {
                out.push(grid[i] - d[i] * (grid[j] - grid[i]) / (v - d[i]));
            }
        }
        last = Some(j);
    }
    out
}

/// Sweeps the target majority mass for a two-group instance trained on
/// `p_tilde`; the training majority is the larger group of `p_tilde`.
pub fn sweep_instance(
    index: usize,
    source: &str,
    poly: &RiskPolytope,
    p_tilde: &GroupMarginal,
    points: usize,
) -> Result<(CrossingRow, Vec<SweepPoint>)> {
    let ctx = || format!("sweep instance {index} ({source})");
    let space = poly.space();
    if space.n_groups() != 2 || !space.is_trivial_disc() {
        return Err(HarnessError::Data(format!("{}: needs a two-group risk-parity space", ctx())));
    }
    let fair = FairSubspace::new(space.clone(), FairKind::RiskParity);
    let min = minimize_linear(poly, p_tilde).map_err(HarnessError::data(ctx()))?;
    let i = *min
        .argmin
        .iter()
        .min_by(|&&a, &&b| poly[a].lex_cmp(&poly[b]))
        .expect("non-empty argmin");
    let r_tilde = poly[i].clone();
    let fm = minimize_linear_fair(poly, p_tilde.as_array(), &fair).map_err(HarnessError::data(ctx()))?;
    let majority = usize::from(p_tilde.probs()[1] > p_tilde.probs()[0]);
    let th = rp_threshold(&r_tilde, &fm.profile, majority).map_err(HarnessError::data(ctx()))?;

    let grid: Vec<f64> = (0..points).map(|k| k as f64 / (points - 1) as f64).collect();
    let mut sweep = Vec::with_capacity(points);
    let mut diffs = Vec::with_capacity(points);
    let mut disagreements = 0;
    for &p in &grid {
        let mut w = [0.0; 2];
        w[majority] = p;
        w[1 - majority] = 1.0 - p;
        let risk = w[0] * r_tilde.values()[0] + w[1] * r_tilde.values()[1];
        let risk_fair = w[0] * fm.profile.values()[0] + w[1] * fm.profile.values()[1];
        let difference = risk - risk_fair;
        let direct = if difference.abs() < TIE {
            "tie"
        } else if difference < 0.0 {
            "harm"
        } else {
            "help"
        };
        let predicted = match th.verdict(p) {
            Some(ShiftVerdict::Harm) => "harm",
            Some(ShiftVerdict::Help) => "help",
            None => "undefined",
        };
        if direct != "tie" && predicted != "undefined" && direct != predicted {
            disagreements += 1;
        }
        diffs.push(difference);
        sweep.push(SweepPoint {
            instance: index,
            majority_mass: p,
            risk,
            risk_fair,
            difference,
            direct,
            predicted,
        });
    }
    let changes = sign_changes(&grid, &diffs);
    let flat = diffs.iter().all(|d| d.abs() < TIE);
    let crossing_ok = match (changes.as_slice(), th.threshold) {
        ([], None) => true,
        ([], Some(t)) => flat || t <= TIE || t >= 1.0 - TIE,
        ([c], Some(t)) => (c - t).abs() <= TIE,
        _ => false,
    };
    let row = CrossingRow {
        instance: index,
        source: source.to_string(),
        r_tilde: [r_tilde.values()[0], r_tilde.values()[1]],
        r_tilde_fair: [fm.profile.values()[0], fm.profile.values()[1]],
        majority,
        threshold: th.threshold,
        comparator: comparator_name(th.comparator),
        crossing: changes.first().copied(),
        disagreements,
        consistent: crossing_ok && disagreements == 0,
    };
    Ok((row, sweep))
}

/// A random two-group instance whose hull meets the fair diagonal, with a
/// training distribution that favours group 1.
pub fn random_rp_instance<R: Rng>(rng: &mut R) -> (RiskPolytope, GroupMarginal) {
    let space = GroupSpace::indexed(2, 1).expect("static space");
    let fair = FairSubspace::new(space.clone(), FairKind::RiskParity);
    loop {
        let n = rng.random_range(3..=8);
        let verts: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let q = rng.random_range(0.55..0.95);
        let poly = RiskPolytope::from_values(space.clone(), &verts).expect("finite vertices");
        let p_tilde = GroupMarginal::new(space.clone(), vec![1.0 - q, q]).expect("probabilities");
        if minimize_linear_fair(&poly, p_tilde.as_array(), &fair).is_ok() {
            return (poly, p_tilde);
        }
    }
}

fn load_instance(path: &Path) -> Result<GeometryInstance> {
    GeometryInstance::load(path).map_err(HarnessError::data(path.display()))
}

pub fn run_geometry(cfg: &ExperimentConfig) -> Result<GeometryReport> {
    let g = &cfg.geometry;
    let (inst, source) = match &g.counterexample {
        Some(p) => (load_instance(p)?, p.display().to_string()),
        None => (
            counterexample_v1().map_err(HarnessError::data("shipped counterexample"))?,
            "shipped:counterexample_v1".to_string(),
        ),
    };
    let counterexample = check_counterexample(&inst, &source)?;

    let mut crossings = Vec::new();
    let mut sweep = Vec::new();
    for (k, path) in g.sweep_files.iter().enumerate() {
        let inst = load_instance(path)?;
        let (row, pts) = sweep_instance(k, &path.display().to_string(), &inst.polytope, &inst.p_tilde, g.sweep_points)?;
        crossings.push(row);
        sweep.extend(pts);
    }
    let offset = crossings.len();
    for k in 0..g.sweep_instances {
        let mut rng = ChaCha20Rng::seed_from_u64(stream(cell_seed(cfg.seed, 0, k), 7));
        let (poly, p_tilde) = random_rp_instance(&mut rng);
        let (row, pts) = sweep_instance(offset + k, &format!("random:{k}"), &poly, &p_tilde, g.sweep_points)?;
        crossings.push(row);
        sweep.extend(pts);
    }
    Ok(GeometryReport {
        counterexample,
        crossings,
        sweep,
    })
}

pub fn write_geometry(report: &GeometryReport, dir: &Path) -> Result<()> {
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;
    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
    for p in &report.sweep {
        w.serialize(p)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("crossings.csv"))?;
    w.write_record([
        "instance",
        "source",
        "majority",
        "threshold",
        "comparator",
        "crossing",
        "disagreements",
        "consistent",
    ])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for c in &report.crossings {
        w.write_record([
            c.instance.to_string(),
            c.source.clone(),
            c.majority.to_string(),
            opt(c.threshold),
            c.comparator.to_string(),
            opt(c.crossing),
            c.disagreements.to_string(),
            c.consistent.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairshift_core::geometry::rp_profile;

    fn rp(verts: &[[f64; 2]], p_tilde: [f64; 2]) -> (RiskPolytope, GroupMarginal) {
        let space = GroupSpace::indexed(2, 1).unwrap();
        let v: Vec<Vec<f64>> = verts.iter().map(|x| x.to_vec()).collect();
        (
            RiskPolytope::from_values(space.clone(), &v).unwrap(),
            GroupMarginal::new(space, p_tilde.to_vec()).unwrap(),
        )
    }

    #[test]
    fn crossing_equals_threshold() {
        // training majority is group 1; unconstrained optimum (0.4, 0.2), fair (0.3, 0.3)
        let (poly, pt) = rp(&[[0.2, 0.4], [0.4, 0.2], [0.3, 0.3]], [0.2, 0.8]);
        let (row, pts) = sweep_instance(0, "t", &poly, &pt, 101).unwrap();
        assert_eq!(row.r_tilde, [0.4, 0.2]);
        assert!((row.threshold.unwrap() - 0.5).abs() < 1e-12);
        assert!((row.crossing.unwrap() - 0.5).abs() < 1e-12);
        assert!(row.consistent);
        assert_eq!(pts.len(), 101);
        let th = rp_threshold(&rp_profile([0.4, 0.2]), &rp_profile([0.3, 0.3]), 1).unwrap();
        assert!((th.threshold.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn already_fair_has_no_crossing() {
        let (poly, pt) = rp(&[[0.3, 0.3], [0.5, 0.2], [0.2, 0.5]], [0.5, 0.5]);
        let (row, pts) = sweep_instance(0, "t", &poly, &pt, 11).unwrap();
        assert_eq!(row.threshold, None);
        assert_eq!(row.crossing, None);
        assert!(row.consistent);
        assert!(pts.iter().all(|p| p.direct == "tie"));
    }

    #[test]
    fn shipped_counterexample_holds() {
        let r = check_counterexample(&counterexample_v1().unwrap(), "shipped").unwrap();
        assert!(r.holds && r.bayes_fair);
        assert!(r.target_risk < r.target_risk_fair);
    }

    #[test]
    fn sign_changes_interpolate() {
        assert_eq!(sign_changes(&[0.0, 1.0], &[-1.0, 1.0]), vec![0.5]);
        assert_eq!(sign_changes(&[0.0, 0.5, 1.0], &[-1.0, 0.0, 1.0]), vec![0.5]);
        assert!(sign_changes(&[0.0, 1.0], &[1.0, 2.0]).is_empty());
    }
}
