//! Seeded search for a conditional-risk-parity instance whose target optimum
//! is fair, yet the fair optimum under the training marginal is worse on the
//! target than the unconstrained one. Writes the first hit as a fixture.
//!
//! Usage: cargo run --example find_counterexample -- [out_path] [seed]

use fairshift_core::geometry::random::{fair_optimum_instance, BiasMode};
use fairshift_core::geometry::{bayes_fair_check, compare_under_shift, GeometryInstance, RiskPolytope};
use fairshift_core::profile::{FairKind, FairSubspace, GroupMarginal, GroupSpace};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const MARGIN: f64 = 1e-2;

fn round4(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}

fn rounded(inst: &GeometryInstance) -> Option<GeometryInstance> {
    let space = inst.polytope.space().clone();
    let verts: Vec<Vec<f64>> = inst.polytope.vertices().iter().map(|v| round4(v.values())).collect();
    Some(GeometryInstance {
        polytope: RiskPolytope::from_values(space.clone(), &verts).ok()?,
        p_star: GroupMarginal::from_weights(space.clone(), round4(inst.p_star.probs())).ok()?,
        p_tilde: GroupMarginal::from_weights(space, round4(inst.p_tilde.probs())).ok()?,
    })
}

fn main() {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "crates/core/fixtures/counterexample_v1.csv".into());
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(20240501);
    let fair = FairSubspace::new(GroupSpace::indexed(2, 2).unwrap(), FairKind::ConditionalRiskParity);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for attempt in 0..100_000 {
        let inst = fair_optimum_instance(&mut rng, &fair, 4, BiasMode::Arbitrary);
        let Some(inst) = rounded(&inst) else { continue };
        if !bayes_fair_check(&inst.polytope, &inst.p_star, &fair).unwrap() {
            continue;
        }
        let Ok(cmp) = compare_under_shift(&inst, &fair) else { continue };
        if cmp.constraint_hurts(MARGIN) {
            let note = format!(
                "counterexample v1 (seed {seed}, attempt {attempt})\n\
                 target risk: unconstrained {:.6}, fair {:.6}",
                cmp.target_risk, cmp.target_risk_fair
            );
            let file = std::fs::File::create(&out).expect("create fixture");
            inst.write_csv(file, Some(&note)).expect("write fixture");
            println!("{note}\nwritten to {out}");
            return;
        }
    }
    eprintln!("no counterexample found");
    std::process::exit(1);
}
