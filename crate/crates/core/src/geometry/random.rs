//! Seeded random polytopes whose target-optimal vertex is fair.
//!
//! Vertices are uniform on the unit cube and `p_star` is flat-Dirichlet. One
//! designated vertex is projected onto the fair subspace, then scaled toward
//! the origin by factors of 0.9 until it is the unique `p_star`-optimal
//! vertex with a margin. The training marginal is drawn either as a bias
//! orthogonal to the fair subspace or as an arbitrary perturbation.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::geometry::polytope::{GeometryInstance, RiskPolytope};
use crate::profile::{dot, CellArray, FairSubspace, GroupMarginal};

/// How the training marginal relates to the target marginal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasMode {
    /// `p_tilde - p_star` lies in the orthogonal complement of the fair subspace.
    Orthogonal,
    /// Flat-Dirichlet draw or a partial mix of `p_star` toward one.
    Arbitrary,
}

/// Required gap between the designated vertex and every other vertex under `p_star`.
pub const OPTIMALITY_MARGIN: f64 = 1e-3;

pub fn dirichlet<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / s).collect()
}

/// Builds an instance with `n_vertices` vertices (before deduplication)
/// whose designated vertex (index 0) is fair and the unique target optimum.
pub fn fair_optimum_instance<R: Rng + ?Sized>(
    rng: &mut R,
    fair: &FairSubspace,
    n_vertices: usize,
    bias: BiasMode,
) -> GeometryInstance {
    let space = fair.space().clone();
    let n = space.n_cells();
    assert!(n_vertices >= 1, "need at least one vertex");
    loop {
        let p_star = dirichlet(rng, n);
        let mut vertices: Vec<Vec<f64>> = (0..n_vertices)
            .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
            .collect();
        let other_min = vertices[1..]
            .iter()
            .map(|v| dot(&p_star, v))
            .fold(f64::INFINITY, f64::min);
        let v0 = CellArray::new(space.clone(), vertices[0].clone()).expect("finite draw");
        let mut r = fair.project(&v0).expect("same space").into_values();
        let mut ok = false;
        for _ in 0..400 {
            if dot(&p_star, &r) <= other_min - OPTIMALITY_MARGIN {
                ok = true;
                break;
            }
            r.iter_mut().for_each(|x| *x *= 0.9);
        }
        if !ok {
            continue;
        }
        vertices[0] = r;
        let Ok(polytope) = RiskPolytope::from_values(space.clone(), &vertices) else {
            continue;
        };
        let p_star = GroupMarginal::from_weights(space.clone(), p_star).expect("valid weights");
        let p_tilde = match bias {
            BiasMode::Orthogonal => orthogonal_bias(rng, fair, &p_star),
            BiasMode::Arbitrary => arbitrary_bias(rng, &p_star),
        };
        return GeometryInstance {
            polytope,
            p_star,
            p_tilde,
        };
    }
}

fn orthogonal_bias<R: Rng + ?Sized>(rng: &mut R, fair: &FairSubspace, p_star: &GroupMarginal) -> GroupMarginal {
    let space = fair.space().clone();
    let noise: Vec<f64> = (0..space.n_cells()).map(|_| StandardNormal.sample(rng)).collect();
    let noise = CellArray::new(space.clone(), noise).expect("finite noise");
    let d = fair.project_perp(&noise).expect("same space");
    // largest step keeping every entry nonnegative, then a random fraction of it
    let limit = p_star
        .probs()
        .iter()
        .zip(d.values())
        .filter(|(_, &di)| di < 0.0)
        .map(|(&p, &di)| p / -di)
        .fold(f64::INFINITY, f64::min);
    let step = if limit.is_finite() { 0.9 * limit * rng.random::<f64>() } else { 0.0 };
    let values: Vec<f64> = p_star
        .probs()
        .iter()
        .zip(d.values())
        .map(|(&p, &di)| (p + step * di).max(0.0))
        .collect();
    GroupMarginal::from_weights(space, values).expect("nonnegative weights")
}

fn arbitrary_bias<R: Rng + ?Sized>(rng: &mut R, p_star: &GroupMarginal) -> GroupMarginal {
    let space = p_star.space().clone();
    let draw = dirichlet(rng, space.n_cells());
    let s = if rng.random::<bool>() { 1.0 } else { rng.random::<f64>() };
    let values = p_star
        .probs()
        .iter()
        .zip(&draw)
        .map(|(&p, &q)| (1.0 - s) * p + s * q)
        .collect();
    GroupMarginal::from_weights(space, values).expect("nonnegative weights")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ops::{bayes_fair_check, minimize_linear, orthogonality_check};
    use crate::profile::{FairKind, GroupSpace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn designated_vertex_is_unique_fair_optimum() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for kind in [FairKind::ConditionalRiskParity, FairKind::RiskParity] {
            let n_disc = if kind == FairKind::RiskParity { 1 } else { 2 };
            let fair = FairSubspace::new(GroupSpace::indexed(2, n_disc).unwrap(), kind);
            for k in 0..50 {
                let bias = if k % 2 == 0 { BiasMode::Orthogonal } else { BiasMode::Arbitrary };
                let inst = fair_optimum_instance(&mut rng, &fair, 3 + k % 8, bias);
                let m = minimize_linear(&inst.polytope, &inst.p_star).unwrap();
                assert_eq!(m.argmin, vec![0]);
                assert!(bayes_fair_check(&inst.polytope, &inst.p_star, &fair).unwrap());
                if bias == BiasMode::Orthogonal {
                    assert!(orthogonality_check(&inst.p_star, &inst.p_tilde, &fair).unwrap());
                }
            }
        }
    }
}
