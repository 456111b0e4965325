use fairshift_core::data::{binary_space, gaussian_sample, minority_joint, GaussianSpec, LabeledDataset};
use fairshift_core::solver::{
    evaluate, train_constrained, train_unconstrained, ConstraintSpec, RandomizedClassifier, SolverConfig,
};

fn sample(p_minor: f64, n: usize, seed: u64) -> LabeledDataset {
    gaussian_sample(&GaussianSpec::default_design(minority_joint(p_minor).unwrap(), n, seed)).unwrap()
}

fn fit(ds: &LabeledDataset, eps: f64) -> RandomizedClassifier {
    train_constrained(ds, &ConstraintSpec::equalized_odds(eps).unwrap(), &SolverConfig::default()).unwrap()
}

/// Largest between-group spread of mixture error within a label, counted
/// straight from member predictions.
fn eo_gap(model: &RandomizedClassifier, ds: &LabeledDataset) -> f64 {
    let mut err = [[0.0; 2]; 2];
    let mut cnt = [[0.0; 2]; 2];
    for i in 0..ds.len() {
        let (a, y) = (ds.group(i), ds.label(i));
        let wrong: f64 = model
            .members()
            .iter()
            .zip(model.mix())
            .filter(|(h, _)| h.predict(ds.row(i)) != y)
            .map(|(_, w)| w)
            .sum();
        err[a][y] += wrong;
        cnt[a][y] += 1.0;
    }
    (0..2)
        .map(|y| (err[0][y] / cnt[0][y] - err[1][y] / cnt[1][y]).abs())
        .fold(0.0, f64::max)
}

#[test]
fn loose_constraint_matches_plain_logistic() {
    let train = sample(0.1, 2000, 11);
    let test = sample(0.1, 20000, 12);
    let space = binary_space();
    let base = evaluate(&fit(&train, 10.0), &test, &space).unwrap();
    let plain = evaluate(&train_unconstrained(&train, &SolverConfig::default()).unwrap(), &test, &space).unwrap();
    assert!((base.accuracy - plain.accuracy).abs() <= 0.01, "{} vs {}", base.accuracy, plain.accuracy);
}

#[test]
fn symmetric_data_fair_and_baseline_agree() {
    let train = sample(0.25, 2000, 21);
    let test = sample(0.25, 20000, 22);
    let space = binary_space();
    let base = evaluate(&fit(&train, 10.0), &test, &space).unwrap();
    let fair = evaluate(&fit(&train, 0.1), &test, &space).unwrap();
    assert!((base.accuracy - fair.accuracy).abs() <= 0.005, "{} vs {}", base.accuracy, fair.accuracy);
}

#[test]
fn fair_training_gap_within_slack() {
    let train = sample(0.1, 2000, 31);
    let model = fit(&train, 0.1);
    let gap = eo_gap(&model, &train);
    assert!(gap <= 0.15, "gap {gap}");
    let reported = evaluate(&model, &train, &binary_space()).unwrap().gap;
    assert!((gap - reported).abs() <= 1e-12);
}

#[test]
fn training_is_deterministic() {
    let train = sample(0.05, 1500, 41);
    let a = fit(&train, 0.1);
    let b = fit(&train, 0.1);
    assert_eq!(a.to_text(), b.to_text());
    let test = sample(0.25, 5000, 42);
    let (ea, eb) = (
        evaluate(&a, &test, &binary_space()).unwrap(),
        evaluate(&b, &test, &binary_space()).unwrap(),
    );
    assert_eq!(ea.accuracy.to_bits(), eb.accuracy.to_bits());
    assert_eq!(ea.profile, eb.profile);
}

#[test]
fn mixture_profile_is_linear_in_members() {
    let train = sample(0.05, 1500, 51);
    let test = sample(0.25, 5000, 52);
    let space = binary_space();
    let model = fit(&train, 0.1);
    let whole = evaluate(&model, &test, &space).unwrap();
    let mut sum = vec![0.0; space.n_cells()];
    for (h, w) in model.members().iter().zip(model.mix()) {
        let single = evaluate(&RandomizedClassifier::single(h.clone()), &test, &space).unwrap();
        for (s, v) in sum.iter_mut().zip(single.profile.values()) {
            *s += w * v;
        }
    }
    for (s, v) in sum.iter().zip(whole.profile.values()) {
        assert!((s - v).abs() <= 1e-12, "{s} vs {v}");
    }
}

#[test]
fn battery_slack_and_monotone_knob() {
    let grid = [0.01, 0.03, 0.05, 0.1, 0.15];
    let mut over = 0;
    for k in 0..20u64 {
        let train = sample(grid[k as usize % grid.len()], 2000, 1000 + k);
        let fair = eo_gap(&fit(&train, 0.1), &train);
        let base = eo_gap(&fit(&train, 10.0), &train);
        if fair > 0.1 + 0.05 {
            over += 1;
        }
        assert!(fair <= base, "member {k}: fair {fair} > baseline {base}");
    }
    assert!(over <= 1, "{over} members beyond slack");
}
