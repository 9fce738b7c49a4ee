//! Blanket finite-difference gradient checks for every objective kind,
//! plus dataset round-trips and synthesis sanity.

mod common;

use common::rng;
use probls::dataset::{self, load_csv, write_csv};
use probls::driver::{batch_stats, Objective};
use probls::objectives::{make_problem, Problem, ProblemKind, ProblemSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Central-difference check of `sample_loss_grad` at random points/samples.
fn gradcheck(obj: &dyn Objective, rng: &mut ChaCha8Rng, rel_tol: f64, points: usize) {
    let d = obj.dim();
    let h = 1e-5;
    for _ in 0..points {
        let x: Vec<f64> = (0..d).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
        let idx = rng.gen_range(0..obj.num_samples());
        let mut grad = vec![0.0; d];
        obj.sample_loss_grad(&x, idx, &mut grad);
        // probe a handful of coordinates, not all of them
        for _ in 0..d.min(8) {
            let j = rng.gen_range(0..d);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let mut scratch = vec![0.0; d];
            let fp = obj.sample_loss_grad(&xp, idx, &mut scratch);
            let fm = obj.sample_loss_grad(&xm, idx, &mut scratch);
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (fd - grad[j]).abs() <= rel_tol * grad[j].abs().max(1.0),
                "coordinate {j}, sample {idx}: fd {fd} vs analytic {}",
                grad[j]
            );
        }
    }
}

#[test]
fn quadratic_gradients_match_finite_differences() {
    let spec = ProblemSpec::new(ProblemKind::NoisyQuadratic, 6, 11);
    let problem = make_problem(&spec).unwrap();
    gradcheck(problem.objective(), &mut rng(701), 1e-6, 20);
}

#[test]
fn rosenbrock_gradients_match_finite_differences() {
    let spec = ProblemSpec::new(ProblemKind::NoisyRosenbrock, 5, 12);
    let problem = make_problem(&spec).unwrap();
    gradcheck(problem.objective(), &mut rng(702), 1e-5, 20);
}

#[test]
fn logistic_gradients_match_finite_differences() {
    let mut spec = ProblemSpec::new(ProblemKind::LogisticRegression, 8, 13);
    spec.classes = 3;
    spec.rows = 200;
    let problem = make_problem(&spec).unwrap();
    gradcheck(problem.objective(), &mut rng(703), 1e-5, 20);
}

#[test]
fn mlp_gradients_match_finite_differences() {
    let mut spec = ProblemSpec::new(ProblemKind::Mlp2, 5, 14);
    spec.hidden = 7;
    spec.rows = 100;
    let problem = make_problem(&spec).unwrap();
    gradcheck(problem.objective(), &mut rng(704), 1e-4, 20);
}

#[test]
fn full_batch_mean_equals_full_data_loss() {
    let mut spec = ProblemSpec::new(ProblemKind::Mlp2, 4, 15);
    spec.rows = 300;
    spec.hidden = 5;
    let problem = make_problem(&spec).unwrap();
    let obj = problem.objective();
    let x = problem.initial_point();
    let all: Vec<usize> = (0..obj.num_samples()).collect();
    let stats = batch_stats(obj, &x, &all);
    let mut g = vec![0.0; obj.dim()];
    let total: f64 = (0..obj.num_samples()).map(|i| obj.sample_loss_grad(&x, i, &mut g)).sum();
    assert!(
        (stats.loss_mean - total / obj.num_samples() as f64).abs() <= 1e-10,
        "batch mean {} vs naive {}",
        stats.loss_mean,
        total / obj.num_samples() as f64
    );
}

#[test]
fn csv_round_trip_preserves_values() {
    let ds = dataset::gen_synth(3, 60, 5, 1.5, 77);
    let dir = std::env::temp_dir().join("probls_roundtrip");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("synth.csv");
    write_csv(&ds, &path).unwrap();
    let loaded = load_csv(&path).unwrap();
    assert_eq!(loaded.rows(), ds.rows());
    assert_eq!(loaded.num_features(), ds.num_features());
    for i in 0..ds.rows() {
        assert_eq!(loaded.label(i), ds.label(i));
        for (a, b) in loaded.feature_row(i).iter().zip(ds.feature_row(i)) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}

#[test]
fn separated_classes_are_linearly_learnable() {
    // reference check on the generated data itself: full-batch gradient
    // descent on logistic regression reaches < 2% training error
    let mut spec = ProblemSpec::new(ProblemKind::LogisticRegression, 6, 21);
    spec.rows = 400;
    spec.separation = 6.0;
    let problem = make_problem(&spec).unwrap();
    let Problem::Logistic(ref logistic) = problem else { unreachable!() };
    let obj = problem.objective();
    let mut x = vec![0.0; obj.dim()];
    let all: Vec<usize> = (0..obj.num_samples()).collect();
    for _ in 0..300 {
        let stats = batch_stats(obj, &x, &all);
        for (xi, gi) in x.iter_mut().zip(&stats.grad_mean) {
            *xi -= 0.5 * gi;
        }
    }
    let err = logistic.error_rate(&x, &logistic.train);
    assert!(err < 0.02, "training error {err}");
}

#[test]
fn overlapping_classes_are_not_learnable() {
    let mut spec = ProblemSpec::new(ProblemKind::LogisticRegression, 6, 22);
    spec.rows = 600;
    spec.separation = 0.0;
    let problem = make_problem(&spec).unwrap();
    let Problem::Logistic(ref logistic) = problem else { unreachable!() };
    let obj = problem.objective();
    let mut x = vec![0.0; obj.dim()];
    let all: Vec<usize> = (0..obj.num_samples()).collect();
    for _ in 0..100 {
        let stats = batch_stats(obj, &x, &all);
        for (xi, gi) in x.iter_mut().zip(&stats.grad_mean) {
            *xi -= 0.5 * gi;
        }
    }
    // identically distributed classes: error stays near chance
    let err = logistic.error_rate(&x, &logistic.train);
    assert!(err > 0.35, "error {err} suspiciously low for unseparated data");
}
