mod common;

use common::{gaussian_blobs, normal};
use mcm_core::data::{class_order, ScaleParams};
use mcm_core::eval::{cross_validate, fold_classifier, grid_search, make_folds, CvOptions, GridSpec};
use mcm_core::{Dataset, Error, KernelSpec, TrainConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn blobs(m: usize, offset: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (xs, ys) = gaussian_blobs(&mut rng, m, 2, offset);
    let labels = ys.iter().map(|y| if *y > 0.0 { "pos" } else { "neg" }.to_string()).collect();
    Dataset::new(xs, labels).unwrap()
}

fn three_blobs(per_class: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres = [(0.0, 4.0), (-4.0, -3.0), (4.0, -3.0)];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..per_class {
        for (k, (cx, cy)) in centres.iter().enumerate() {
            xs.push(vec![cx + normal(&mut rng), cy + normal(&mut rng)]);
            ys.push(format!("{}", k + 1));
        }
    }
    Dataset::new(xs, ys).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn folds_are_stratified_and_balanced(
        raw in prop::collection::vec(0u8..4, 2..80),
        k_seed in 0usize..1000,
        seed in any::<u64>(),
    ) {
        let labels: Vec<String> = raw.iter().map(|v| format!("c{v}")).collect();
        let k = 2 + k_seed % (labels.len().min(10) - 1);
        let plan = make_folds(&labels, k, seed).unwrap();
        prop_assert_eq!(plan.assignments.len(), labels.len());
        let sizes = plan.fold_sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for class in class_order(&labels) {
            let mut counts = vec![0usize; k];
            for (i, l) in labels.iter().enumerate() {
                if *l == class {
                    counts[plan.assignments[i]] += 1;
                }
            }
            prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
        prop_assert_eq!(&plan, &make_folds(&labels, k, seed).unwrap());
    }
}

#[test]
fn separated_blobs_cross_validate_well() {
    let ds = blobs(100, 2.2, 1);
    let plan = make_folds(&ds.labels, 5, 42).unwrap();
    let report = cross_validate(&ds, &TrainConfig::soft_linear(10.0), &plan, &CvOptions::default()).unwrap();
    assert!(report.accuracy.mean >= 0.95, "accuracy {}", report.accuracy.mean);
    assert_eq!(report.folds.len(), 5);
    assert!(!report.sv_applicable);
    assert_eq!(report.std_kind, "population");
}

#[test]
fn reports_are_deterministic() {
    let ds = blobs(60, 1.0, 3);
    let plan = make_folds(&ds.labels, 4, 7).unwrap();
    let cfg = TrainConfig::soft_kernel(1.0, KernelSpec::rbf(0.5));
    let opts = CvOptions {
        scale: true,
        ..Default::default()
    };
    let a = cross_validate(&ds, &cfg, &plan, &opts).unwrap().to_json();
    let b = cross_validate(&ds, &cfg, &plan, &opts).unwrap().to_json();
    assert_eq!(a, b);
    assert!(!a.contains("train_seconds"));
}

#[test]
fn timings_are_opt_in() {
    let ds = blobs(30, 2.0, 3);
    let plan = make_folds(&ds.labels, 3, 7).unwrap();
    let opts = CvOptions {
        record_timings: true,
        ..Default::default()
    };
    let r = cross_validate(&ds, &TrainConfig::soft_linear(1.0), &plan, &opts).unwrap();
    assert!(r.folds.iter().all(|f| f.train_seconds.is_some()));
    assert!(r.train_seconds.is_some());
}

#[test]
fn scaling_is_fitted_on_training_rows_only() {
    let mut ds = blobs(40, 2.0, 5);
    ds.samples[0][0] = 1e3;
    let plan = make_folds(&ds.labels, 4, 1).unwrap();
    let opts = CvOptions {
        scale: true,
        ..Default::default()
    };
    for fold in 0..4 {
        let outcome = fold_classifier(&ds, &TrainConfig::soft_linear(1.0), &plan, fold, &opts).unwrap();
        let train = ds.subset(&plan.train_indices(fold));
        assert_eq!(outcome.classifier.scale, Some(ScaleParams::fit(&train.samples)));
    }
}

#[test]
fn multiclass_reports_both_accuracies() {
    let ds = three_blobs(12, 9);
    let plan = make_folds(&ds.labels, 3, 42).unwrap();
    let r = cross_validate(&ds, &TrainConfig::soft_linear(1.0), &plan, &CvOptions::default()).unwrap();
    assert!(r.mean_binary_accuracy.is_some());
    assert!(r.accuracy.mean > 0.9);

    let outcome = fold_classifier(&ds, &TrainConfig::soft_linear(1.0), &plan, 0, &CvOptions::default()).unwrap();
    let classes = ds.classes();
    for x in &ds.samples {
        assert!(classes.contains(&outcome.classifier.predict_label(x).unwrap()));
    }
}

#[test]
fn fold_failures_name_the_fold() {
    // Two identical points with opposite labels cannot be separated.
    let xs = vec![vec![0.0], vec![0.0], vec![1.0], vec![-1.0], vec![0.0], vec![0.0]];
    let ys = ["a", "b", "a", "b", "a", "b"].iter().map(|s| s.to_string()).collect();
    let ds = Dataset::new(xs, ys).unwrap();
    let plan = make_folds(&ds.labels, 2, 0).unwrap();
    let err = cross_validate(&ds, &TrainConfig::hard_linear(), &plan, &CvOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Fold { .. }));
    assert!(matches!(err.root(), Error::HardMarginInfeasible));
}

#[test]
fn grid_covers_every_cell_and_picks_by_the_rules() {
    let ds = blobs(40, 0.7, 11);
    let plan = make_folds(&ds.labels, 4, 42).unwrap();
    let grid = GridSpec {
        c_values: vec![0.01, 1.0, 100.0],
        gamma_values: vec![0.1, 1.0],
    };
    let cfg = TrainConfig::soft_kernel(1.0, KernelSpec::rbf(1.0));
    let report = grid_search(&ds, &cfg, &grid, &plan, &CvOptions::default()).unwrap();
    assert_eq!(report.cells.len(), 6);
    let best = report.best.unwrap();
    let ok: Vec<_> = report.cells.iter().filter_map(|c| c.report.as_ref().map(|r| (c, r))).collect();
    let top = ok.iter().map(|(_, r)| r.accuracy.mean).fold(f64::NEG_INFINITY, f64::max);
    let best_report = report.cells[best].report.as_ref().unwrap();
    assert_eq!(best_report.accuracy.mean, top);
    for (cell, r) in &ok {
        if r.accuracy.mean == top {
            assert!(best_report.sv_count.mean <= r.sv_count.mean, "cell {}", cell.index);
        }
    }

    let linear = grid_search(&ds, &TrainConfig::soft_linear(1.0), &grid, &plan, &CvOptions::default()).unwrap();
    assert_eq!(linear.cells.len(), 3);
}

#[test]
fn single_cell_grid_selects_it() {
    let ds = blobs(20, 2.0, 2);
    let plan = make_folds(&ds.labels, 2, 42).unwrap();
    let grid = GridSpec {
        c_values: vec![1.0],
        gamma_values: vec![1.0],
    };
    let r = grid_search(&ds, &TrainConfig::soft_linear(1.0), &grid, &plan, &CvOptions::default()).unwrap();
    assert_eq!(r.best, Some(0));
}

#[test]
fn underfitting_c_is_not_selected() {
    // With slack nearly free the far outlier dominates the h-row and drags the
    // hyperplane off the blobs; a moderate C pays to ignore it.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut xs, ys) = gaussian_blobs(&mut rng, 60, 2, 1.2);
    xs[0] = vec![30.0, 30.0];
    let labels = ys.iter().map(|y| if *y > 0.0 { "pos" } else { "neg" }.to_string()).collect();
    let ds = Dataset::new(xs, labels).unwrap();
    let plan = make_folds(&ds.labels, 5, 42).unwrap();
    let grid = GridSpec {
        c_values: vec![1e-4, 1.0],
        gamma_values: vec![1.0],
    };
    let r = grid_search(&ds, &TrainConfig::soft_linear(1.0), &grid, &plan, &CvOptions::default()).unwrap();
    let acc: Vec<f64> = r.cells.iter().map(|c| c.report.as_ref().unwrap().accuracy.mean).collect();
    assert!(acc[1] > acc[0], "{acc:?}");
    assert_eq!(r.best, Some(1));
}
