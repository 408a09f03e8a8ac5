mod common;

use common::{brute_force_h_2d, separable_2d};
use mcm_core::capacity::{h_from_margins, h_unsigned, radius_margin_ratio};
use mcm_core::formulation::fit;
use mcm_core::{BinaryModel, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hard_fit(xs: &[Vec<f64>], ys: &[f64]) -> (Vec<f64>, f64, f64) {
    match fit(xs, ys, &TrainConfig::hard_linear()).unwrap().model {
        BinaryModel::Linear(m) => (m.w, m.b, m.h),
        _ => unreachable!(),
    }
}

#[test]
fn six_point_lp_matches_fractional_brute_force() {
    let xs = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.5],
        vec![0.2, 1.0],
        vec![2.0, 2.0],
        vec![3.0, 1.5],
        vec![2.5, 3.0],
    ];
    let ys = vec![-1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
    let (_, _, h) = hard_fit(&xs, &ys);
    let oracle = brute_force_h_2d(&xs, &ys, 20_000);
    assert!((h - oracle).abs() <= 1e-3, "lp {h} vs brute force {oracle}");
}

#[test]
fn random_separable_sets_match_fractional_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    for _ in 0..20 {
        let m = rng.gen_range(3..=8);
        let (xs, ys) = separable_2d(&mut rng, m);
        let (w, b, h) = hard_fit(&xs, &ys);
        let oracle = brute_force_h_2d(&xs, &ys, 10_000);
        assert!((h - oracle).abs() <= 1e-3, "lp {h} vs brute force {oracle}");
        // The LP is exact, so the grid can only be worse.
        assert!(oracle >= h - 1e-9);

        let f: Vec<f64> = xs.iter().map(|x| w[0] * x[0] + w[1] * x[1] + b).collect();
        let margins: Vec<f64> = f.iter().zip(&ys).map(|(f, y)| f * y).collect();
        let lo = margins.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo >= 1.0 - 1e-8 && lo <= 1.0 + 1e-4, "min margin {lo}");
        assert!((hi - h).abs() <= 1e-8);
        assert!(h >= 1.0 - 1e-8);
        assert!(h <= radius_margin_ratio(&xs, &w, b).unwrap() + 1e-6);
        let signed = h_from_margins(&ys, &f).unwrap();
        let unsigned = h_unsigned(&f).unwrap();
        assert!((signed - unsigned).abs() <= 1e-12);
    }
}
