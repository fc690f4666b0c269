use lola::linalg::{standardize, student_cdf, DEFAULT_STANDARDIZE_TOL};
use lola::select::{confusion, LolaOptions};
use lola::simgen::{simulate, SimScenario};
use lola::split::deviance_split_oracle;
use lola::{deviance_split, lol, lola, Matrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data: Vec<f64> = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_col_major(n, p, data).unwrap()
}

/// Sparse instance with a clear gap between signal and noise.
fn instance(seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, p) = (80, 60);
    let x = gaussian(n, p, &mut rng);
    let mut beta = vec![0.0; p];
    for j in rand::seq::index::sample(&mut rng, p, 3) {
        beta[j] = if rng.random::<bool>() { 3.0 } else { -3.0 };
    }
    let mut y = x.mul_vec(&beta);
    for v in &mut y {
        *v += 0.5 * rng.sample::<f64, _>(StandardNormal);
    }
    (x, y)
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, 2..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn split_matches_quadratic_oracle(v in values()) {
        let fast = deviance_split(&v).unwrap();
        let slow = deviance_split_oracle(&v).unwrap();
        prop_assert_eq!(fast.split_index, slow.split_index);
        prop_assert_eq!(fast.upper_set, slow.upper_set);
    }

    #[test]
    fn split_is_scale_and_sign_invariant(v in values(), c in 0.01f64..100.0, flips in prop::collection::vec(any::<bool>(), 60)) {
        let base = deviance_split(&v).unwrap();
        let w: Vec<f64> = v.iter().zip(&flips).map(|(x, &f)| if f { -c * x } else { c * x }).collect();
        let other = deviance_split(&w).unwrap();
        prop_assert_eq!(base.upper_set, other.upper_set);
    }

    #[test]
    fn split_commutes_with_permutation(v in values(), seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..v.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let w: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
        let a = deviance_split(&v).unwrap();
        let b = deviance_split(&w).unwrap();
        let mut mapped: Vec<usize> = b.upper_set.iter().map(|&k| perm[k]).collect();
        mapped.sort_unstable();
        prop_assert_eq!(a.upper_set, mapped);
        prop_assert_eq!(a.threshold, b.threshold);
    }

    #[test]
    fn standardize_is_idempotent(seed in any::<u64>(), n in 5usize..40, p in 2usize..12) {
        let x = gaussian(n, p, &mut ChaCha8Rng::seed_from_u64(seed));
        let once = standardize(&x, DEFAULT_STANDARDIZE_TOL).unwrap();
        let twice = standardize(&once.xt, DEFAULT_STANDARDIZE_TOL).unwrap();
        for (a, b) in once.xt.as_col_major().iter().zip(twice.xt.as_col_major()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        for s in &twice.scales {
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coherence_ignores_column_scale(seed in any::<u64>(), scales in prop::collection::vec(0.001f64..1000.0, 8)) {
        let x = gaussian(30, 8, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut scaled = x.clone();
        for (j, c) in scales.iter().enumerate() {
            scaled.col_mut(j).iter_mut().for_each(|v| *v *= c);
        }
        let a = standardize(&x, DEFAULT_STANDARDIZE_TOL).unwrap().coherence;
        let b = standardize(&scaled, DEFAULT_STANDARDIZE_TOL).unwrap().coherence;
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn student_cdf_is_symmetric(t in -40.0f64..40.0, df in 0.5f64..500.0) {
        let lo = student_cdf(-t, df).unwrap();
        let hi = student_cdf(t, df).unwrap();
        prop_assert!((lo + hi - 1.0).abs() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn selection_ignores_positive_column_scale(seed in any::<u64>(), c in prop::collection::vec(0.01f64..100.0, 60)) {
        let (x, y) = instance(seed);
        let mut scaled = x.clone();
        for (j, s) in c.iter().enumerate() {
            scaled.col_mut(j).iter_mut().for_each(|v| *v *= s);
        }
        let opts = LolaOptions::default();
        let a = lola(&x, &y, &opts).unwrap();
        let b = lola(&scaled, &y, &opts).unwrap();
        prop_assert_eq!(&a.leaders, &b.leaders);
        prop_assert_eq!(&a.selected, &b.selected);
        for j in &a.leaders {
            let rel = (a.beta_hat[*j] - c[*j] * b.beta_hat[*j]).abs() / a.beta_hat[*j].abs().max(1e-300);
            prop_assert!(rel < 1e-8);
        }
    }

    #[test]
    fn selection_commutes_with_column_permutation(seed in any::<u64>()) {
        let (x, y) = instance(seed);
        let mut perm: Vec<usize> = (0..x.cols()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let xp = x.select_cols(&perm);
        let opts = LolaOptions::default();
        let a = lola(&x, &y, &opts).unwrap();
        let b = lola(&xp, &y, &opts).unwrap();
        let mut mapped: Vec<usize> = b.selected.iter().map(|&k| perm[k]).collect();
        mapped.sort_unstable();
        prop_assert_eq!(a.selected, mapped);
    }

    #[test]
    fn selection_ignores_row_order(seed in any::<u64>()) {
        let (x, y) = instance(seed);
        let mut rows: Vec<usize> = (0..x.rows()).collect();
        rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 2));
        let xr = x.select_rows(&rows);
        let yr: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
        let opts = LolaOptions::default();
        prop_assert_eq!(lola(&x, &y, &opts).unwrap().selected, lola(&xr, &yr, &opts).unwrap().selected);
    }

    #[test]
    fn larger_s_selects_a_subset(seed in any::<u64>(), t in 0.0f64..2.0, s1 in 0.0f64..4.0, ds in 0.0f64..4.0) {
        let (x, y) = instance(seed);
        let opts = LolaOptions::default();
        let Ok(a) = lol(&x, &y, t, s1, &opts) else { return Ok(()) };
        let b = lol(&x, &y, t, s1 + ds, &opts).unwrap();
        prop_assert_eq!(&a.leaders, &b.leaders);
        prop_assert!(b.selected.iter().all(|j| a.selected.contains(j)));
    }
}

fn exact_recovery_rate(n: usize, seeds: u64) -> f64 {
    let hits = (0..seeds)
        .filter(|&seed| {
            let sc = SimScenario {
                n,
                p: 500,
                support_size: 5,
                ..SimScenario::exp1(seed)
            };
            let d = simulate(&sc).unwrap();
            let r = lola(&d.x, &d.y, &LolaOptions::default()).unwrap();
            let c = confusion(&r.selected, &d.truth.support, sc.p);
            c.fp == 0 && c.fn_ == 0
        })
        .count();
    hits as f64 / seeds as f64
}

#[test]
fn exact_recovery_improves_with_n() {
    let rates: Vec<f64> = [100, 200, 400].iter().map(|&n| exact_recovery_rate(n, 100)).collect();
    assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{rates:?}");
    assert!(rates[2] >= 0.99, "{rates:?}");
}
