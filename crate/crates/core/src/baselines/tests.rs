use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::Label;
use crate::synth::{generate, planted_weights, DriftSchedule, RegimeSpec};

fn ex(features: &[f64], attack: bool) -> LabeledExample<f64> {
    let mut x = features.to_vec();
    x.push(1.0);
    LabeledExample::new(x, if attack { Label::Attack } else { Label::Normal })
}

fn column(values: &[(f64, bool)]) -> Vec<LabeledExample<f64>> {
    values.iter().map(|&(v, a)| ex(&[v], a)).collect()
}

/// Independent plug-in estimate: bins by explicit edge comparison and
/// I = H(X) + H(Y) - H(X, Y) from brute-force joint counts.
fn mi_oracle(xs: &[f64], ys: &[bool], bins: usize) -> f64 {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return 0.0;
    }
    let width = (hi - lo) / bins as f64;
    let in_bin = |x: f64, b: usize| {
        let left = lo + b as f64 * width;
        let right = lo + (b + 1) as f64 * width;
        x >= left && (x < right || b == bins - 1)
    };
    let n = xs.len() as f64;
    let h = |counts: Vec<usize>| -> f64 {
        counts.into_iter().filter(|&c| c > 0).map(|c| c as f64 / n).map(|p| -p * p.ln()).sum()
    };
    let hx = h((0..bins).map(|b| xs.iter().filter(|&&x| in_bin(x, b)).count()).collect());
    let hy = h([false, true].iter().map(|&c| ys.iter().filter(|&&y| y == c).count()).collect());
    let hxy = h((0..bins)
        .flat_map(|b| [false, true].map(|c| xs.iter().zip(ys).filter(|&(&x, &y)| in_bin(x, b) && y == c).count()))
        .collect());
    hx + hy - hxy
}

#[test]
fn fisher_examples() {
    let same = column(&[(1.0, false), (2.0, false), (1.0, true), (2.0, true)]);
    assert_eq!(fisher_score(&same).unwrap().scores, vec![0.0]);
    let split = column(&[(0.0, false), (1.0, false), (2.0, true), (3.0, true)]);
    assert_eq!(fisher_score(&split).unwrap().scores, vec![4.0]);
    let constant = column(&[(0.0, false), (0.0, false), (1.0, true), (1.0, true)]);
    assert_eq!(fisher_score(&constant).unwrap().scores, vec![0.0]);
    let one = column(&[(0.0, false), (1.0, false)]);
    assert!(matches!(fisher_score(&one), Err(Error::SingleClass)));
}

#[test]
fn chi2_examples() {
    let same = column(&[(1.0, false), (3.0, false), (1.0, true), (3.0, true)]);
    assert_eq!(chi2_score(&same).unwrap().scores, vec![0.0]);
    // After the min-shift the masses are 6 (normal) and 2 (attack).
    let table = column(&[
        (0.0, false),
        (2.0, false),
        (2.0, false),
        (2.0, false),
        (0.0, true),
        (0.0, true),
        (1.0, true),
        (1.0, true),
    ]);
    assert_eq!(chi2_score(&table).unwrap().scores, vec![2.0]);
    let zero = column(&[(5.0, false), (5.0, true)]);
    assert_eq!(chi2_score(&zero).unwrap().scores, vec![0.0]);
}

#[test]
fn chi2_attack_only_feature_is_maximal() {
    // Same total mass (2) and class sizes; mass concentrated in one class wins.
    let data = vec![
        ex(&[0.0, 0.0, 1.0], false),
        ex(&[0.0, 1.0, 0.0], false),
        ex(&[1.0, 0.0, 1.0], true),
        ex(&[1.0, 1.0, 0.0], true),
    ];
    let s = chi2_score(&data).unwrap().scores;
    assert!(s[0] > s[1] && s[0] >= s[2], "{s:?}");
}

#[test]
fn mutual_info_examples() {
    let constant = column(&[(3.0, false), (3.0, true), (3.0, true)]);
    assert_eq!(mutual_info_score(&constant, 10).unwrap().scores, vec![0.0]);
    let copy = column(&[(0.0, false), (1.0, true), (0.0, false), (1.0, true)]);
    assert_relative_eq!(mutual_info_score(&copy, 10).unwrap().scores[0], 2f64.ln(), max_relative = 1e-15);
    assert!(mutual_info_score(&copy, 1).is_err());
    assert!(mutual_info_score(&[], 10).is_err());
}

#[test]
fn mutual_info_matches_oracle_on_50_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let xs: Vec<f64> = (0..50).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let ys: Vec<bool> = xs.iter().map(|x| rng.gen_bool(if *x > 0.0 { 0.8 } else { 0.3 })).collect();
    let data: Vec<_> = xs.iter().zip(&ys).map(|(&x, &y)| ex(&[x], y)).collect();
    let got = mutual_info_score(&data, 10).unwrap().scores[0];
    assert!((got - mi_oracle(&xs, &ys, 10)).abs() < 1e-12);
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert!("tree".parse::<Method>().is_err());
}

#[test]
fn selection_orders_by_score_then_index() {
    let s = ScoredFeatures { method: Method::Fisher, scores: vec![1.0, 3.0, 3.0, 0.5], elapsed: 0.0 };
    assert_eq!(s.order(), vec![1, 2, 0, 3]);
    assert_eq!(s.select(2).unwrap(), vec![1, 2]);
    assert!(s.select(0).is_err());
    assert!(s.select(5).is_err());
}

fn planted(seed: u64, windows: usize, noise: f64) -> (Vec<LabeledExample<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, idx) = planted_weights(5, &mut rng);
    let sched = DriftSchedule::new(vec![RegimeSpec::new(w, noise, windows).unwrap()]).unwrap();
    let data = generate(sched, 100, seed).map(|r| ex(&r.features, r.label.unwrap().is_attack())).collect();
    (data, idx)
}

/// Single informative column among noise columns.
fn one_signal(seed: u64, n: usize, d: usize) -> (Vec<LabeledExample<f64>>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signal = rng.gen_range(0..d);
    let data = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let attack = x[signal] < 0.0;
            ex(&x, attack)
        })
        .collect();
    (data, signal)
}

#[test]
fn rfe_keeps_the_deciding_feature() {
    let opts = ScoringOptions::default();
    let survived = (0..20)
        .filter(|&seed| {
            let (data, signal) = one_signal(seed, 300, 8);
            let s = rfe(&data, &ScoringOptions { seed, ..opts }, 1).unwrap();
            s.select(1).unwrap() == vec![signal]
        })
        .count();
    assert!(survived >= 19, "{survived}/20");
}

#[test]
fn rfe_scores_are_elimination_rounds() {
    let (data, signal) = one_signal(3, 200, 5);
    let s = rfe(&data, &ScoringOptions::default(), 2).unwrap();
    let mut sorted = s.scores.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(sorted, vec![0.0, 1.0, 2.0, 3.0, 3.0]);
    assert_eq!(s.scores[signal], 3.0);
}

#[test]
fn rfe_without_elimination_is_abs_weights() {
    let (data, _) = one_signal(4, 200, 4);
    let opts = ScoringOptions::default();
    let s = rfe(&data, &opts, 4).unwrap();
    let z = scorers::standardize(&data, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let w = scorers::fit(&z, &[0, 1, 2, 3], &opts, &mut rng).unwrap();
    assert_eq!(s.scores, w[..4].iter().map(|v| v.abs()).collect::<Vec<_>>());
    assert!(rfe(&data, &opts, 0).is_err());
}

#[test]
fn rfe_keeps_one_of_duplicated_signals() {
    for seed in 0..5 {
        let (base, signal) = one_signal(seed + 100, 300, 6);
        let data: Vec<_> = base
            .iter()
            .map(|e| {
                let mut x = e.x.clone();
                x.insert(6, e.x[signal]);
                LabeledExample::new(x, e.y)
            })
            .collect();
        let s = rfe(&data, &ScoringOptions { seed, ..Default::default() }, 1).unwrap();
        let kept = s.select(1).unwrap()[0];
        assert!(kept == signal || kept == 6, "seed {seed}: kept {kept}");
    }
}

#[test]
fn svm_weights_finds_signal() {
    let (data, signal) = one_signal(5, 2000, 10);
    let s = svm_weights(&data, &ScoringOptions::default()).unwrap();
    assert_eq!(s.order()[0], signal);
}

#[test]
fn compare_on_planted_data() {
    let (data, planted) = planted(7, 30, 0.0);
    let rows = compare(&data, 5, &Method::ALL, &ScoringOptions::default(), 0.7).unwrap();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r.error.is_none(), "{r:?}");
        assert_eq!(r.selected.len(), 5);
        assert_eq!(r.selected, planted);
        assert!(r.accuracy.unwrap() >= 0.95, "{r:?}");
    }
    let mut out = Vec::new();
    write_comparison_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("method,elapsed_s,accuracy,selected_indices\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn compare_full_selection_is_method_independent() {
    let (data, _) = one_signal(8, 300, 6);
    let rows = compare(&data, 6, &Method::ALL, &ScoringOptions::default(), 0.7).unwrap();
    for r in &rows {
        assert_eq!(r.selected, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(r.accuracy, rows[0].accuracy);
    }
    assert!(compare(&data, 0, &Method::ALL, &ScoringOptions::default(), 0.7).is_err());
    assert!(compare(&data, 7, &Method::ALL, &ScoringOptions::default(), 0.7).is_err());
}

#[test]
fn compare_isolates_failures() {
    let data: Vec<_> = (0..20).map(|i| ex(&[i as f64, (i * i) as f64], false)).collect();
    let rows = compare(&data, 1, &[Method::Fisher, Method::Chi2], &ScoringOptions::default(), 0.7).unwrap();
    assert!(rows[0].error.is_some() && rows[0].accuracy.is_none());
    assert!(rows[1].error.is_none());
    let mut out = Vec::new();
    write_comparison_csv(&rows, &mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().contains("\nfisher,,,\n"));
}

#[test]
fn split_is_stratified() {
    let data: Vec<_> = (0..100).map(|i| ex(&[i as f64], i % 4 == 0)).collect();
    let (train, test) = stratified_split(&data, 0.7, 1).unwrap();
    assert_eq!(train.len() + test.len(), 100);
    assert_eq!(train.iter().filter(|&&i| data[i].y.is_attack()).count(), 18);
    assert_eq!(test.iter().filter(|&&i| data[i].y.is_attack()).count(), 7);
    assert_eq!(stratified_split(&data, 0.7, 1).unwrap(), (train, test));
}

fn small_instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<bool>)> {
    (3usize..30, 1usize..5).prop_flat_map(|(n, d)| {
        (prop::collection::vec(prop::collection::vec(-100.0f64..100.0, d), n), prop::collection::vec(any::<bool>(), n))
            .prop_filter("both classes", |(_, y)| y.iter().any(|&a| a) && y.iter().any(|&a| !a))
    })
}

fn build(xs: &[Vec<f64>], ys: &[bool]) -> Vec<LabeledExample<f64>> {
    xs.iter().zip(ys).map(|(x, &y)| ex(x, y)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mi_oracle_equivalence(
        (xs, ys) in (2usize..=100).prop_flat_map(|n| (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(any::<bool>(), n),
        )),
        bins in 2usize..=4,
    ) {
        let data: Vec<_> = xs.iter().zip(&ys).map(|(&x, &y)| ex(&[x], y)).collect();
        let got = mutual_info_score(&data, bins).unwrap().scores[0];
        prop_assert!((got - mi_oracle(&xs, &ys, bins)).abs() < 1e-12);
    }

    #[test]
    fn permutation_equivariance((xs, ys) in small_instance(), seed in any::<u64>()) {
        let d = xs[0].len();
        let mut perm: Vec<usize> = (0..d).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut ChaCha8Rng::seed_from_u64(seed));
        let permuted: Vec<Vec<f64>> = xs.iter().map(|x| perm.iter().map(|&j| x[j]).collect()).collect();
        let (a, b) = (build(&xs, &ys), build(&permuted, &ys));
        for f in [fisher_score, chi2_score] {
            let (sa, sb) = (f(&a).unwrap().scores, f(&b).unwrap().scores);
            for (k, &j) in perm.iter().enumerate() {
                prop_assert_eq!(sb[k], sa[j]);
            }
        }
        let (sa, sb) = (mutual_info_score(&a, 10).unwrap().scores, mutual_info_score(&b, 10).unwrap().scores);
        for (k, &j) in perm.iter().enumerate() {
            prop_assert_eq!(sb[k], sa[j]);
        }
    }

    #[test]
    fn affine_invariance((xs, ys) in small_instance(), scale in 0.01f64..100.0, shift in -50.0f64..50.0) {
        let mapped: Vec<Vec<f64>> = xs.iter().map(|x| x.iter().map(|v| scale * v + shift).collect()).collect();
        let (a, b) = (build(&xs, &ys), build(&mapped, &ys));
        let (fa, fb) = (fisher_score(&a).unwrap().scores, fisher_score(&b).unwrap().scores);
        for (p, q) in fa.iter().zip(&fb) {
            prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(1.0), "{} vs {}", p, q);
        }
        let (ma, mb) = (mutual_info_score(&a, 4).unwrap().scores, mutual_info_score(&b, 4).unwrap().scores);
        for (p, q) in ma.iter().zip(&mb) {
            prop_assert!((p - q).abs() < 1e-12, "{} vs {}", p, q);
        }
    }

    #[test]
    fn chi2_and_mi_non_negative((xs, ys) in small_instance(), bins in 2usize..12) {
        let data = build(&xs, &ys);
        prop_assert!(chi2_score(&data).unwrap().scores.iter().all(|&s| s >= 0.0 && s.is_finite()));
        prop_assert!(mutual_info_score(&data, bins).unwrap().scores.iter().all(|&s| s >= 0.0 && s.is_finite()));
    }
}
