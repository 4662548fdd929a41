use std::io::Write;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::scorers::{apply_stats, column_stats, fit, project};
use super::{feature_dim, score, Method, ScoringOptions};
use crate::error::{Error, Result};
use crate::model::{predict, LabeledExample};

/// One method's line in the comparison table. A method that failed keeps
/// its row with `error` set and the measurements empty.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub method: Method,
    pub elapsed: Option<f64>,
    pub accuracy: Option<f64>,
    pub selected: Vec<usize>,
    pub error: Option<String>,
}

/// Per-class shuffled split: `round(train_frac * n_c)` of each class goes to
/// the training side. Returns (train, test) index lists.
pub fn stratified_split(data: &[LabeledExample<f64>], train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidArgument(format!("train fraction {train_frac} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for attack in [false, true] {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data[i].y.is_attack() == attack).collect();
        idx.shuffle(&mut rng);
        let cut = (idx.len() as f64 * train_frac).round() as usize;
        train.extend_from_slice(&idx[..cut]);
        test.extend_from_slice(&idx[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Scores features on the training split with each method, keeps the top
/// `k`, and reports the selection time and the test accuracy of a linear
/// SVM refitted on those features.
pub fn compare(
    data: &[LabeledExample<f64>],
    k: usize,
    methods: &[Method],
    opts: &ScoringOptions,
    train_frac: f64,
) -> Result<Vec<ComparisonRow>> {
    let d = feature_dim(data)?;
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={d}")));
    }
    let (train_idx, test_idx) = stratified_split(data, train_frac, opts.seed)?;
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(Error::InsufficientData { needed: 2, got: data.len() });
    }
    let train: Vec<_> = train_idx.iter().map(|&i| data[i].clone()).collect();
    let test: Vec<_> = test_idx.iter().map(|&i| data[i].clone()).collect();

    Ok(methods
        .iter()
        .map(|&method| match evaluate(method, &train, &test, k, d, opts) {
            Ok((elapsed, accuracy, selected)) => {
                ComparisonRow { method, elapsed: Some(elapsed), accuracy: Some(accuracy), selected, error: None }
            }
            Err(e) => {
                warn!("{method} failed: {e}");
                ComparisonRow {
                    method,
                    elapsed: None,
                    accuracy: None,
                    selected: Vec::new(),
                    error: Some(e.to_string()),
                }
            }
        })
        .collect())
}

fn evaluate(
    method: Method,
    train: &[LabeledExample<f64>],
    test: &[LabeledExample<f64>],
    k: usize,
    d: usize,
    opts: &ScoringOptions,
) -> Result<(f64, f64, Vec<usize>)> {
    // Every method sees the same standardized training matrix, so scorers
    // that are not scale-invariant (chi2) are not dominated by wide columns.
    let (mean, scale) = column_stats(train, d);
    let z: Vec<_> = train.iter().map(|e| apply_stats(e, &mean, &scale)).collect();
    let scored = score(method, &z, k, opts)?;
    let selected = scored.select(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let eval = ScoringOptions { epochs: opts.eval_epochs, ..*opts };
    let w = fit(&z, &selected, &eval, &mut rng)?;
    let mut correct = 0usize;
    for e in test {
        let x = project(&apply_stats(e, &mean, &scale), &selected);
        if predict(&w, &x.x)? == e.y {
            correct += 1;
        }
    }
    Ok((scored.elapsed, correct as f64 / test.len() as f64, selected))
}

/// Writes `method,elapsed_s,accuracy,selected_indices`, indices joined by
/// `;`. Failed rows leave the last three fields empty.
pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "elapsed_s", "accuracy", "selected_indices"])?;
    for r in rows {
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let sel = r.selected.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        w.write_record([r.method.name().to_string(), fmt(r.elapsed), fmt(r.accuracy), sel])?;
    }
    w.flush()?;
    Ok(())
}
