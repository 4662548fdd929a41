use std::time::Instant;

use log::debug;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{feature_dim, Method, ScoredFeatures, ScoringOptions};
use crate::error::{Error, Result};
use crate::model::{train_epochs, LabeledExample, ModelState};

fn timed(method: Method, f: impl FnOnce() -> Result<Vec<f64>>) -> Result<ScoredFeatures> {
    let start = Instant::now();
    let scores = f()?;
    Ok(ScoredFeatures { method, scores, elapsed: start.elapsed().as_secs_f64() })
}

/// Two-class Fisher criterion with population variances; a feature with no
/// within-class scatter scores 0.
pub fn fisher_score(data: &[LabeledExample<f64>]) -> Result<ScoredFeatures> {
    timed(Method::Fisher, || {
        let d = feature_dim(data)?;
        let n1 = data.iter().filter(|e| e.y.is_attack()).count();
        let n0 = data.len() - n1;
        if n0 == 0 || n1 == 0 {
            return Err(Error::SingleClass);
        }
        let (n0f, n1f, nf) = (n0 as f64, n1 as f64, data.len() as f64);
        let mut sum = [vec![0.0; d], vec![0.0; d]];
        for e in data {
            let c = usize::from(e.y.is_attack());
            for (s, x) in sum[c].iter_mut().zip(&e.x) {
                *s += x;
            }
        }
        let mean0: Vec<f64> = sum[0].iter().map(|s| s / n0f).collect();
        let mean1: Vec<f64> = sum[1].iter().map(|s| s / n1f).collect();
        let mut ss = [vec![0.0; d], vec![0.0; d]];
        for e in data {
            let c = usize::from(e.y.is_attack());
            let m = if c == 0 { &mean0 } else { &mean1 };
            for j in 0..d {
                let dx = e.x[j] - m[j];
                ss[c][j] += dx * dx;
            }
        }
        Ok((0..d)
            .map(|j| {
                let mu = (sum[0][j] + sum[1][j]) / nf;
                let between = n0f * (mean0[j] - mu).powi(2) + n1f * (mean1[j] - mu).powi(2);
                // n_c * population variance is the class sum of squares.
                let within = ss[0][j] + ss[1][j];
                if within > 0.0 {
                    between / within
                } else {
                    0.0
                }
            })
            .collect())
    })
}

/// Chi-squared statistic of each feature's (min-shifted) mass split across
/// the two classes against the split expected from class sizes.
pub fn chi2_score(data: &[LabeledExample<f64>]) -> Result<ScoredFeatures> {
    timed(Method::Chi2, || {
        let d = feature_dim(data)?;
        debug!("chi2: shifting each feature by its minimum");
        let mut min = vec![f64::INFINITY; d];
        for e in data {
            for (m, &x) in min.iter_mut().zip(&e.x) {
                *m = m.min(x);
            }
        }
        let mut mass = [vec![0.0; d], vec![0.0; d]];
        let mut count = [0usize; 2];
        for e in data {
            let c = usize::from(e.y.is_attack());
            count[c] += 1;
            for j in 0..d {
                mass[c][j] += e.x[j] - min[j];
            }
        }
        let n = data.len() as f64;
        Ok((0..d)
            .map(|j| {
                let total = mass[0][j] + mass[1][j];
                if total <= 0.0 {
                    return 0.0;
                }
                (0..2)
                    .filter(|&c| count[c] > 0)
                    .map(|c| {
                        let expected = total * count[c] as f64 / n;
                        (mass[c][j] - expected).powi(2) / expected
                    })
                    .sum()
            })
            .collect())
    })
}

/// Plug-in mutual information (nats) between each feature, binned into
/// `bins` equal-width bins over its observed range, and the label.
pub fn mutual_info_score(data: &[LabeledExample<f64>], bins: usize) -> Result<ScoredFeatures> {
    timed(Method::MutualInfo, || {
        if bins < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 bins, got {bins}")));
        }
        let d = feature_dim(data)?;
        let n = data.len() as f64;
        let labels: Vec<usize> = data.iter().map(|e| usize::from(e.y.is_attack())).collect();
        let class =
            [labels.iter().filter(|&&c| c == 0).count() as f64, labels.iter().filter(|&&c| c == 1).count() as f64];
        let mut joint = vec![[0u64; 2]; bins];
        Ok((0..d)
            .map(|j| {
                let (lo, hi) =
                    data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), e| (a.min(e.x[j]), b.max(e.x[j])));
                if hi <= lo {
                    return 0.0;
                }
                joint.iter_mut().for_each(|c| *c = [0, 0]);
                for (e, &c) in data.iter().zip(&labels) {
                    joint[bin_of(e.x[j], lo, hi, bins)][c] += 1;
                }
                let mut mi = 0.0;
                for cell in &joint {
                    let px = (cell[0] + cell[1]) as f64;
                    for c in 0..2 {
                        if cell[c] > 0 {
                            let nxy = cell[c] as f64;
                            mi += nxy / n * (nxy * n / (px * class[c])).ln();
                        }
                    }
                }
                mi.max(0.0)
            })
            .collect())
    })
}

pub(crate) fn bin_of(x: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let t = (x - lo) / (hi - lo) * bins as f64;
    (t as usize).min(bins - 1)
}

/// Recursive feature elimination over the linear SVM: fit on the surviving
/// features, drop the one with the smallest |w|, repeat until `target_k`
/// remain. A feature's score is the round it was dropped in; survivors
/// share the top score. With nothing to eliminate the scores are the |w|
/// of a single fit.
pub fn rfe(data: &[LabeledExample<f64>], opts: &ScoringOptions, target_k: usize) -> Result<ScoredFeatures> {
    timed(Method::Rfe, || {
        let d = feature_dim(data)?;
        if target_k == 0 {
            return Err(Error::InvalidArgument("rfe target_k must be >= 1".into()));
        }
        let z = standardize(data, d);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut alive: Vec<usize> = (0..d).collect();
        if target_k >= d {
            let w = fit(&z, &alive, opts, &mut rng)?;
            return Ok(w.iter().take(d).map(|v| v.abs()).collect());
        }
        let rounds = d - target_k;
        let mut scores = vec![rounds as f64; d];
        for round in 0..rounds {
            let w = fit(&z, &alive, opts, &mut rng)?;
            let weakest = (0..alive.len())
                .min_by(|&a, &b| w[a].abs().total_cmp(&w[b].abs()).then(alive[a].cmp(&alive[b])))
                .expect("alive is non-empty");
            scores[alive.remove(weakest)] = round as f64;
        }
        Ok(scores)
    })
}

/// |w| of a linear SVM fitted with a fixed budget of `opts.svm_steps`
/// mini-batches drawn from a subsample of at most `svm_steps * batch_size`
/// examples, standardized on that subsample.
pub fn svm_weights(data: &[LabeledExample<f64>], opts: &ScoringOptions) -> Result<ScoredFeatures> {
    timed(Method::SvmWeights, || {
        let d = feature_dim(data)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let budget = opts.svm_steps.max(1) * opts.hyperparams.batch_size;
        let sub: Vec<LabeledExample<f64>> = if budget < data.len() {
            sample(&mut rng, data.len(), budget).into_iter().map(|i| data[i].clone()).collect()
        } else {
            data.to_vec()
        };
        let z = standardize(&sub, d);
        let mut model = ModelState::new(d, opts.hyperparams)?;
        let epochs = (opts.svm_steps * opts.hyperparams.batch_size).div_ceil(z.len()).max(1);
        train_epochs(&mut model, &z, epochs, &mut rng)?;
        Ok(model.weights.iter().take(d).map(|v| v.abs()).collect())
    })
}

/// Z-scores every feature column over `data` (zero-variance columns are only
/// centered) and keeps the bias column.
pub(crate) fn standardize(data: &[LabeledExample<f64>], d: usize) -> Vec<LabeledExample<f64>> {
    let (mean, scale) = column_stats(data, d);
    data.iter().map(|e| apply_stats(e, &mean, &scale)).collect()
}

pub(crate) fn column_stats(data: &[LabeledExample<f64>], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = data.len() as f64;
    let mut mean = vec![0.0; d];
    for e in data {
        for (m, x) in mean.iter_mut().zip(&e.x) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for e in data {
        for j in 0..d {
            var[j] += (e.x[j] - mean[j]).powi(2);
        }
    }
    let scale = var.iter().map(|v| if *v > 0.0 { (v / n).sqrt() } else { 1.0 }).collect();
    (mean, scale)
}

pub(crate) fn apply_stats(e: &LabeledExample<f64>, mean: &[f64], scale: &[f64]) -> LabeledExample<f64> {
    let mut x: Vec<f64> = mean.iter().zip(scale).zip(&e.x).map(|((m, s), v)| (v - m) / s).collect();
    x.push(1.0);
    LabeledExample { x, y: e.y }
}

/// Fits a fresh model on the `cols` subset of standardized examples.
pub(crate) fn fit(
    z: &[LabeledExample<f64>],
    cols: &[usize],
    opts: &ScoringOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let sub: Vec<LabeledExample<f64>> = z.iter().map(|e| project(e, cols)).collect();
    let mut model = ModelState::new(cols.len(), opts.hyperparams)?;
    train_epochs(&mut model, &sub, opts.epochs, rng)?;
    Ok(model.weights)
}

/// Keeps the `cols` features and the trailing bias input.
pub(crate) fn project(e: &LabeledExample<f64>, cols: &[usize]) -> LabeledExample<f64> {
    let mut x: Vec<f64> = cols.iter().map(|&j| e.x[j]).collect();
    x.push(*e.x.last().expect("non-empty example"));
    LabeledExample { x, y: e.y }
}
