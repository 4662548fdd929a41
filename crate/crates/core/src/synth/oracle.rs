use crate::error::{Error, Result};
use crate::model::LabeledExample;

pub const GRID_POINT_LIMIT: u128 = 100_000_000;

/// Exhaustive minimization of the regularized empirical hinge risk over the
/// grid `{lo, lo + step, ..., hi}^d` for `d <= 3`. Returns the first
/// minimizer found and its risk.
pub fn grid_oracle(data: &[LabeledExample<f64>], lo: f64, hi: f64, step: f64, lambda: f64) -> Result<(Vec<f64>, f64)> {
    let Some(first) = data.first() else {
        return Err(Error::EmptyData);
    };
    let d = first.x.len();
    if d == 0 || d > 3 {
        return Err(Error::InvalidArgument(format!("grid oracle supports 1..=3 dimensions, got {d}")));
    }
    if let Some(bad) = data.iter().find(|e| e.x.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.x.len() });
    }
    if !(step > 0.0 && hi >= lo) {
        return Err(Error::InvalidArgument("grid needs step > 0 and hi >= lo".into()));
    }
    let per_axis = ((hi - lo) / step).round() as u128 + 1;
    let points = per_axis.pow(d as u32);
    if points > GRID_POINT_LIMIT {
        return Err(Error::GridTooLarge { points, limit: GRID_POINT_LIMIT });
    }
    let per_axis = per_axis as usize;
    let signed: Vec<(f64, &[f64])> =
        data.iter().map(|e| (if e.y.is_attack() { -1.0 } else { 1.0 }, e.x.as_slice())).collect();
    let n = data.len() as f64;

    let mut best = (vec![0.0; d], f64::INFINITY);
    let mut w = vec![0.0; d];
    let mut counter = vec![0usize; d];
    for _ in 0..points {
        for k in 0..d {
            w[k] = lo + counter[k] as f64 * step;
        }
        let mut hinge = 0.0;
        for &(y, x) in &signed {
            let mut s = 0.0;
            for k in 0..d {
                s += w[k] * x[k];
            }
            let v = 1.0 - y * s;
            if v > 0.0 {
                hinge += v;
            }
        }
        let norm: f64 = w.iter().map(|v| v * v).sum();
        let risk = hinge / n + 0.5 * lambda * norm;
        if risk < best.1 {
            best = (w.clone(), risk);
        }
        for c in counter.iter_mut() {
            *c += 1;
            if *c < per_axis {
                break;
            }
            *c = 0;
        }
    }
    Ok(best)
}
