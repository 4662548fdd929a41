use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::ModelState;

/// One feature's position in a ranking. `index` is the 0-based column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub index: usize,
    pub name: String,
    pub weight: f64,
    pub rank: usize,
}

/// Features ordered by |weight| descending (ties by ascending index), the
/// bias weight reported separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub entries: Vec<RankedFeature>,
    pub bias: f64,
}

impl FeatureRanking {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn top(&self, k: usize) -> &[RankedFeature] {
        &self.entries[..k.min(self.entries.len())]
    }

    /// Entry for column `index`, if present.
    pub fn get(&self, index: usize) -> Option<&RankedFeature> {
        self.entries.iter().find(|e| e.index == index)
    }
}

pub fn rank_features<T: Scalar>(model: &ModelState<T>, names: &[String]) -> Result<FeatureRanking> {
    rank_weights(&model.weights, names)
}

/// Ranks a full weight vector whose last component is the bias.
pub fn rank_weights<T: Scalar>(weights: &[T], names: &[String]) -> Result<FeatureRanking> {
    let Some((&bias, features)) = weights.split_last() else {
        return Err(Error::EmptyData);
    };
    if names.len() != features.len() {
        return Err(Error::DimensionMismatch { expected: features.len(), got: names.len() });
    }
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| {
        let (wa, wb) = (features[a].abs(), features[b].abs());
        wb.partial_cmp(&wa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let entries = order
        .into_iter()
        .enumerate()
        .map(|(pos, index)| RankedFeature {
            index,
            name: names[index].clone(),
            weight: features[index].widen(),
            rank: pos + 1,
        })
        .collect();
    Ok(FeatureRanking { entries, bias: bias.widen() })
}

/// Column indices of the first `k` ranking entries.
pub fn select_top_k(ranking: &FeatureRanking, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > ranking.len() {
        return Err(Error::InvalidArgument(format!("k must be in 1..={}, got {k}", ranking.len())));
    }
    Ok(ranking.entries[..k].iter().map(|e| e.index).collect())
}
