//! Offline feature scorers used as comparators, and a harness that times
//! each one and measures downstream accuracy on its selected features.
//!
//! Every scorer takes examples whose last coordinate is the constant bias
//! input and returns one score per real feature; higher is more relevant.

mod compare;
mod scorers;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Hyperparams, LabeledExample};

pub use compare::{compare, stratified_split, write_comparison_csv, ComparisonRow};
pub use scorers::{chi2_score, fisher_score, mutual_info_score, rfe, svm_weights};

/// Scoring method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Fisher,
    Chi2,
    MutualInfo,
    Rfe,
    SvmWeights,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Fisher, Method::Chi2, Method::MutualInfo, Method::Rfe, Method::SvmWeights];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fisher => "fisher",
            Method::Chi2 => "chi2",
            Method::MutualInfo => "mutual_info",
            Method::Rfe => "rfe",
            Method::SvmWeights => "svm_weights",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Knobs shared by the scorers that train a model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoringOptions {
    pub hyperparams: Hyperparams<f64>,
    /// Histogram bins for mutual information.
    pub bins: usize,
    /// Epochs per model fit inside RFE.
    pub epochs: usize,
    /// Epochs for the downstream accuracy fit in [`compare`].
    pub eval_epochs: usize,
    /// Mini-batch steps budget for `svm_weights`.
    pub svm_steps: usize,
    pub seed: u64,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        ScoringOptions {
            hyperparams: Hyperparams::default(),
            bins: 10,
            epochs: 5,
            eval_epochs: 50,
            svm_steps: 500,
            seed: 0,
        }
    }
}

/// Per-feature scores from one method.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredFeatures {
    pub method: Method,
    pub scores: Vec<f64>,
    /// Wall-clock seconds spent scoring.
    pub elapsed: f64,
}

impl ScoredFeatures {
    /// Feature indices by descending score, ties to the lower index.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        idx
    }

    /// The `k` best feature indices in ascending index order.
    pub fn select(&self, k: usize) -> Result<Vec<usize>> {
        if k == 0 || k > self.scores.len() {
            return Err(Error::InvalidArgument(format!("k = {k} outside 1..={}", self.scores.len())));
        }
        let mut top = self.order();
        top.truncate(k);
        top.sort_unstable();
        Ok(top)
    }
}

/// Runs one method with `opts`.
pub fn score(method: Method, data: &[LabeledExample<f64>], k: usize, opts: &ScoringOptions) -> Result<ScoredFeatures> {
    match method {
        Method::Fisher => fisher_score(data),
        Method::Chi2 => chi2_score(data),
        Method::MutualInfo => mutual_info_score(data, opts.bins),
        Method::Rfe => rfe(data, opts, k),
        Method::SvmWeights => svm_weights(data, opts),
    }
}

/// Number of real features (bias column excluded) after checking shape.
pub(crate) fn feature_dim(data: &[LabeledExample<f64>]) -> Result<usize> {
    let first = data.first().ok_or(Error::EmptyData)?;
    let d = first.x.len();
    if d < 2 {
        return Err(Error::InvalidArgument("examples need at least one feature besides the bias".into()));
    }
    for e in data {
        if e.x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: e.x.len() });
        }
        if e.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature value"));
        }
    }
    Ok(d - 1)
}

#[cfg(test)]
mod tests;
