//! Linear SVM core: labels, feature vectors, model state and the
//! regularized hinge-loss mathematics used for training and ranking.
//!
//! Labels are mapped to signs so that features indicative of attacks end
//! up with negative weights: normal traffic is `+1`, attacks are `-1`.
//! The bias is absorbed by a trailing constant-one feature, so a model over
//! `n` extracted features carries `d = n + 1` weights.

mod checkpoint;
mod norm;
mod rank;
mod svm;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use checkpoint::{Checkpoint, CHECKPOINT_SCHEMA_VERSION};
pub use norm::NormStats;
pub use rank::{rank_features, rank_weights, select_top_k, FeatureRanking, RankedFeature};
pub use svm::{decision_value, empirical_risk, hinge_loss, predict, sgd_step, subgradient};
pub use train::{train_epochs, train_steps};

pub(crate) use svm::sgd_step_on;

/// Ground-truth or predicted class of a packet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Normal,
    Attack,
}

impl Label {
    /// Parses the external encoding (`0` normal, `1` attack).
    pub fn from_external(v: i64) -> Result<Self> {
        match v {
            0 => Ok(Label::Normal),
            1 => Ok(Label::Attack),
            other => Err(Error::InvalidArgument(format!("label must be 0 or 1, got {other}"))),
        }
    }

    pub fn external(self) -> u8 {
        match self {
            Label::Normal => 0,
            Label::Attack => 1,
        }
    }

    /// Sign used by the hinge loss: normal `+1`, attack `-1`.
    pub fn signed<T: Scalar>(self) -> T {
        match self {
            Label::Normal => T::one(),
            Label::Attack => -T::one(),
        }
    }

    pub fn is_attack(self) -> bool {
        self == Label::Attack
    }
}

/// Model-space feature vector: normalized features followed by the constant
/// dummy component `1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector<T>(Vec<T>);

impl<T: Scalar> FeatureVector<T> {
    /// Wraps a vector that already carries the trailing dummy component.
    pub fn new(values: Vec<T>) -> Result<Self> {
        match values.last() {
            None => Err(Error::EmptyData),
            Some(&last) if last != T::one() => {
                Err(Error::InvalidArgument("last component of a feature vector must be exactly 1".into()))
            }
            _ if values.iter().any(|v| !v.is_finite()) => Err(Error::NonFinite("feature vector")),
            _ => Ok(FeatureVector(values)),
        }
    }

    /// Appends the dummy component to `features`.
    pub fn with_dummy(mut features: Vec<T>) -> Result<Self> {
        features.push(T::one());
        Self::new(features)
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> std::ops::Deref for FeatureVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// A feature vector paired with its ground-truth label.
///
/// `x` is any real vector here so the loss functions can be exercised on toy
/// data; the pipeline builds it from a [`FeatureVector`].
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledExample<T> {
    pub x: Vec<T>,
    pub y: Label,
}

impl<T: Scalar> LabeledExample<T> {
    pub fn new(x: Vec<T>, y: Label) -> Self {
        LabeledExample { x, y }
    }

    pub fn from_features(x: FeatureVector<T>, y: Label) -> Self {
        LabeledExample { x: x.into_inner(), y }
    }

    /// Signed margin `y * w^T x`.
    pub fn margin(&self, w: &[T]) -> T {
        self.y.signed::<T>() * crate::scalar::dot(w, &self.x)
    }
}

/// Regularization strength, constant learning rate and mini-batch size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparams<T> {
    pub lambda: T,
    pub alpha: T,
    pub batch_size: usize,
}

impl<T: Scalar> Hyperparams<T> {
    pub fn new(lambda: T, alpha: T, batch_size: usize) -> Result<Self> {
        let hp = Hyperparams { lambda, alpha, batch_size };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        // lambda = 0 is accepted: unregularized runs are useful for checking the hinge term alone.
        if !(self.lambda.is_finite() && self.lambda >= T::zero()) {
            return Err(Error::InvalidHyperparams(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.alpha.is_finite() && self.alpha > T::zero()) {
            return Err(Error::InvalidHyperparams(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidHyperparams("batch size must be >= 1".into()));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for Hyperparams<T> {
    fn default() -> Self {
        Hyperparams { lambda: T::of(1e-4), alpha: T::of(0.01), batch_size: 32 }
    }
}

/// Weight vector, hyperparameters, update counter and normalization statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState<T> {
    pub weights: Vec<T>,
    pub hyperparams: Hyperparams<T>,
    pub iteration: u64,
    pub norm: NormStats<T>,
}

impl<T: Scalar> ModelState<T> {
    /// Zero-initialized model over `feature_count` extracted features.
    pub fn new(feature_count: usize, hyperparams: Hyperparams<T>) -> Result<Self> {
        hyperparams.validate()?;
        if feature_count == 0 {
            return Err(Error::InvalidArgument("feature count must be >= 1".into()));
        }
        Ok(ModelState {
            weights: vec![T::zero(); feature_count + 1],
            hyperparams,
            iteration: 0,
            norm: NormStats::new(feature_count),
        })
    }

    /// Model dimension `d`, dummy included.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn feature_count(&self) -> usize {
        self.weights.len() - 1
    }

    /// Normalizes raw features and appends the dummy component.
    pub fn featurize(&self, raw: &[f64]) -> Result<FeatureVector<T>> {
        self.norm.transform(raw)
    }

    pub fn example(&self, raw: &[f64], y: Label) -> Result<LabeledExample<T>> {
        Ok(LabeledExample::from_features(self.featurize(raw)?, y))
    }

    /// Classifies a raw (unnormalized) feature row.
    pub fn classify(&self, raw: &[f64]) -> Result<Label> {
        predict(&self.weights, &self.featurize(raw)?)
    }

    pub fn bias(&self) -> T {
        self.weights[self.weights.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_sign_mapping() {
        assert_eq!(Label::Normal.signed::<f64>(), 1.0);
        assert_eq!(Label::Attack.signed::<f32>(), -1.0);
        assert_eq!(Label::from_external(1).unwrap(), Label::Attack);
        assert_eq!(Label::from_external(0).unwrap().external(), 0);
        assert!(Label::from_external(2).is_err());
    }

    #[test]
    fn feature_vector_requires_dummy() {
        assert!(FeatureVector::new(vec![0.5f64, 1.0]).is_ok());
        assert!(FeatureVector::new(vec![0.5f64, 0.0]).is_err());
        assert!(FeatureVector::new(vec![f64::NAN, 1.0]).is_err());
        assert!(FeatureVector::<f64>::new(vec![]).is_err());
        assert_eq!(&*FeatureVector::with_dummy(vec![2.0f64]).unwrap(), &[2.0, 1.0]);
    }

    #[test]
    fn hyperparam_validation() {
        assert!(Hyperparams::new(0.1f64, 0.01, 1).is_ok());
        assert!(Hyperparams::new(0.0f64, 0.01, 1).is_ok());
        assert!(Hyperparams::new(-0.1f64, 0.01, 1).is_err());
        assert!(Hyperparams::new(0.1f64, 0.0, 1).is_err());
        assert!(Hyperparams::new(0.1f64, 0.01, 0).is_err());
        let d = Hyperparams::<f64>::default();
        assert_eq!((d.lambda, d.alpha, d.batch_size), (1e-4, 0.01, 32));
    }

    #[test]
    fn fresh_model_is_zero() {
        let m = ModelState::<f64>::new(43, Hyperparams::default()).unwrap();
        assert_eq!(m.dim(), 44);
        assert!(m.weights.iter().all(|&w| w == 0.0));
        assert_eq!(m.classify(&[7.0; 43]).unwrap(), Label::Normal);
        assert!(ModelState::<f64>::new(0, Hyperparams::default()).is_err());
    }
}
