use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{Hyperparams, ModelState, NormStats};

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

/// On-disk JSON form of a [`ModelState`]. All reals are written in their
/// shortest round-trip decimal form, so save/load is value-exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub d: usize,
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub alpha: f64,
    pub batch_size: usize,
    pub iteration: u64,
    pub norm_count: u64,
    pub norm_means: Vec<f64>,
    pub norm_vars: Vec<f64>,
    pub feature_names: Vec<String>,
}

impl Checkpoint {
    pub fn from_model<T: Scalar>(model: &ModelState<T>, feature_names: &[String]) -> Result<Self> {
        if feature_names.len() != model.feature_count() {
            return Err(Error::DimensionMismatch { expected: model.feature_count(), got: feature_names.len() });
        }
        let widen = |v: &[T]| v.iter().map(|x| x.widen()).collect::<Vec<_>>();
        Ok(Checkpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            d: model.dim(),
            weights: widen(&model.weights),
            lambda: model.hyperparams.lambda.widen(),
            alpha: model.hyperparams.alpha.widen(),
            batch_size: model.hyperparams.batch_size,
            iteration: model.iteration,
            norm_count: model.norm.count(),
            norm_means: widen(model.norm.means()),
            norm_vars: widen(model.norm.variances()),
            feature_names: feature_names.to_vec(),
        })
    }

    pub fn to_model<T: Scalar>(&self) -> Result<ModelState<T>> {
        self.validate()?;
        let narrow = |v: &[f64]| v.iter().map(|&x| T::of(x)).collect::<Vec<T>>();
        let hyperparams = Hyperparams::new(T::of(self.lambda), T::of(self.alpha), self.batch_size)?;
        Ok(ModelState {
            weights: narrow(&self.weights),
            hyperparams,
            iteration: self.iteration,
            norm: NormStats::from_parts(self.norm_count, narrow(&self.norm_means), narrow(&self.norm_vars))?,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(Error::Checkpoint(format!("unsupported schema version {}", self.schema_version)));
        }
        if self.d < 2 || self.weights.len() != self.d {
            return Err(Error::Checkpoint(format!("d = {} but {} weights", self.d, self.weights.len())));
        }
        let n = self.d - 1;
        if self.norm_means.len() != n || self.norm_vars.len() != n || self.feature_names.len() != n {
            return Err(Error::Checkpoint(format!(
                "expected {n} feature entries in norm_means, norm_vars and feature_names"
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Checkpoint("non-finite weight".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cp: Checkpoint = serde_json::from_str(text)?;
        cp.validate()?;
        Ok(cp)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
