//! The windowed test-then-train loop.
//!
//! The first `pretrain_windows * window_size` records pretrain the model and
//! fit the normalization statistics. Every following window is classified
//! with the model as it stands when the window arrives; the window's mean
//! squared error between true and predicted labels decides whether the model
//! is retrained on that window's labels (warm start, normalization
//! statistics updated first). Windows that do not trigger retraining leave
//! the model untouched.

mod pipeline;
mod report;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::ExtractedRecord;
use crate::model::{rank_features, train_epochs, FeatureRanking, Hyperparams, Label, LabeledExample, ModelState};
use crate::scalar::Scalar;

pub use pipeline::{bounded, BoundedRecords};
pub use report::{ReportLine, ReportWriter, TopFeature};

/// Engine settings. Defaults: 500-record windows, threshold 0.05, 100
/// pretraining windows, 5 epochs for pretraining and for each retrain.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig<T> {
    pub window_size: usize,
    pub mse_threshold: f64,
    pub pretrain_windows: usize,
    pub pretrain_epochs: usize,
    pub epochs_per_retrain: usize,
    pub hyperparams: Hyperparams<T>,
    pub seed: u64,
    /// Never retrain after pretraining (the offline baseline).
    pub frozen: bool,
    /// Measure per-window wall time; off by default so reports are reproducible.
    pub record_timing: bool,
}

impl<T: Scalar> Default for EngineConfig<T> {
    fn default() -> Self {
        EngineConfig {
            window_size: 500,
            mse_threshold: 0.05,
            pretrain_windows: 100,
            pretrain_epochs: 5,
            epochs_per_retrain: 5,
            hyperparams: Hyperparams::default(),
            seed: 0,
            frozen: false,
            record_timing: false,
        }
    }
}

impl<T: Scalar> EngineConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.hyperparams.validate()?;
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.window_size == 0 || self.window_size < self.hyperparams.batch_size {
            return bad(format!(
                "window size {} must be >= batch size {}",
                self.window_size, self.hyperparams.batch_size
            ));
        }
        if !(0.0..=1.0).contains(&self.mse_threshold) {
            return bad(format!("mse threshold {} outside [0, 1]", self.mse_threshold));
        }
        if self.pretrain_windows == 0 || self.pretrain_epochs == 0 || self.epochs_per_retrain == 0 {
            return bad("pretrain windows and epoch counts must be >= 1".into());
        }
        Ok(())
    }

    pub fn pretrain_len(&self) -> usize {
        self.pretrain_windows * self.window_size
    }
}

/// Outcome of one window.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowReport {
    pub window_index: usize,
    /// Records in the window; less than the window size only for the final window.
    pub len: usize,
    pub partial: bool,
    /// Records that carried a ground-truth label.
    pub labeled: usize,
    /// `None` when no record in the window was labeled.
    pub mse: Option<f64>,
    pub retrained: bool,
    pub n_attacks: usize,
    pub wall_time: f64,
    pub ranking: FeatureRanking,
}

/// Mean squared difference of 0/1 labels, i.e. the error rate.
pub fn window_mse(truth: &[Label], predicted: &[Label]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: predicted.len() });
    }
    if truth.is_empty() {
        return Err(Error::EmptyData);
    }
    let sq: u64 = truth
        .iter()
        .zip(predicted)
        .map(|(&t, &p)| {
            let d = i64::from(t.external()) - i64::from(p.external());
            (d * d) as u64
        })
        .sum();
    Ok(sq as f64 / truth.len() as f64)
}

/// Owns one model and drives it over one stream.
#[derive(Clone, Debug)]
pub struct StreamEngine<T> {
    config: EngineConfig<T>,
    names: Vec<String>,
    model: ModelState<T>,
    rng: ChaCha8Rng,
    next_window: usize,
}

impl<T: Scalar> StreamEngine<T> {
    pub fn new(config: EngineConfig<T>, feature_names: Vec<String>) -> Result<Self> {
        config.validate()?;
        let model = ModelState::new(feature_names.len(), config.hyperparams)?;
        Ok(Self::with_model(config, feature_names, model))
    }

    /// Resumes from an existing model (e.g. a loaded checkpoint).
    pub fn with_model(config: EngineConfig<T>, feature_names: Vec<String>, model: ModelState<T>) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        StreamEngine { config, names: feature_names, model, rng, next_window: 0 }
    }

    pub fn config(&self) -> &EngineConfig<T> {
        &self.config
    }

    pub fn model(&self) -> &ModelState<T> {
        &self.model
    }

    pub fn into_model(self) -> ModelState<T> {
        self.model
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn ranking(&self) -> Result<FeatureRanking> {
        rank_features(&self.model, &self.names)
    }

    /// Fits normalization statistics on `initial` and trains on it for the
    /// configured number of pretraining epochs. Every record must be labeled.
    pub fn pretrain(&mut self, initial: &[ExtractedRecord]) -> Result<()> {
        if initial.is_empty() {
            return Err(Error::EmptyData);
        }
        if let Some(index) = initial.iter().position(|r| r.label.is_none()) {
            return Err(Error::Unlabeled { index });
        }
        self.model.norm.update_all(initial.iter().map(|r| r.features.as_slice()))?;
        let examples = self.examples(initial)?;
        train_epochs(&mut self.model, &examples, self.config.pretrain_epochs, &mut self.rng)?;
        Ok(())
    }

    /// Predictions of the current model for each record.
    pub fn predict(&self, records: &[ExtractedRecord]) -> Result<Vec<Label>> {
        records.iter().map(|r| self.model.classify(&r.features)).collect()
    }

    /// Scores `window` with the current model, then retrains on its labeled
    /// records if the error exceeds the threshold.
    pub fn process_window(&mut self, window: &[ExtractedRecord]) -> Result<WindowReport> {
        if window.is_empty() {
            return Err(Error::EmptyData);
        }
        let started = self.config.record_timing.then(Instant::now);
        let predicted = self.predict(window)?;
        let labeled: Vec<&ExtractedRecord> = window.iter().filter(|r| r.label.is_some()).collect();
        let (truth, pred): (Vec<Label>, Vec<Label>) =
            window.iter().zip(&predicted).filter_map(|(r, &p)| r.label.map(|t| (t, p))).unzip();
        let mse = if truth.is_empty() { None } else { Some(window_mse(&truth, &pred)?) };

        let retrain = !self.config.frozen && mse.is_some_and(|m| m > self.config.mse_threshold);
        if retrain {
            self.model.norm.update_all(labeled.iter().map(|r| r.features.as_slice()))?;
            let examples = self.examples(labeled.iter().copied())?;
            train_epochs(&mut self.model, &examples, self.config.epochs_per_retrain, &mut self.rng)?;
        }

        let report = WindowReport {
            window_index: self.next_window,
            len: window.len(),
            partial: window.len() < self.config.window_size,
            labeled: truth.len(),
            mse,
            retrained: retrain,
            n_attacks: truth.iter().filter(|l| l.is_attack()).count(),
            wall_time: started.map_or(0.0, |t| t.elapsed().as_secs_f64()),
            ranking: self.ranking()?,
        };
        self.next_window += 1;
        Ok(report)
    }

    fn examples<'a, I>(&self, records: I) -> Result<Vec<LabeledExample<T>>>
    where
        I: IntoIterator<Item = &'a ExtractedRecord>,
    {
        records
            .into_iter()
            .enumerate()
            .map(|(index, r)| {
                let y = r.label.ok_or(Error::Unlabeled { index })?;
                self.model.example(&r.features, y)
            })
            .collect()
    }

    /// Consumes a record stream: pretraining prefix first, then one report
    /// per window handed to `sink` together with the updated model.
    pub fn run<I, F>(&mut self, records: I, mut sink: F) -> Result<()>
    where
        I: IntoIterator<Item = Result<ExtractedRecord>>,
        F: FnMut(&WindowReport, &ModelState<T>) -> Result<()>,
    {
        let mut records = records.into_iter();
        let needed = self.config.pretrain_len();
        let prefix = records.by_ref().take(needed).collect::<Result<Vec<_>>>()?;
        if prefix.len() < needed {
            return Err(Error::InsufficientData { needed, got: prefix.len() });
        }
        self.pretrain(&prefix)?;
        drop(prefix);

        let n = self.config.window_size;
        let mut window = Vec::with_capacity(n);
        loop {
            window.clear();
            for r in records.by_ref().take(n) {
                window.push(r?);
            }
            if window.is_empty() {
                break;
            }
            let report = self.process_window(&window)?;
            sink(&report, &self.model)?;
            if window.len() < n {
                break;
            }
        }
        Ok(())
    }
}

/// Runs a fresh engine over `records`, returning every window report and the
/// final model.
pub fn run_stream<T, I>(
    config: EngineConfig<T>,
    feature_names: Vec<String>,
    records: I,
) -> Result<(Vec<WindowReport>, ModelState<T>)>
where
    T: Scalar,
    I: IntoIterator<Item = Result<ExtractedRecord>>,
{
    let mut engine = StreamEngine::new(config, feature_names)?;
    let mut reports = Vec::new();
    engine.run(records, |r, _| {
        reports.push(r.clone());
        Ok(())
    })?;
    Ok((reports, engine.into_model()))
}
