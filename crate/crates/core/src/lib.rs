//! Streaming feature ranking for packet-level intrusion detection.
//!
//! A linear SVM is trained online with mini-batch stochastic subgradient
//! descent on the regularized hinge loss; its weights rank the packet
//! features. The [`stream`] engine scores each window of packets with the
//! current model, measures the window's mean squared error and retrains on
//! the window when the error exceeds a threshold.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the usual `f64` instantiation.

pub mod baselines;
pub mod error;
pub mod features;
pub mod model;
pub mod scalar;
pub mod stream;
pub mod synth;

pub use error::{Error, Result};
pub use model::{FeatureRanking, FeatureVector, Hyperparams, Label, LabeledExample, ModelState};
pub use scalar::Scalar;

pub type Model = ModelState<f64>;
pub type Model32 = ModelState<f32>;
pub type Example = LabeledExample<f64>;
pub type Params = Hyperparams<f64>;
pub type Engine = stream::StreamEngine<f64>;
pub type Config = stream::EngineConfig<f64>;
