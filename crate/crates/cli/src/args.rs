use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "streamrank", version, about = "Online SVM feature ranking for packet streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract the 43 per-packet features from a pcap file into CSV.
    Extract {
        pcap: PathBuf,
        /// Ground-truth sidecar (by packet index or by time range).
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the windowed test-then-train loop over a CSV or pcap stream.
    #[command(alias = "run-online")]
    Run(RunArgs),
    /// Train a model offline on every record of a CSV or pcap file.
    Train {
        input: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print the feature ranking stored in a checkpoint.
    Rank {
        checkpoint: PathBuf,
        /// Number of features to show (clamped to the feature count).
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long, value_enum, default_value = "table")]
        format: RankFormat,
    },
    /// Time offline feature scorers and measure downstream accuracy.
    Compare {
        csv: PathBuf,
        #[arg(short, long)]
        k: usize,
        /// Comma-separated subset of fisher,chi2,mutual_info,rfe,svm_weights.
        #[arg(long, value_delimiter = ',', default_value = "fisher,chi2,mutual_info,rfe,svm_weights")]
        methods: Vec<String>,
        #[arg(long, default_value_t = 0.7)]
        train_frac: f64,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic labeled feature CSV with a planted concept.
    SynthGenerate(SynthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum RankFormat {
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Feature CSV or pcap capture.
    pub input: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub window_size: usize,
    #[arg(long, default_value_t = 0.05)]
    pub mse_threshold: f64,
    #[arg(long, default_value_t = 100)]
    pub pretrain_windows: usize,
    /// Epochs per retrain.
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub pretrain_epochs: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Disable retraining after pretraining.
    #[arg(long)]
    pub frozen: bool,
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    /// Write a checkpoint every this many windows (0 = only the final model).
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: usize,
    /// Record per-window wall time (makes reports run-dependent).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(short, long)]
    pub out: PathBuf,
    /// Total windows to generate.
    #[arg(long, default_value_t = 120)]
    pub windows: usize,
    #[arg(long, default_value_t = 500)]
    pub window_size: usize,
    /// Number of informative features.
    #[arg(long, default_value_t = 5)]
    pub planted: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Window indices at which the concept is negated.
    #[arg(long, value_delimiter = ',')]
    pub drift_at: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the planted weights and regime boundaries as JSON.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}
