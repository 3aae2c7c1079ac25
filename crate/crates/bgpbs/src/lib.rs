//! Hybrid BGP anomaly-detection toolkit.
//!
//! The crate bundles the full measurement pipeline for reconstruction-based
//! BGP anomaly detection and its failure modes: a feature-series data model,
//! a seeded synthetic scenario generator (update storm, signal loss, and
//! low-deviation signatures), benign-only standardization and sliding-window
//! sequencing, an LSTM autoencoder trained from scratch with
//! backpropagation through time, percentile threshold calibration, a
//! statistical signal-loss detector (volume heartbeat plus downward CUSUM),
//! and an evaluation harness that scores every scenario with the
//! reconstruction, heartbeat, and hybrid detectors.
//!
//! Start with the runnable examples (`cargo run --release --example
//! storm_positive_control`) or the `bgpbs` binary, which exposes the
//! pipeline as `generate`, `train`, `score`, and `evaluate` subcommands.

pub mod autoencoder;
pub mod dataset;
pub mod detectors;
pub mod error;
pub mod eval;
pub mod mat;
pub mod pipeline;
pub mod synthgen;

pub use autoencoder::{train, AutoencoderParams, ModelDims, TrainConfig, TrainReport};
pub use dataset::{FeatureRecord, FeatureSchema, FeatureSeries, Label};
pub use detectors::{
    cusum_downward, hybrid_classify, score_windows, AnomalyScore, HeartbeatDetector,
    HybridVerdict, Threshold, VerdictKind,
};
pub use error::{Error, Result};
pub use eval::{
    compute_metrics, emit_report, fit_pipeline, run_experiment, score_scenario, DetectionReport,
    ErrorHistogram, EvalMetrics, ExperimentConfig, ModelBundle, ScenarioReport,
};
pub use mat::Mat;
pub use pipeline::{make_windows, SequenceWindow, Standardizer};
pub use synthgen::{
    make_scenario_suite, BenignModel, FeatureModel, ScenarioKind, ScenarioSpec, ScenarioSuite,
    SuiteConfig,
};
