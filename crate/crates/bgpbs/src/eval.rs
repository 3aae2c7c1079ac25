//! End-to-end evaluation: detection metrics, the benign-train /
//! calibrate / score-every-scenario protocol, and report emission.
//!
//! [`run_experiment`] is the whole instrument in one call. Given a config
//! it generates (or loads) the data, trains the autoencoder on benign
//! windows, calibrates the alert threshold on held-out benign validation
//! errors, fits the heartbeat, and scores every scenario with the
//! reconstruction, heartbeat, and hybrid detectors. The resulting
//! [`DetectionReport`] is fully deterministic for a fixed config, byte for
//! byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autoencoder::{train, AutoencoderParams, TrainConfig, TrainReport};
use crate::dataset::{FeatureSeries, Label};
use crate::detectors::{
    cusum_downward, hybrid_classify, reconstruction_errors, score_windows, AnomalyScore,
    HeartbeatDetector, Threshold,
};
use crate::error::{Error, Result, StageExt};
use crate::pipeline::{make_windows, Standardizer};
use crate::synthgen::{make_scenario_suite, SuiteConfig};

/// Histogram bin count for reconstruction-error distributions.
pub const HISTOGRAM_BINS: usize = 50;

/// Confusion counts of one detector on one scenario.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricCounts {
    #[serde(rename = "tp")]
    pub true_positives: usize,
    #[serde(rename = "fp")]
    pub false_positives: usize,
    #[serde(rename = "tn")]
    pub true_negatives: usize,
    #[serde(rename = "fn")]
    pub false_negatives: usize,
}

/// Recall and false-positive rate with their confusion counts.
///
/// A rate whose denominator is zero is `None`, never `0.0`: missing
/// anomalies and zero recall are different findings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub recall: Option<f64>,
    pub false_positive_rate: Option<f64>,
    pub counts: MetricCounts,
}

/// Tally (flagged, true label) outcomes into metrics.
pub fn compute_metrics(outcomes: impl IntoIterator<Item = (bool, Label)>) -> Result<EvalMetrics> {
    let mut c = MetricCounts::default();
    for (flagged, label) in outcomes {
        match (flagged, label.is_anomalous()) {
            (true, true) => c.true_positives += 1,
            (true, false) => c.false_positives += 1,
            (false, false) => c.true_negatives += 1,
            (false, true) => c.false_negatives += 1,
        }
    }
    let total = c.true_positives + c.false_positives + c.true_negatives + c.false_negatives;
    if total == 0 {
        return Err(Error::EmptyInput("no outcomes to compute metrics on".into()));
    }
    let ratio = |num: usize, denom: usize| {
        if denom > 0 {
            Some(num as f64 / denom as f64)
        } else {
            None
        }
    };
    Ok(EvalMetrics {
        recall: ratio(c.true_positives, c.true_positives + c.false_negatives),
        false_positive_rate: ratio(c.false_positives, c.false_positives + c.true_negatives),
        counts: c,
    })
}

/// Reconstruction-error distribution of one scenario: fixed-width bins over
/// `[0, max error]`, counted separately for benign and anomalous windows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorHistogram {
    /// `bins + 1` edges; the first is 0, the last is the maximum error.
    pub edges: Vec<f64>,
    pub benign: Vec<u64>,
    pub anomalous: Vec<u64>,
}

impl ErrorHistogram {
    pub fn build(scores: &[AnomalyScore], bins: usize) -> Self {
        let max = scores.iter().map(|s| s.error).fold(0.0, f64::max);
        // A degenerate all-zero distribution still gets well-formed edges.
        let hi = if max > 0.0 { max } else { 1.0 };
        let edges = (0..=bins).map(|i| hi * i as f64 / bins as f64).collect();
        let mut benign = vec![0u64; bins];
        let mut anomalous = vec![0u64; bins];
        for s in scores {
            let idx = ((s.error / hi * bins as f64) as usize).min(bins - 1);
            if s.true_label.is_anomalous() {
                anomalous[idx] += 1;
            } else {
                benign[idx] += 1;
            }
        }
        ErrorHistogram {
            edges,
            benign,
            anomalous,
        }
    }

    /// Total number of windows counted.
    pub fn total(&self) -> u64 {
        self.benign.iter().sum::<u64>() + self.anomalous.iter().sum::<u64>()
    }
}

/// Heartbeat settings of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeartbeatConfig {
    /// Feature names summed into the update volume; `None` selects the
    /// conventional announcement and withdrawal counts.
    pub volume_features: Option<Vec<String>>,
    pub k: f64,
    #[serde(rename = "n")]
    pub persistence: usize,
}

impl Default for HeartbeatConfig {
    fn default() -> Self {
        HeartbeatConfig {
            volume_features: None,
            k: 3.0,
            persistence: 3,
        }
    }
}

const DEFAULT_VOLUME_FEATURES: [&str; 2] = ["n_announcements", "n_withdrawals"];

impl HeartbeatConfig {
    /// Resolve the configured volume feature names against a schema.
    pub fn resolve_indices(&self, schema: &crate::dataset::FeatureSchema) -> Result<Vec<usize>> {
        let names: Vec<&str> = match &self.volume_features {
            Some(names) => names.iter().map(String::as_str).collect(),
            None => DEFAULT_VOLUME_FEATURES.to_vec(),
        };
        names
            .iter()
            .map(|name| {
                schema.index_of(name).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "volume feature '{name}' is not in the schema; set \
                         heartbeat.volume_features explicitly"
                    ))
                })
            })
            .collect()
    }
}

/// CUSUM settings, expressed in multiples of the benign volume std.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CusumConfig {
    pub slack_sigma: f64,
    pub decision_sigma: f64,
}

impl Default for CusumConfig {
    fn default() -> Self {
        CusumConfig {
            slack_sigma: 1.0,
            decision_sigma: 8.0,
        }
    }
}

/// Concrete CUSUM parameters after fitting to a volume baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CusumParams {
    pub k_c: f64,
    pub h: f64,
}

impl CusumConfig {
    /// Scale sigma multiples by a fitted volume std. A zero-variance
    /// baseline would give a zero decision threshold, so it is floored.
    pub fn fit(&self, volume_std: f64) -> CusumParams {
        CusumParams {
            k_c: self.slack_sigma * volume_std,
            h: (self.decision_sigma * volume_std).max(1.0),
        }
    }
}

/// External datasets for [`run_experiment`] instead of the synthetic suite:
/// one benign training CSV plus any number of named scenario CSVs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalData {
    pub train_csv: PathBuf,
    /// Scenario name (used in the report and file names) to CSV path.
    pub scenarios: BTreeMap<String, PathBuf>,
}

/// Full experiment configuration. Every field has a default, so `{}` is a
/// valid config; the all-defaults run is the reference experiment.
///
/// One `seed` drives the whole run: the suite generator and the trainer
/// receive seeds derived from it on separate streams, so the nested
/// `suite.seed` and `train.seed` values are ignored here (they only matter
/// when those components are driven directly).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub window: usize,
    pub stride: usize,
    /// Chronological fraction of the benign series used for fitting; the
    /// rest is validation for threshold calibration. The default halves the
    /// two-day benign series so the validation slice spans a whole diurnal
    /// cycle, keeping validation errors exchangeable with held-out data.
    pub train_fraction: f64,
    pub percentile: f64,
    pub suite: SuiteConfig,
    /// When set, load these CSVs instead of generating the suite.
    pub data: Option<ExternalData>,
    pub train: TrainConfig,
    pub heartbeat: HeartbeatConfig,
    pub cusum: CusumConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 7,
            window: 8,
            stride: 1,
            train_fraction: 0.5,
            percentile: 99.0,
            suite: SuiteConfig::default(),
            data: None,
            train: TrainConfig::default(),
            heartbeat: HeartbeatConfig::default(),
            cusum: CusumConfig::default(),
        }
    }
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.gen()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::InvalidInput(format!(
                "window must be at least 2, got {}",
                self.window
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidInput("stride must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "train_fraction must lie in (0,1), got {}",
                self.train_fraction
            )));
        }
        if !(self.percentile > 0.0 && self.percentile <= 100.0) {
            return Err(Error::InvalidInput(format!(
                "percentile must lie in (0,100], got {}",
                self.percentile
            )));
        }
        Ok(())
    }

    /// Suite generator config with its seed derived from the experiment seed.
    pub fn suite_config(&self) -> SuiteConfig {
        let mut suite = self.suite.clone();
        suite.seed = derive_seed(self.seed, 1);
        suite
    }

    /// Trainer config with its seed derived from the experiment seed.
    pub fn train_config(&self) -> TrainConfig {
        let mut train = self.train.clone();
        train.seed = derive_seed(self.seed, 2);
        train
    }

    pub fn from_json_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Everything needed to score new data, persisted as one JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub window: usize,
    pub stride: usize,
    pub standardizer: Standardizer,
    pub autoencoder: AutoencoderParams,
    /// Echo of the hyperparameters the model was trained with.
    pub train_config: TrainConfig,
    pub threshold: Threshold,
    pub heartbeat: HeartbeatDetector,
    pub cusum: CusumParams,
}

impl ModelBundle {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 || self.stride == 0 {
            return Err(Error::InvalidInput(
                "bundle window/stride are out of range".into(),
            ));
        }
        self.autoencoder.validate()?;
        if self.standardizer.dimension() != self.autoencoder.dims.input_dim
            || self.window != self.autoencoder.dims.window
        {
            return Err(Error::Schema(
                "bundle standardizer, window, and model dimensions disagree".into(),
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let bundle: ModelBundle = serde_json::from_str(&text)?;
        bundle.validate()?;
        Ok(bundle)
    }
}

/// Fit the full detection stack on a benign fit/validation series pair:
/// standardizer and heartbeat on the fit series, autoencoder on fit
/// windows, threshold on validation reconstruction errors.
pub fn fit_pipeline(
    fit_series: &FeatureSeries,
    val_series: &FeatureSeries,
    config: &ExperimentConfig,
) -> Result<(ModelBundle, TrainReport)> {
    config.validate()?;
    let standardizer = Standardizer::fit(fit_series).stage("standardize")?;
    let fit_windows = make_windows(
        &standardizer.transform(fit_series).stage("standardize")?,
        config.window,
        config.stride,
    )
    .stage("window")?;
    let val_windows = make_windows(
        &standardizer.transform(val_series).stage("standardize")?,
        config.window,
        config.stride,
    )
    .stage("window")?;

    let (autoencoder, report) =
        train(&fit_windows, &val_windows, &config.train_config()).stage("train")?;

    let val_errors = reconstruction_errors(&autoencoder, &val_windows).stage("calibrate")?;
    let threshold = Threshold::calibrate(&val_errors, config.percentile).stage("calibrate")?;

    let indices = config
        .heartbeat
        .resolve_indices(fit_series.schema())
        .stage("heartbeat")?;
    let heartbeat = HeartbeatDetector::fit(
        fit_series,
        &indices,
        config.heartbeat.k,
        config.heartbeat.persistence,
    )
    .stage("heartbeat")?;
    let cusum = config.cusum.fit(heartbeat.std);

    let bundle = ModelBundle {
        window: config.window,
        stride: config.stride,
        standardizer,
        autoencoder,
        train_config: config.train_config(),
        threshold,
        heartbeat,
        cusum,
    };
    Ok((bundle, report))
}

/// One scenario's full scoring outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub windows: usize,
    pub anomalous_windows: usize,
    pub bins: usize,
    /// Bins on which the heartbeat detector raised an alert.
    pub alerting_bins: usize,
    pub recon: EvalMetrics,
    pub heartbeat: EvalMetrics,
    pub hybrid: EvalMetrics,
    pub histogram: ErrorHistogram,
    /// Downward CUSUM change points over the raw volume sequence.
    pub change_points: Vec<usize>,
    pub scores: Vec<AnomalyScore>,
}

/// Score one series with every detector in a fitted bundle.
pub fn score_scenario(bundle: &ModelBundle, series: &FeatureSeries) -> Result<ScenarioReport> {
    let standardized = bundle.standardizer.transform(series)?;
    let windows = make_windows(&standardized, bundle.window, bundle.stride)?;
    let scores = score_windows(&bundle.autoencoder, &bundle.threshold, &windows)?;
    let alerts = bundle.heartbeat.score(series)?;
    let verdicts = hybrid_classify(&scores, &alerts, bundle.window, bundle.stride)?;
    let volumes = bundle.heartbeat.volumes(series)?;
    let change_points = cusum_downward(
        &volumes,
        bundle.heartbeat.mean,
        bundle.cusum.k_c,
        bundle.cusum.h,
    )?;

    let recon = compute_metrics(scores.iter().map(|s| (s.flagged, s.true_label)))?;
    let heartbeat = compute_metrics(verdicts.iter().map(|v| (v.type2_flag, v.true_label)))?;
    let hybrid = compute_metrics(verdicts.iter().map(|v| (v.is_alert(), v.true_label)))?;
    Ok(ScenarioReport {
        windows: scores.len(),
        anomalous_windows: scores.iter().filter(|s| s.true_label.is_anomalous()).count(),
        bins: series.len(),
        alerting_bins: alerts.iter().filter(|a| **a).count(),
        recon,
        heartbeat,
        hybrid,
        histogram: ErrorHistogram::build(&scores, HISTOGRAM_BINS),
        change_points,
        scores,
    })
}

/// The complete experiment output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub config: ExperimentConfig,
    pub threshold: Threshold,
    pub train: TrainReport,
    pub scenarios: BTreeMap<String, ScenarioReport>,
}

/// Run the whole protocol: generate or load data, split, fit, calibrate,
/// and score every scenario. Deterministic for a fixed config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<DetectionReport> {
    config.validate()?;

    let (train_series, scenarios): (FeatureSeries, Vec<(String, FeatureSeries)>) =
        match &config.data {
            None => {
                let suite = make_scenario_suite(&config.suite_config()).stage("generate")?;
                let scenarios = suite
                    .scored()
                    .iter()
                    .map(|(name, series)| (name.to_string(), (*series).clone()))
                    .collect();
                (suite.benign_train, scenarios)
            }
            Some(data) => {
                let train_series =
                    FeatureSeries::from_csv_path(&data.train_csv, None).stage("load")?;
                if data.scenarios.is_empty() {
                    return Err(
                        Error::InvalidInput("no scenario datasets configured".into())
                            .in_stage("load"),
                    );
                }
                let mut scenarios = Vec::with_capacity(data.scenarios.len());
                for (name, path) in &data.scenarios {
                    let series = FeatureSeries::from_csv_path(path, Some(train_series.schema()))
                        .stage("load")?;
                    scenarios.push((name.clone(), series));
                }
                (train_series, scenarios)
            }
        };

    let (fit_series, val_series) = train_series
        .split_chronological(config.train_fraction)
        .stage("split")?;
    let (bundle, train_report) = fit_pipeline(&fit_series, &val_series, config)?;

    let mut reports = BTreeMap::new();
    for (name, series) in &scenarios {
        reports.insert(name.clone(), score_scenario(&bundle, series).stage("score")?);
    }

    Ok(DetectionReport {
        config: config.clone(),
        threshold: bundle.threshold,
        train: train_report,
        scenarios: reports,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render per-window scores as plot-ready CSV with a
/// `start_bin,error,flagged,label` header.
pub fn scores_to_csv(scores: &[AnomalyScore]) -> String {
    let mut csv = String::from("start_bin,error,flagged,label\n");
    for s in scores {
        writeln!(
            csv,
            "{},{},{},{}",
            s.start_bin,
            s.error,
            u8::from(s.flagged),
            u8::from(s.true_label.is_anomalous())
        )
        .expect("writing to a String cannot fail");
    }
    csv
}

/// Write `report.json`, one `errors_<scenario>.csv` per scenario, and
/// `metrics.csv` into `out_dir` (created if missing).
pub fn emit_report(report: &DetectionReport, out_dir: impl AsRef<Path>) -> Result<()> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;

    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_file(&out_dir.join("report.json"), &json)?;

    for (name, scenario) in &report.scenarios {
        let csv = scores_to_csv(&scenario.scores);
        write_file(&out_dir.join(format!("errors_{name}.csv")), &csv)?;
    }

    let mut csv = String::from("scenario,detector,tp,fp,tn,fn,recall,false_positive_rate\n");
    for (name, scenario) in &report.scenarios {
        for (detector, m) in [
            ("recon", &scenario.recon),
            ("heartbeat", &scenario.heartbeat),
            ("hybrid", &scenario.hybrid),
        ] {
            writeln!(
                csv,
                "{name},{detector},{},{},{},{},{},{}",
                m.counts.true_positives,
                m.counts.false_positives,
                m.counts.true_negatives,
                m.counts.false_negatives,
                fmt_opt(m.recall),
                fmt_opt(m.false_positive_rate)
            )
            .expect("writing to a String cannot fail");
        }
    }
    write_file(&out_dir.join("metrics.csv"), &csv)?;
    Ok(())
}
