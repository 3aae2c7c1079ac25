//! The alerting layer: percentile threshold over reconstruction errors
//! (the Type I detector), a volume heartbeat with a downward CUSUM for
//! sustained signal loss (Type II), and the hybrid verdict combining both.

use serde::{Deserialize, Serialize};

use crate::autoencoder::AutoencoderParams;
use crate::dataset::{FeatureSeries, Label};
use crate::error::{Error, Result};
use crate::pipeline::SequenceWindow;

/// Lower bound on the heartbeat alert limit. With bursty low-rate traffic
/// the mu - k*sigma floor can fall below zero, which no count can undershoot;
/// the guard keeps "volume stuck at zero" detectable.
pub const HEARTBEAT_FLOOR_GUARD: f64 = 1.0;

/// Reconstruction-error alert threshold, calibrated as a nearest-rank
/// percentile of benign validation errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub percentile: f64,
    pub n_calibration: usize,
}

impl Threshold {
    /// Nearest-rank calibration: sort ascending, take the element at
    /// 1-based rank `ceil(percentile/100 * n)`.
    pub fn calibrate(errors: &[f64], percentile: f64) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::EmptyInput(
                "cannot calibrate a threshold on zero errors".into(),
            ));
        }
        if !(percentile > 0.0 && percentile <= 100.0) {
            return Err(Error::InvalidInput(format!(
                "percentile must lie in (0,100], got {percentile}"
            )));
        }
        if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::InvalidInput(
                "calibration errors must be finite and non-negative".into(),
            ));
        }
        let mut sorted = errors.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let rank = ((percentile / 100.0 * n as f64).ceil() as usize).clamp(1, n);
        Ok(Threshold {
            value: sorted[rank - 1],
            percentile,
            n_calibration: n,
        })
    }

    /// Strictly greater than the threshold; an error exactly equal to the
    /// calibrated value is not an anomaly.
    pub fn is_anomalous(&self, error: f64) -> bool {
        error > self.value
    }
}

/// One scored window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyScore {
    pub start_bin: u64,
    pub error: f64,
    pub flagged: bool,
    pub true_label: Label,
}

/// Score windows in order with the reconstruction detector.
pub fn score_windows(
    params: &AutoencoderParams,
    threshold: &Threshold,
    windows: &[SequenceWindow],
) -> Result<Vec<AnomalyScore>> {
    windows
        .iter()
        .map(|w| {
            let error = params.reconstruction_error(&w.values)?;
            Ok(AnomalyScore {
                start_bin: w.start_bin,
                error,
                flagged: threshold.is_anomalous(error),
                true_label: w.label,
            })
        })
        .collect()
}

/// Reconstruction errors of windows in order, without flagging; used to
/// calibrate a threshold on validation windows.
pub fn reconstruction_errors(
    params: &AutoencoderParams,
    windows: &[SequenceWindow],
) -> Result<Vec<f64>> {
    windows
        .iter()
        .map(|w| params.reconstruction_error(&w.values))
        .collect()
}

/// Signal-loss heartbeat: alerts when the summed raw update volume stays
/// below a `mean - k*std` floor for `n` consecutive bins.
///
/// Runs on raw, unstandardized values; update volume is a physical
/// quantity and its calibration must stay independent of the
/// reconstruction pipeline's standardizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeartbeatDetector {
    /// Feature indices summed into the per-bin volume.
    pub indices: Vec<usize>,
    pub mean: f64,
    pub std: f64,
    pub k: f64,
    #[serde(rename = "n")]
    pub persistence: usize,
}

impl HeartbeatDetector {
    /// Fit baseline volume statistics (population mean and std) on an
    /// all-benign series.
    pub fn fit(
        benign: &FeatureSeries,
        volume_features: &[usize],
        k: f64,
        persistence: usize,
    ) -> Result<Self> {
        if benign.is_empty() {
            return Err(Error::EmptyInput(
                "cannot fit heartbeat on empty series".into(),
            ));
        }
        if !benign.all_benign() {
            return Err(Error::Leakage(
                "heartbeat fit set contains anomalous records".into(),
            ));
        }
        if volume_features.is_empty() {
            return Err(Error::InvalidInput(
                "heartbeat needs at least one volume feature".into(),
            ));
        }
        let d = benign.schema().dimension();
        if let Some(bad) = volume_features.iter().find(|i| **i >= d) {
            return Err(Error::InvalidInput(format!(
                "volume feature index {bad} out of range for {d} features"
            )));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidInput(format!(
                "heartbeat k must be positive, got {k}"
            )));
        }
        if persistence == 0 {
            return Err(Error::InvalidInput(
                "heartbeat persistence must be at least 1".into(),
            ));
        }
        let n = benign.len() as f64;
        let volumes: Vec<f64> = benign
            .records()
            .iter()
            .map(|r| volume_features.iter().map(|i| r.values[*i]).sum())
            .collect();
        let mean = volumes.iter().sum::<f64>() / n;
        let var = volumes.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(HeartbeatDetector {
            indices: volume_features.to_vec(),
            mean,
            std: var.sqrt(),
            k,
            persistence,
        })
    }

    /// The raw floor `mean - k*std`; may be negative for bursty traffic.
    pub fn floor(&self) -> f64 {
        self.mean - self.k * self.std
    }

    /// The effective alert limit: the floor, guarded away from zero.
    pub fn limit(&self) -> f64 {
        self.floor().max(HEARTBEAT_FLOOR_GUARD)
    }

    /// Summed volume of one record's values.
    pub fn volume(&self, values: &[f64]) -> f64 {
        self.indices.iter().map(|i| values[*i]).sum()
    }

    /// Per-bin volumes of a whole series.
    pub fn volumes(&self, series: &FeatureSeries) -> Result<Vec<f64>> {
        let d = series.schema().dimension();
        if let Some(bad) = self.indices.iter().find(|i| **i >= d) {
            return Err(Error::Schema(format!(
                "volume feature index {bad} out of range for {d} features"
            )));
        }
        Ok(series
            .records()
            .iter()
            .map(|r| self.volume(&r.values))
            .collect())
    }

    /// Per-bin alert flags: bin `t` alerts iff it and the `persistence - 1`
    /// bins before it all have volume strictly below the limit. Alerts
    /// continue for as long as the condition holds.
    pub fn score(&self, series: &FeatureSeries) -> Result<Vec<bool>> {
        let limit = self.limit();
        let mut run = 0usize;
        Ok(self
            .volumes(series)?
            .into_iter()
            .map(|v| {
                if v < limit {
                    run += 1;
                } else {
                    run = 0;
                }
                run >= self.persistence
            })
            .collect())
    }
}

/// One-sided lower CUSUM over a volume sequence.
///
/// `S_0 = 0; S_t = max(0, S_{t-1} + (mean - slack - v_t))`; a change point
/// is recorded at each `t` where `S_t` first exceeds `decision`, after
/// which `S` resets to zero.
pub fn cusum_downward(
    volumes: &[f64],
    mean: f64,
    slack: f64,
    decision: f64,
) -> Result<Vec<usize>> {
    if !(decision.is_finite() && decision > 0.0) {
        return Err(Error::InvalidInput(format!(
            "decision threshold must be positive, got {decision}"
        )));
    }
    if !(slack.is_finite() && slack >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "slack must be non-negative, got {slack}"
        )));
    }
    let mut s = 0.0f64;
    let mut change_points = Vec::new();
    for (t, v) in volumes.iter().enumerate() {
        s = (s + (mean - slack - v)).max(0.0);
        if s > decision {
            change_points.push(t);
            s = 0.0;
        }
    }
    Ok(change_points)
}

/// Per-window hybrid taxonomy outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Normal,
    Type1,
    Type2,
}

/// The combined verdict for one window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridVerdict {
    pub start_bin: u64,
    pub type1_flag: bool,
    pub type2_flag: bool,
    pub verdict: VerdictKind,
    pub true_label: Label,
}

impl HybridVerdict {
    pub fn is_alert(&self) -> bool {
        self.verdict != VerdictKind::Normal
    }
}

/// Combine reconstruction scores with heartbeat alerts per window.
///
/// Window `i` covers series positions `i*stride .. i*stride + window`; its
/// type2 flag is set when at least `ceil(window/2)` of those bins alert.
/// Signal loss takes precedence over type1: a silent wire cannot also be
/// a storm.
pub fn hybrid_classify(
    recon: &[AnomalyScore],
    heartbeat_alerts: &[bool],
    window: usize,
    stride: usize,
) -> Result<Vec<HybridVerdict>> {
    if window < 2 {
        return Err(Error::InvalidInput(format!(
            "window must be at least 2, got {window}"
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be at least 1".into()));
    }
    let expected = if heartbeat_alerts.len() >= window {
        (heartbeat_alerts.len() - window) / stride + 1
    } else {
        0
    };
    if expected != recon.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores do not match {} alert bins at window {window}, stride {stride} \
             (expected {expected} windows)",
            recon.len(),
            heartbeat_alerts.len()
        )));
    }
    let need = window.div_ceil(2);
    Ok(recon
        .iter()
        .enumerate()
        .map(|(i, score)| {
            let start = i * stride;
            let alerting = heartbeat_alerts[start..start + window]
                .iter()
                .filter(|a| **a)
                .count();
            let type2_flag = alerting >= need;
            let type1_flag = score.flagged;
            let verdict = if type2_flag {
                VerdictKind::Type2
            } else if type1_flag {
                VerdictKind::Type1
            } else {
                VerdictKind::Normal
            };
            HybridVerdict {
                start_bin: score.start_bin,
                type1_flag,
                type2_flag,
                verdict,
                true_label: score.true_label,
            }
        })
        .collect())
}
