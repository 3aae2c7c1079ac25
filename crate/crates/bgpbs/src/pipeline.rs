//! Preprocessing between raw feature series and model input: per-feature
//! standardization fitted on benign data only, and sliding-window
//! sequencing with majority labeling.

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureRecord, FeatureSeries, Label};
use crate::error::{Error, Result};
use crate::mat::Mat;

/// Per-feature z-score transform, fitted on a benign series.
///
/// Stores population statistics (division by `n`). A feature with zero
/// variance keeps its raw `0.0` std here; the transform substitutes a
/// divisor of one so constant features pass through centered.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
    fitted_on: usize,
}

impl Standardizer {
    /// Fit on a benign series. Anomalous records in the fit set would leak
    /// anomaly statistics into the transform, so they are rejected.
    pub fn fit(series: &FeatureSeries) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::EmptyInput(
                "cannot fit standardizer on empty series".into(),
            ));
        }
        if !series.all_benign() {
            return Err(Error::Leakage(
                "standardizer fit set contains anomalous records".into(),
            ));
        }
        let d = series.schema().dimension();
        let n = series.len() as f64;
        let mut means = vec![0.0; d];
        for rec in series.records() {
            for (m, v) in means.iter_mut().zip(&rec.values) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = vec![0.0; d];
        for rec in series.records() {
            for ((s, v), m) in stds.iter_mut().zip(&rec.values).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        stds.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        Ok(Standardizer {
            means,
            stds,
            fitted_on: series.len(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.means.len()
    }

    /// Number of records the statistics were computed from.
    pub fn fitted_on(&self) -> usize {
        self.fitted_on
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Raw population stds; zero-variance features are stored as `0.0`.
    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    /// Standardize one value of feature `feature`.
    pub fn transform_value(&self, feature: usize, value: f64) -> f64 {
        let std = self.stds[feature];
        let divisor = if std == 0.0 { 1.0 } else { std };
        (value - self.means[feature]) / divisor
    }

    /// Standardize a whole series; labels and bin indices are preserved.
    pub fn transform(&self, series: &FeatureSeries) -> Result<FeatureSeries> {
        if series.schema().dimension() != self.dimension() {
            return Err(Error::Schema(format!(
                "standardizer fitted on {} features, series has {}",
                self.dimension(),
                series.schema().dimension()
            )));
        }
        let records = series
            .records()
            .iter()
            .map(|rec| FeatureRecord {
                bin_index: rec.bin_index,
                values: rec
                    .values
                    .iter()
                    .enumerate()
                    .map(|(f, v)| self.transform_value(f, *v))
                    .collect(),
                label: rec.label,
            })
            .collect();
        FeatureSeries::new(series.schema().clone(), records)
    }
}

/// One model-ready sequence: `window x dimension` values, the bin index of
/// its first record, and a majority-vote label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceWindow {
    pub start_bin: u64,
    pub values: Mat,
    pub label: Label,
}

/// Majority rule for window labels: anomalous iff at least `ceil(w/2)` of
/// the `w` records are anomalous.
pub fn window_label(labels: &[Label]) -> Label {
    let anomalous = labels.iter().filter(|l| l.is_anomalous()).count();
    if anomalous >= labels.len().div_ceil(2) {
        Label::Anomalous
    } else {
        Label::Benign
    }
}

/// Slice a series into sliding windows starting at positions 0, `stride`,
/// `2*stride`, and so on.
///
/// Produces `floor((n - window) / stride) + 1` windows for `n >= window`
/// and an empty list for shorter series. The series is taken as-is; run it
/// through [`Standardizer::transform`] first when feeding a model.
pub fn make_windows(
    series: &FeatureSeries,
    window: usize,
    stride: usize,
) -> Result<Vec<SequenceWindow>> {
    if window < 2 {
        return Err(Error::InvalidInput(format!(
            "window must be at least 2, got {window}"
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be at least 1".into()));
    }
    if series.len() < window {
        return Ok(Vec::new());
    }

    let d = series.schema().dimension();
    let records = series.records();
    let count = (series.len() - window) / stride + 1;
    let mut windows = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(window);
    for k in 0..count {
        let start = k * stride;
        let mut values = Mat::zeros(window, d);
        labels.clear();
        for (t, rec) in records[start..start + window].iter().enumerate() {
            values.row_mut(t).copy_from_slice(&rec.values);
            labels.push(rec.label);
        }
        windows.push(SequenceWindow {
            start_bin: records[start].bin_index,
            values,
            label: window_label(&labels),
        });
    }
    Ok(windows)
}
