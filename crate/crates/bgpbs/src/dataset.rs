//! Feature-series data model: loading, splitting, and persisting labeled
//! BGP feature data.
//!
//! The interchange format is CSV with a mandatory header:
//! `bin_index,<feature_1>,...,<feature_D>,label`. The `bin_index` column is
//! optional (indices are assigned by row order when absent) and `label` is
//! optional on load, defaulting to benign. Written files always carry both
//! columns and use LF line endings.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-bin ground-truth label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Benign,
    Anomalous,
}

impl Label {
    pub fn is_anomalous(self) -> bool {
        matches!(self, Label::Anomalous)
    }

    fn from_csv_field(s: &str, line: usize) -> Result<Label> {
        let parse_err = || Error::Parse {
            line,
            msg: format!("label must be 0 or 1, got '{s}'"),
        };
        let v: f64 = s.parse().map_err(|_| parse_err())?;
        if v == 0.0 {
            Ok(Label::Benign)
        } else if v == 1.0 {
            Ok(Label::Anomalous)
        } else {
            Err(parse_err())
        }
    }
}

/// Names and binning metadata for a feature layout.
///
/// The toolkit is generic over the dimension; any header that parses is a
/// valid schema, including the 37-attribute layouts of public BGP datasets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub feature_names: Vec<String>,
    /// Metadata only; never enters any computation.
    #[serde(default = "default_bin_width")]
    pub bin_width_seconds: u64,
}

fn default_bin_width() -> u64 {
    60
}

impl FeatureSchema {
    pub fn new(feature_names: Vec<String>, bin_width_seconds: u64) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::Schema("schema must name at least one feature".into()));
        }
        if bin_width_seconds == 0 {
            return Err(Error::Schema("bin_width_seconds must be positive".into()));
        }
        for (i, name) in feature_names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Schema(format!("feature {i} has an empty name")));
            }
            if feature_names[..i].contains(name) {
                return Err(Error::Schema(format!("duplicate feature name '{name}'")));
            }
        }
        Ok(FeatureSchema {
            feature_names,
            bin_width_seconds,
        })
    }

    pub fn dimension(&self) -> usize {
        self.feature_names.len()
    }

    /// Position of a feature by name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }
}

/// One time bin: a feature vector plus its label.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRecord {
    pub bin_index: u64,
    pub values: Vec<f64>,
    pub label: Label,
}

/// A uniformly binned, time-ordered series of labeled feature vectors.
///
/// Invariants enforced at construction: bin indices are consecutive
/// integers, every record has exactly `schema.dimension()` finite values.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSeries {
    schema: FeatureSchema,
    records: Vec<FeatureRecord>,
}

impl FeatureSeries {
    pub fn new(schema: FeatureSchema, records: Vec<FeatureRecord>) -> Result<Self> {
        let dim = schema.dimension();
        for (i, rec) in records.iter().enumerate() {
            if rec.values.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "record {i} has {} values, schema dimension is {dim}",
                    rec.values.len()
                )));
            }
            if rec.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "record {i} contains a non-finite value"
                )));
            }
            if i > 0 && rec.bin_index != records[i - 1].bin_index + 1 {
                return Err(Error::InvalidInput(format!(
                    "bin_index must be consecutive: record {i} has bin {} after bin {}",
                    rec.bin_index,
                    records[i - 1].bin_index
                )));
            }
        }
        Ok(FeatureSeries { schema, records })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn records(&self) -> &[FeatureRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn all_benign(&self) -> bool {
        self.records.iter().all(|r| r.label == Label::Benign)
    }

    /// Load a series from a CSV stream.
    ///
    /// When `expected` is given, the header's feature names must match it
    /// exactly and the series adopts its bin width; otherwise the schema is
    /// taken from the header with the default bin width.
    pub fn from_csv<R: BufRead>(reader: R, expected: Option<&FeatureSchema>) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(l) => l?,
            None => return Err(Error::EmptyInput("no header line".into())),
        };
        let cols: Vec<String> = split_csv_line(&header);
        if cols.iter().all(|c| c.is_empty()) {
            return Err(Error::EmptyInput("blank header line".into()));
        }

        let has_bin_index = cols.first().map(String::as_str) == Some("bin_index");
        let has_label = cols.last().map(String::as_str) == Some("label");
        let start = usize::from(has_bin_index);
        let end = cols.len() - usize::from(has_label);
        if start >= end {
            return Err(Error::Schema("header names no feature columns".into()));
        }
        let names: Vec<String> = cols[start..end].to_vec();
        let schema = match expected {
            Some(exp) => {
                if names != exp.feature_names {
                    return Err(Error::Schema(format!(
                        "header features {:?} do not match expected {:?}",
                        names, exp.feature_names
                    )));
                }
                exp.clone()
            }
            None => FeatureSchema::new(names, default_bin_width())?,
        };
        let dim = schema.dimension();
        let expected_cols = dim + usize::from(has_bin_index) + usize::from(has_label);

        let mut records: Vec<FeatureRecord> = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields = split_csv_line(&line);
            if fields.len() != expected_cols {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {expected_cols} columns, found {}", fields.len()),
                });
            }
            let mut it = fields.iter();
            let bin_index = if has_bin_index {
                let tok = it.next().unwrap();
                tok.parse::<u64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bin_index must be a non-negative integer, got '{tok}'"),
                })?
            } else {
                records.len() as u64
            };
            if let Some(prev) = records.last() {
                if bin_index != prev.bin_index + 1 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!(
                            "bin_index must be consecutive: {} follows {}",
                            bin_index, prev.bin_index
                        ),
                    });
                }
            }
            let mut values = Vec::with_capacity(dim);
            for f in 0..dim {
                let tok = it.next().unwrap();
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!(
                        "non-numeric value '{tok}' in column '{}'",
                        schema.feature_names[f]
                    ),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!(
                            "non-finite value '{tok}' in column '{}'",
                            schema.feature_names[f]
                        ),
                    });
                }
                values.push(v);
            }
            let label = if has_label {
                Label::from_csv_field(it.next().unwrap(), line_no)?
            } else {
                Label::Benign
            };
            records.push(FeatureRecord {
                bin_index,
                values,
                label,
            });
        }
        if records.is_empty() {
            return Err(Error::EmptyInput("file contains no data rows".into()));
        }
        FeatureSeries::new(schema, records)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, expected: Option<&FeatureSchema>) -> Result<Self> {
        let file = File::open(path)?;
        Self::from_csv(BufReader::new(file), expected)
    }

    /// Write the series as CSV. Always emits `bin_index` and `label`
    /// columns; floats are printed in shortest round-trip form, so a
    /// save/load cycle reproduces values exactly.
    pub fn to_csv<W: Write>(&self, mut sink: W) -> Result<()> {
        let mut header = String::from("bin_index");
        for name in &self.schema.feature_names {
            header.push(',');
            header.push_str(name);
        }
        header.push_str(",label\n");
        sink.write_all(header.as_bytes())?;

        let mut line = String::new();
        for rec in &self.records {
            line.clear();
            line.push_str(&rec.bin_index.to_string());
            for v in &rec.values {
                line.push(',');
                line.push_str(&format_float(*v));
            }
            line.push(',');
            line.push(if rec.label.is_anomalous() { '1' } else { '0' });
            line.push('\n');
            sink.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        self.to_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Split a benign series chronologically: the first
    /// `floor(train_fraction * n)` records and the remainder.
    pub fn split_chronological(&self, train_fraction: f64) -> Result<(FeatureSeries, FeatureSeries)> {
        if self.is_empty() {
            return Err(Error::InvalidInput("cannot split an empty series".into()));
        }
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "train_fraction must lie in (0,1), got {train_fraction}"
            )));
        }
        if !self.all_benign() {
            return Err(Error::Leakage(
                "chronological split is defined for benign series only".into(),
            ));
        }
        let n = self.records.len();
        let k = (train_fraction * n as f64).floor() as usize;
        if k == 0 || k >= n {
            return Err(Error::InvalidInput(format!(
                "split at fraction {train_fraction} leaves a side empty (n={n})"
            )));
        }
        let first = FeatureSeries {
            schema: self.schema.clone(),
            records: self.records[..k].to_vec(),
        };
        let second = FeatureSeries {
            schema: self.schema.clone(),
            records: self.records[k..].to_vec(),
        };
        Ok((first, second))
    }
}

fn split_csv_line(line: &str) -> Vec<String> {
    line.trim_end_matches(['\r', '\n'])
        .split(',')
        .map(|s| s.trim().to_string())
        .collect()
}

fn format_float(v: f64) -> String {
    // `{}` prints the shortest string that parses back to the same f64.
    format!("{v}")
}
