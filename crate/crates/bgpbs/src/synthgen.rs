//! Seeded synthetic feature-series generation: a benign churn baseline plus
//! the three anomaly signatures used to probe a detector.
//!
//! The benign model draws count features from a Poisson process with a mild
//! diurnal rate modulation and statistic features from a normal distribution
//! clipped at zero. Anomalies rewrite a contiguous window of an otherwise
//! benign series:
//!
//! * `Storm` floods the window with chaotic churn. Count rates are
//!   multiplied by the intensity and overdispersed, and the path statistics
//!   shift upward.
//! * `SignalLoss` forces every feature in the window to exactly zero, the
//!   signature of session loss at a collector.
//! * `LowDeviation` gives two designated count features a small rate bump
//!   and leaves everything else untouched.
//!
//! Generation is deterministic for a given (model, length, seed).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureRecord, FeatureSchema, FeatureSeries, Label};
use crate::error::{Error, Result};

/// Bins per diurnal cycle; one day at the conventional one-minute binning.
const DIURNAL_PERIOD_BINS: f64 = 1440.0;

/// Attempts to redraw an all-zero benign bin before giving up.
const MAX_RESAMPLE_ATTEMPTS: usize = 100;

/// Stochastic model for a single feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureModel {
    /// Update-count feature, Poisson around `rate` (diurnally modulated).
    Count { rate: f64 },
    /// AS-path-length statistic, Normal(mean, std) clipped at zero.
    PathLength { mean: f64, std: f64 },
    /// Edit-distance statistic, Normal(mean, std) clipped at zero.
    EditDistance { mean: f64, std: f64 },
}

impl FeatureModel {
    pub fn is_count(&self) -> bool {
        matches!(self, FeatureModel::Count { .. })
    }

    /// Population standard deviation of the benign draw at base rate.
    pub fn benign_std(&self) -> f64 {
        match self {
            FeatureModel::Count { rate } => rate.sqrt(),
            FeatureModel::PathLength { std, .. } | FeatureModel::EditDistance { std, .. } => *std,
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        match self {
            FeatureModel::Count { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "feature {index}: count rate must be positive, got {rate}"
                    )));
                }
            }
            FeatureModel::PathLength { mean, std } | FeatureModel::EditDistance { mean, std } => {
                if !(mean.is_finite() && *mean >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "feature {index}: statistic mean must be non-negative, got {mean}"
                    )));
                }
                if !(std.is_finite() && *std >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "feature {index}: statistic std must be non-negative, got {std}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Benign-traffic model: one [`FeatureModel`] per schema feature, a diurnal
/// amplitude in `[0,1)`, and the generation seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenignModel {
    pub features: Vec<FeatureModel>,
    pub diurnal_amplitude: f64,
    pub seed: u64,
}

impl BenignModel {
    fn validate(&self, schema: &FeatureSchema) -> Result<()> {
        if self.features.len() != schema.dimension() {
            return Err(Error::InvalidInput(format!(
                "model declares {} features, schema has {}",
                self.features.len(),
                schema.dimension()
            )));
        }
        if !(self.diurnal_amplitude >= 0.0 && self.diurnal_amplitude < 1.0) {
            return Err(Error::InvalidInput(format!(
                "diurnal_amplitude must lie in [0,1), got {}",
                self.diurnal_amplitude
            )));
        }
        for (i, f) in self.features.iter().enumerate() {
            f.validate(i)?;
        }
        Ok(())
    }

    /// Indices of the two count features a low-deviation event perturbs
    /// (the first two count features in schema order).
    pub fn designated_count_features(&self) -> Option<(usize, usize)> {
        let mut it = self
            .features
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_count())
            .map(|(i, _)| i);
        match (it.next(), it.next()) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        }
    }
}

/// Which anomaly signature to inject.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Storm,
    SignalLoss,
    LowDeviation,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Storm => "storm",
            ScenarioKind::SignalLoss => "signal_loss",
            ScenarioKind::LowDeviation => "low_deviation",
        }
    }

    /// Conventional intensity when the config does not override it.
    pub fn default_intensity(self) -> f64 {
        match self {
            ScenarioKind::Storm => 25.0,
            ScenarioKind::SignalLoss | ScenarioKind::LowDeviation => 1.0,
        }
    }
}

/// A single anomaly injection: kind, placement, strength, seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Position of the first rewritten record.
    pub start_bin: usize,
    pub duration_bins: usize,
    pub intensity: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, start_bin: usize, duration_bins: usize, seed: u64) -> Self {
        ScenarioSpec {
            kind,
            start_bin,
            duration_bins,
            intensity: kind.default_intensity(),
            seed,
        }
    }
}

fn diurnal_rate(rate: f64, amplitude: f64, bin: u64) -> f64 {
    rate * (1.0 + amplitude * (2.0 * std::f64::consts::PI * bin as f64 / DIURNAL_PERIOD_BINS).sin())
}

fn draw_benign_bin(
    model: &BenignModel,
    bin: u64,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<f64>,
) -> Result<()> {
    out.clear();
    for f in &model.features {
        let v = match f {
            FeatureModel::Count { rate } => {
                let lam = diurnal_rate(*rate, model.diurnal_amplitude, bin);
                Poisson::new(lam)
                    .map_err(|e| Error::InvalidInput(format!("bad Poisson rate {lam}: {e}")))?
                    .sample(rng)
            }
            FeatureModel::PathLength { mean, std } | FeatureModel::EditDistance { mean, std } => {
                Normal::new(*mean, *std)
                    .map_err(|e| Error::InvalidInput(format!("bad normal params: {e}")))?
                    .sample(rng)
                    .max(0.0)
            }
        };
        out.push(v);
    }
    Ok(())
}

/// Generate `length` benign records under `model`.
///
/// All-zero bins are redrawn so that a fully silent bin can only ever come
/// from a signal-loss injection.
pub fn generate_benign(
    model: &BenignModel,
    length: usize,
    schema: &FeatureSchema,
) -> Result<FeatureSeries> {
    if length == 0 {
        return Err(Error::InvalidInput("series length must be positive".into()));
    }
    model.validate(schema)?;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut records = Vec::with_capacity(length);
    let mut values = Vec::with_capacity(schema.dimension());
    for bin in 0..length as u64 {
        let mut attempts = 0;
        loop {
            draw_benign_bin(model, bin, &mut rng, &mut values)?;
            if values.iter().any(|v| *v != 0.0) {
                break;
            }
            attempts += 1;
            if attempts >= MAX_RESAMPLE_ATTEMPTS {
                return Err(Error::InvalidInput(
                    "benign model keeps producing all-zero bins; raise its rates".into(),
                ));
            }
        }
        records.push(FeatureRecord {
            bin_index: bin,
            values: values.clone(),
            label: Label::Benign,
        });
    }
    FeatureSeries::new(schema.clone(), records)
}

/// Rewrite a window of a benign series with the scenario's signature and
/// relabel it anomalous. Records outside the window are untouched.
pub fn inject_scenario(
    base: &FeatureSeries,
    spec: &ScenarioSpec,
    model: &BenignModel,
) -> Result<FeatureSeries> {
    if !base.all_benign() {
        return Err(Error::InvalidInput(
            "scenario injection requires an all-benign base series".into(),
        ));
    }
    model.validate(base.schema())?;
    if spec.duration_bins == 0 {
        return Err(Error::InvalidInput("duration_bins must be at least 1".into()));
    }
    if spec.start_bin + spec.duration_bins > base.len() {
        return Err(Error::InvalidInput(format!(
            "scenario window [{}, {}) overflows series of length {}",
            spec.start_bin,
            spec.start_bin + spec.duration_bins,
            base.len()
        )));
    }
    if !(spec.intensity.is_finite() && spec.intensity > 0.0) {
        return Err(Error::InvalidInput(format!(
            "intensity must be positive, got {}",
            spec.intensity
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = base.records().to_vec();
    let window = spec.start_bin..spec.start_bin + spec.duration_bins;

    match spec.kind {
        ScenarioKind::SignalLoss => {
            for rec in &mut records[window] {
                rec.values.iter_mut().for_each(|v| *v = 0.0);
                rec.label = Label::Anomalous;
            }
        }
        ScenarioKind::Storm => {
            for rec in &mut records[window] {
                for (f, v) in model.features.iter().zip(rec.values.iter_mut()) {
                    match f {
                        FeatureModel::Count { rate } => {
                            *v = overdispersed_count(rate * spec.intensity, &mut rng)?;
                        }
                        FeatureModel::PathLength { .. } => {
                            *v += rng.gen_range(10.0..30.0);
                        }
                        FeatureModel::EditDistance { .. } => {
                            *v *= 5.0;
                        }
                    }
                }
                rec.label = Label::Anomalous;
            }
        }
        ScenarioKind::LowDeviation => {
            let (a, b) = model.designated_count_features().ok_or_else(|| {
                Error::InvalidInput(
                    "low-deviation injection needs at least two count features".into(),
                )
            })?;
            for rec in &mut records[window] {
                for idx in [a, b] {
                    if let FeatureModel::Count { rate } = &model.features[idx] {
                        let lam = rate * (1.0 + 0.2 * spec.intensity);
                        rec.values[idx] = Poisson::new(lam)
                            .map_err(|e| {
                                Error::InvalidInput(format!("bad Poisson rate {lam}: {e}"))
                            })?
                            .sample(&mut rng);
                    }
                }
                rec.label = Label::Anomalous;
            }
        }
    }

    FeatureSeries::new(base.schema().clone(), records)
}

/// Count draw with mean `m` and variance `2m` (a gamma-mixed Poisson),
/// twice the dispersion of a plain Poisson at the same mean.
fn overdispersed_count(m: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let gamma = Gamma::new(m, 1.0)
        .map_err(|e| Error::InvalidInput(format!("bad storm rate {m}: {e}")))?;
    let mixed_rate = gamma.sample(rng).max(1e-9);
    Ok(Poisson::new(mixed_rate)
        .map_err(|e| Error::InvalidInput(format!("bad Poisson rate {mixed_rate}: {e}")))?
        .sample(rng))
}

/// One feature entry of a suite config: a name plus its stochastic model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(flatten)]
    pub model: FeatureModel,
}

/// Series lengths for the generated suite, in bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteLengths {
    pub train: usize,
    pub test: usize,
    pub anomaly: usize,
}

impl Default for SuiteLengths {
    fn default() -> Self {
        SuiteLengths {
            train: 2880,
            test: 1440,
            anomaly: 3000,
        }
    }
}

/// Per-scenario intensity multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioIntensities {
    pub storm: f64,
    pub signal_loss: f64,
    pub low_deviation: f64,
}

impl Default for ScenarioIntensities {
    fn default() -> Self {
        ScenarioIntensities {
            storm: ScenarioKind::Storm.default_intensity(),
            signal_loss: ScenarioKind::SignalLoss.default_intensity(),
            low_deviation: ScenarioKind::LowDeviation.default_intensity(),
        }
    }
}

impl ScenarioIntensities {
    fn for_kind(&self, kind: ScenarioKind) -> f64 {
        match kind {
            ScenarioKind::Storm => self.storm,
            ScenarioKind::SignalLoss => self.signal_loss,
            ScenarioKind::LowDeviation => self.low_deviation,
        }
    }
}

/// Full configuration for [`make_scenario_suite`]. Every field has a
/// documented default, so an empty JSON object `{}` is a valid config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub features: Vec<FeatureSpec>,
    pub diurnal_amplitude: f64,
    pub bin_width_seconds: u64,
    pub lengths: SuiteLengths,
    pub scenarios: ScenarioIntensities,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        fn count(name: &str, rate: f64) -> FeatureSpec {
            FeatureSpec {
                name: name.into(),
                model: FeatureModel::Count { rate },
            }
        }
        fn path(name: &str, mean: f64, std: f64) -> FeatureSpec {
            FeatureSpec {
                name: name.into(),
                model: FeatureModel::PathLength { mean, std },
            }
        }
        fn edit(name: &str, mean: f64, std: f64) -> FeatureSpec {
            FeatureSpec {
                name: name.into(),
                model: FeatureModel::EditDistance { mean, std },
            }
        }
        SuiteConfig {
            features: vec![
                count("n_announcements", 3.0),
                count("n_withdrawals", 2.0),
                count("n_new_paths", 1.5),
                count("n_duplicates", 1.0),
                path("avg_aspath_len", 4.0, 3.0),
                path("max_aspath_len", 12.0, 9.0),
                edit("avg_edit_distance", 2.0, 1.5),
                edit("max_edit_distance", 6.0, 4.5),
            ],
            diurnal_amplitude: 0.2,
            bin_width_seconds: 60,
            lengths: SuiteLengths::default(),
            scenarios: ScenarioIntensities::default(),
            seed: 7,
        }
    }
}

impl SuiteConfig {
    pub fn schema(&self) -> Result<FeatureSchema> {
        FeatureSchema::new(
            self.features.iter().map(|f| f.name.clone()).collect(),
            self.bin_width_seconds,
        )
    }

    /// The benign model with a specific generation seed.
    pub fn benign_model(&self, seed: u64) -> BenignModel {
        BenignModel {
            features: self.features.iter().map(|f| f.model.clone()).collect(),
            diurnal_amplitude: self.diurnal_amplitude,
            seed,
        }
    }
}

/// The five series produced by [`make_scenario_suite`].
#[derive(Clone, Debug)]
pub struct ScenarioSuite {
    pub schema: FeatureSchema,
    pub benign_train: FeatureSeries,
    pub benign_test: FeatureSeries,
    pub storm: FeatureSeries,
    pub signal_loss: FeatureSeries,
    pub low_deviation: FeatureSeries,
}

impl ScenarioSuite {
    /// Scenario series that get scored, with their report names.
    pub fn scored(&self) -> [(&'static str, &FeatureSeries); 4] {
        [
            ("benign_test", &self.benign_test),
            ("storm", &self.storm),
            ("signal_loss", &self.signal_loss),
            ("low_deviation", &self.low_deviation),
        ]
    }

    /// All five series, in generation order.
    pub fn all(&self) -> [(&'static str, &FeatureSeries); 5] {
        [
            ("benign_train", &self.benign_train),
            ("benign_test", &self.benign_test),
            ("storm", &self.storm),
            ("signal_loss", &self.signal_loss),
            ("low_deviation", &self.low_deviation),
        ]
    }
}

/// Generate the five-series suite: benign train/test plus one series per
/// anomaly signature, each anomalous series carrying a single injected
/// window spanning 20% of its length, centered.
pub fn make_scenario_suite(config: &SuiteConfig) -> Result<ScenarioSuite> {
    let schema = config.schema()?;
    // One sub-seed per stochastic component, in a fixed order.
    let mut root = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sub_seed = || root.gen::<u64>();
    let train_seed = sub_seed();
    let test_seed = sub_seed();
    let scenario_seeds: Vec<(ScenarioKind, u64, u64)> = [
        ScenarioKind::Storm,
        ScenarioKind::SignalLoss,
        ScenarioKind::LowDeviation,
    ]
    .into_iter()
    .map(|kind| (kind, sub_seed(), sub_seed()))
    .collect();

    let benign_train = generate_benign(&config.benign_model(train_seed), config.lengths.train, &schema)?;
    let benign_test = generate_benign(&config.benign_model(test_seed), config.lengths.test, &schema)?;

    let duration = config.lengths.anomaly / 5;
    let start = (config.lengths.anomaly - duration) / 2;
    let mut injected = Vec::with_capacity(3);
    for (kind, base_seed, inject_seed) in scenario_seeds {
        let model = config.benign_model(base_seed);
        let base = generate_benign(&model, config.lengths.anomaly, &schema)?;
        let spec = ScenarioSpec {
            kind,
            start_bin: start,
            duration_bins: duration,
            intensity: config.scenarios.for_kind(kind),
            seed: inject_seed,
        };
        injected.push(inject_scenario(&base, &spec, &model)?);
    }
    let low_deviation = injected.pop().unwrap();
    let signal_loss = injected.pop().unwrap();
    let storm = injected.pop().unwrap();

    Ok(ScenarioSuite {
        schema,
        benign_train,
        benign_test,
        storm,
        signal_loss,
        low_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_schema() -> FeatureSchema {
        FeatureSchema::new(
            vec!["c0".into(), "c1".into(), "p0".into(), "e0".into()],
            60,
        )
        .unwrap()
    }

    fn small_model(seed: u64) -> BenignModel {
        BenignModel {
            features: vec![
                FeatureModel::Count { rate: 3.0 },
                FeatureModel::Count { rate: 2.0 },
                FeatureModel::PathLength {
                    mean: 4.0,
                    std: 3.0,
                },
                FeatureModel::EditDistance {
                    mean: 2.0,
                    std: 1.5,
                },
            ],
            diurnal_amplitude: 0.2,
            seed,
        }
    }

    fn csv_bytes(s: &FeatureSeries) -> Vec<u8> {
        let mut buf = Vec::new();
        s.to_csv(&mut buf).unwrap();
        buf
    }

    #[test]
    fn same_seed_gives_bitwise_identical_series() {
        let schema = small_schema();
        let model = small_model(42);
        let a = generate_benign(&model, 500, &schema).unwrap();
        let b = generate_benign(&model, 500, &schema).unwrap();
        assert_eq!(csv_bytes(&a), csv_bytes(&b));
    }

    #[test]
    fn different_seeds_differ() {
        let schema = small_schema();
        let a = generate_benign(&small_model(1), 100, &schema).unwrap();
        let b = generate_benign(&small_model(2), 100, &schema).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn sample_mean_tracks_rate_within_5_percent() {
        let schema = FeatureSchema::new(vec!["c".into()], 60).unwrap();
        let model = BenignModel {
            features: vec![FeatureModel::Count { rate: 100.0 }],
            diurnal_amplitude: 0.0,
            seed: 9,
        };
        let s = generate_benign(&model, 10_000, &schema).unwrap();
        let mean: f64 =
            s.records().iter().map(|r| r.values[0]).sum::<f64>() / s.len() as f64;
        assert!((mean - 100.0).abs() / 100.0 < 0.05, "mean {mean}");
    }

    #[test]
    fn generated_values_are_non_negative_and_counts_integral() {
        let s = generate_benign(&small_model(3), 2000, &small_schema()).unwrap();
        for rec in s.records() {
            assert!(rec.values.iter().all(|v| *v >= 0.0));
            assert_eq!(rec.values[0].fract(), 0.0);
            assert_eq!(rec.values[1].fract(), 0.0);
        }
    }

    #[test]
    fn zero_length_rejected() {
        let err = generate_benign(&small_model(1), 0, &small_schema()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn all_zero_bins_are_resampled_away() {
        let schema = FeatureSchema::new(vec!["a".into(), "b".into()], 60).unwrap();
        let model = BenignModel {
            features: vec![
                FeatureModel::Count { rate: 0.05 },
                FeatureModel::Count { rate: 0.05 },
            ],
            diurnal_amplitude: 0.0,
            seed: 11,
        };
        let s = generate_benign(&model, 2000, &schema).unwrap();
        assert!(s
            .records()
            .iter()
            .all(|r| r.values.iter().any(|v| *v != 0.0)));
    }

    #[test]
    fn signal_loss_zeroes_exactly_the_window() {
        let schema = small_schema();
        let model = small_model(5);
        let base = generate_benign(&model, 120, &schema).unwrap();
        let spec = ScenarioSpec::new(ScenarioKind::SignalLoss, 50, 30, 77);
        let s = inject_scenario(&base, &spec, &model).unwrap();
        for (i, rec) in s.records().iter().enumerate() {
            if (50..80).contains(&i) {
                assert!(rec.values.iter().all(|v| *v == 0.0), "bin {i}");
                assert_eq!(rec.label, Label::Anomalous);
            } else {
                assert_eq!(rec, &base.records()[i], "bin {i} should be untouched");
            }
        }
    }

    #[test]
    fn storm_inflates_count_means_at_least_tenfold() {
        let schema = small_schema();
        let model = small_model(6);
        let base = generate_benign(&model, 1000, &schema).unwrap();
        let spec = ScenarioSpec::new(ScenarioKind::Storm, 300, 400, 13);
        let s = inject_scenario(&base, &spec, &model).unwrap();
        let mean = |range: std::ops::Range<usize>| {
            s.records()[range.clone()]
                .iter()
                .map(|r| r.values[0])
                .sum::<f64>()
                / range.len() as f64
        };
        let inside = mean(300..700);
        let outside = (mean(0..300) * 300.0 + mean(700..1000) * 300.0) / 600.0;
        assert!(
            inside >= 10.0 * outside,
            "inside {inside} outside {outside}"
        );
    }

    #[test]
    fn storm_shifts_paths_and_scales_edit_distances() {
        let schema = small_schema();
        let model = small_model(8);
        let base = generate_benign(&model, 200, &schema).unwrap();
        let spec = ScenarioSpec::new(ScenarioKind::Storm, 50, 100, 21);
        let s = inject_scenario(&base, &spec, &model).unwrap();
        for i in 50..150 {
            let b = &base.records()[i].values;
            let v = &s.records()[i].values;
            assert!(v[2] >= b[2] + 10.0 && v[2] <= b[2] + 30.0);
            assert_eq!(v[3], b[3] * 5.0);
        }
    }

    #[test]
    fn low_deviation_touches_only_designated_features() {
        let schema = small_schema();
        let model = small_model(10);
        let base = generate_benign(&model, 3000, &schema).unwrap();
        let spec = ScenarioSpec::new(ScenarioKind::LowDeviation, 1200, 600, 31);
        let s = inject_scenario(&base, &spec, &model).unwrap();

        // Non-designated features are byte-identical to the base.
        for i in 1200..1800 {
            assert_eq!(s.records()[i].values[2], base.records()[i].values[2]);
            assert_eq!(s.records()[i].values[3], base.records()[i].values[3]);
        }

        // Inside/outside sample means stay within 3 sigma for every feature;
        // the designated counts shift upward but only slightly.
        for f in 0..4 {
            let inside: f64 = s.records()[1200..1800]
                .iter()
                .map(|r| r.values[f])
                .sum::<f64>()
                / 600.0;
            let outside: f64 = s
                .records()
                .iter()
                .enumerate()
                .filter(|(i, _)| !(1200..1800).contains(i))
                .map(|(_, r)| r.values[f])
                .sum::<f64>()
                / 2400.0;
            let sigma = model.features[f].benign_std();
            assert!(
                (inside - outside).abs() < 3.0 * sigma,
                "feature {f}: inside {inside} outside {outside} sigma {sigma}"
            );
        }
        let inside0: f64 = s.records()[1200..1800]
            .iter()
            .map(|r| r.values[0])
            .sum::<f64>()
            / 600.0;
        let outside0: f64 = base.records()[..1200]
            .iter()
            .map(|r| r.values[0])
            .sum::<f64>()
            / 1200.0;
        assert!(inside0 > outside0, "designated feature should drift up");
    }

    #[test]
    fn window_overflow_rejected() {
        let schema = small_schema();
        let model = small_model(1);
        let base = generate_benign(&model, 100, &schema).unwrap();
        let spec = ScenarioSpec::new(ScenarioKind::SignalLoss, 90, 20, 1);
        assert!(matches!(
            inject_scenario(&base, &spec, &model),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn non_benign_base_rejected() {
        let schema = small_schema();
        let model = small_model(1);
        let base = generate_benign(&model, 100, &schema).unwrap();
        let spec = ScenarioSpec::new(ScenarioKind::SignalLoss, 10, 20, 1);
        let once = inject_scenario(&base, &spec, &model).unwrap();
        assert!(matches!(
            inject_scenario(&once, &spec, &model),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn suite_is_deterministic_and_labeled_correctly() {
        let config = SuiteConfig {
            lengths: SuiteLengths {
                train: 300,
                test: 200,
                anomaly: 250,
            },
            ..SuiteConfig::default()
        };
        let a = make_scenario_suite(&config).unwrap();
        let b = make_scenario_suite(&config).unwrap();
        for ((_, x), (_, y)) in a.all().iter().zip(b.all().iter()) {
            assert_eq!(csv_bytes(x), csv_bytes(y));
        }

        assert!(a.benign_train.all_benign());
        assert!(a.benign_test.all_benign());
        let duration = 250 / 5;
        let anomalous = |s: &FeatureSeries| {
            s.records()
                .iter()
                .filter(|r| r.label.is_anomalous())
                .count()
        };
        assert_eq!(anomalous(&a.storm), duration);
        assert_eq!(anomalous(&a.signal_loss), duration);
        assert_eq!(anomalous(&a.low_deviation), duration);

        // Labels sit exactly on the centered window.
        let start = (250 - duration) / 2;
        for (i, rec) in a.storm.records().iter().enumerate() {
            assert_eq!(
                rec.label.is_anomalous(),
                (start..start + duration).contains(&i)
            );
        }
    }

    #[test]
    fn suite_series_share_one_schema() {
        let config = SuiteConfig {
            lengths: SuiteLengths {
                train: 100,
                test: 100,
                anomaly: 100,
            },
            ..SuiteConfig::default()
        };
        let suite = make_scenario_suite(&config).unwrap();
        for (_, s) in suite.all() {
            assert_eq!(s.schema(), &suite.schema);
        }
    }

    #[test]
    fn config_defaults_fill_missing_json_fields() {
        let cfg: SuiteConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, SuiteConfig::default());
        let cfg: SuiteConfig = serde_json::from_str(r#"{"seed": 123}"#).unwrap();
        assert_eq!(cfg.seed, 123);
        assert_eq!(cfg.lengths, SuiteLengths::default());
    }
}
