//! Acceptance gate for the toolkit: one test per shipped claim, each
//! printing a single PASS line with the measured values next to its
//! bound. The headline claims run against the default experiment,
//! executed through the real `evaluate` binary exactly as a user would
//! run it; the run is shared across tests and performed twice to prove
//! byte determinism.

use std::fs;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use bgpbs::autoencoder::{mae, AutoencoderParams, ModelDims};
use bgpbs::dataset::{FeatureRecord, FeatureSchema, FeatureSeries, Label};
use bgpbs::detectors::{cusum_downward, Threshold};
use bgpbs::eval::DetectionReport;
use bgpbs::pipeline::{make_windows, Standardizer};
use bgpbs::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct DefaultRun {
    report: DetectionReport,
    first_json: Vec<u8>,
    second_json: Vec<u8>,
    first_metrics: Vec<u8>,
    second_metrics: Vec<u8>,
    elapsed: Duration,
}

/// Run `bgpbs evaluate` twice with the default config, timing the first.
fn default_run() -> &'static DefaultRun {
    static RUN: OnceLock<DefaultRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::TempDir::new().unwrap();
        let run = |name: &str| {
            let out = dir.path().join(name);
            let started = Instant::now();
            let output = Command::new(env!("CARGO_BIN_EXE_bgpbs"))
                .env_remove("BGPBS_SEED")
                .args(["evaluate", "--out", out.to_str().unwrap()])
                .output()
                .expect("binary should spawn");
            let elapsed = started.elapsed();
            assert!(
                output.status.success(),
                "evaluate failed: {}",
                String::from_utf8_lossy(&output.stderr)
            );
            (out, elapsed)
        };

        let (first, elapsed) = run("first");
        let (second, _) = run("second");

        let first_json = fs::read(first.join("report.json")).unwrap();
        let report: DetectionReport = serde_json::from_slice(&first_json).unwrap();

        // Weak training monotonicity must hold on every run of the gate.
        let losses = &report.train.epoch_losses;
        assert!(
            losses.last().unwrap() <= losses.first().unwrap(),
            "final-epoch loss {} above first-epoch loss {}",
            losses.last().unwrap(),
            losses.first().unwrap()
        );

        DefaultRun {
            report,
            first_json,
            second_json: fs::read(second.join("report.json")).unwrap(),
            first_metrics: fs::read(first.join("metrics.csv")).unwrap(),
            second_metrics: fs::read(second.join("metrics.csv")).unwrap(),
            elapsed,
        }
    })
}

fn sorted_errors(report: &DetectionReport, scenario: &str, anomalous: bool) -> Vec<f64> {
    let mut errors: Vec<f64> = report.scenarios[scenario]
        .scores
        .iter()
        .filter(|s| s.true_label.is_anomalous() == anomalous)
        .map(|s| s.error)
        .collect();
    errors.sort_by(f64::total_cmp);
    errors
}

fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn median(sorted: &[f64]) -> f64 {
    sorted[sorted.len() / 2]
}

#[test]
fn gradient_oracle_matches_finite_differences() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst: f64 = 0.0;
    let step = 1e-5;

    for _ in 0..20 {
        // Dimension triples must form a bottleneck (latent narrower than
        // the flattened window), so invalid draws are rejected.
        let dims = loop {
            let dims = ModelDims {
                input_dim: rng.gen_range(1..=4),
                window: rng.gen_range(2..=5),
                hidden_dim: rng.gen_range(1..=6),
            };
            if dims.hidden_dim < dims.window * dims.input_dim {
                break dims;
            }
        };
        let params = AutoencoderParams::init(dims, &mut rng).unwrap();
        let window = Mat::from_fn(dims.window, dims.input_dim, |_, _| rng.gen_range(-1.5..1.5));
        let (_, analytic) = params.loss_and_gradient(&window).unwrap();
        let theta = params.to_vec();

        for i in 0..theta.len() {
            let eval = |delta: f64| {
                let mut moved = theta.clone();
                moved[i] += delta;
                AutoencoderParams::from_vec(dims, &moved)
                    .unwrap()
                    .loss_and_gradient(&window)
                    .unwrap()
                    .0
            };
            let numeric = (eval(step) - eval(-step)) / (2.0 * step);
            // The scale floor keeps central-difference roundoff (absolute
            // noise near 1e-10) from dominating near-zero components.
            let scale = analytic[i].abs().max(numeric.abs()).max(1e-5);
            worst = worst.max((analytic[i] - numeric).abs() / scale);
        }
    }

    let elapsed = started.elapsed();
    assert!(worst < 1e-4, "worst relative error {worst:.3e}");
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "PASS gradient oracle: 20 instances, worst relative error {worst:.3e} < 1e-4 in {:.1}s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn storm_positive_control_is_detected_and_separable() {
    let run = default_run();
    let storm = &run.report.scenarios["storm"];
    let recall = storm.recon.recall.unwrap();

    let anomalous = sorted_errors(&run.report, "storm", true);
    let storm_benign = sorted_errors(&run.report, "storm", false);
    let control = sorted_errors(&run.report, "benign_test", false);
    let min_storm = anomalous[0];
    let p90 = nearest_rank(&storm_benign, 90.0).max(nearest_rank(&control, 90.0));

    assert!(recall >= 0.95, "storm recall {recall}");
    assert!(min_storm > p90, "min storm error {min_storm} vs benign p90 {p90}");
    assert!(
        run.elapsed < Duration::from_secs(600),
        "end-to-end run took {:?}",
        run.elapsed
    );
    println!(
        "PASS storm positive control: recall {recall:.4} >= 0.95, min storm error {min_storm:.2} > benign p90 {p90:.2}, run {:.0}s < 600s",
        run.elapsed.as_secs_f64()
    );
}

#[test]
fn signal_loss_blind_spot_scores_below_benign_median() {
    let run = default_run();
    let scenario = &run.report.scenarios["signal_loss"];
    let recall = scenario.recon.recall.unwrap();

    let anomalous_median = median(&sorted_errors(&run.report, "signal_loss", true));
    let benign_median = median(&sorted_errors(&run.report, "signal_loss", false))
        .min(median(&sorted_errors(&run.report, "benign_test", false)));

    assert!(recall <= 0.02, "signal-loss recall {recall}");
    assert!(
        anomalous_median < benign_median,
        "blackout median {anomalous_median} vs benign median {benign_median}"
    );
    println!(
        "PASS signal-loss blind spot: recall {recall:.4} <= 0.02, blackout median {anomalous_median:.4} < benign median {benign_median:.4}"
    );
}

#[test]
fn low_deviation_blind_spot_stays_below_recall_bound() {
    let run = default_run();
    let recall = run.report.scenarios["low_deviation"].recon.recall.unwrap();
    assert!(recall <= 0.10, "low-deviation recall {recall}");
    println!("PASS low-deviation blind spot: recall {recall:.4} <= 0.10 at default intensity");
}

#[test]
fn hybrid_remedy_recovers_signal_loss_without_losing_storm() {
    let run = default_run();
    let blackout = &run.report.scenarios["signal_loss"];
    let benign = &run.report.scenarios["benign_test"];
    let heartbeat_recall = blackout.heartbeat.recall.unwrap();
    let hybrid_recall = blackout.hybrid.recall.unwrap();
    let storm_recall = run.report.scenarios["storm"].hybrid.recall.unwrap();
    let benign_alert_fraction = benign.alerting_bins as f64 / benign.bins as f64;

    assert!(heartbeat_recall >= 0.95, "heartbeat recall {heartbeat_recall}");
    assert!(
        benign_alert_fraction <= 0.01,
        "benign alerting-bin fraction {benign_alert_fraction}"
    );
    assert!(hybrid_recall >= 0.95, "hybrid signal-loss recall {hybrid_recall}");
    assert!(storm_recall >= 0.95, "hybrid storm recall {storm_recall}");
    println!(
        "PASS hybrid remedy: heartbeat recall {heartbeat_recall:.4} >= 0.95 with benign alert fraction {benign_alert_fraction:.4} <= 0.01; hybrid recall signal_loss {hybrid_recall:.4}, storm {storm_recall:.4}"
    );
}

#[test]
fn threshold_semantics_hold_on_held_out_benign() {
    let run = default_run();
    let threshold = run.report.threshold;
    let flagged_fraction = run.report.scenarios["benign_test"]
        .recon
        .false_positive_rate
        .unwrap();

    assert_eq!(threshold.percentile, 99.0);
    assert!(
        threshold.n_calibration >= 500,
        "calibrated on {} errors",
        threshold.n_calibration
    );
    assert!(flagged_fraction <= 0.03, "flagged fraction {flagged_fraction}");
    assert!(
        !threshold.is_anomalous(threshold.value),
        "error equal to the threshold must not be flagged"
    );
    println!(
        "PASS threshold semantics: p99 on {} validation errors, held-out benign flagged fraction {flagged_fraction:.4} <= 0.03, boundary error not flagged",
        threshold.n_calibration
    );
}

#[test]
fn evaluate_is_byte_deterministic() {
    let run = default_run();
    assert_eq!(
        run.first_json, run.second_json,
        "report.json differs between identical runs"
    );
    assert_eq!(
        run.first_metrics, run.second_metrics,
        "metrics.csv differs between identical runs"
    );
    println!(
        "PASS determinism: two evaluate runs produced byte-identical report.json ({} bytes)",
        run.first_json.len()
    );
}

fn one_feature_series(values: &[f64]) -> FeatureSeries {
    let schema = FeatureSchema::new(vec!["x".into()], 60).unwrap();
    let records = values
        .iter()
        .enumerate()
        .map(|(i, &v)| FeatureRecord {
            bin_index: i as u64,
            values: vec![v],
            label: Label::Benign,
        })
        .collect();
    FeatureSeries::new(schema, records).unwrap()
}

#[test]
fn unit_oracles_match_hand_computed_values() {
    // Nearest-rank percentile.
    let hundred: Vec<f64> = (1..=100).map(f64::from).collect();
    assert_eq!(Threshold::calibrate(&hundred, 99.0).unwrap().value, 99.0);
    assert_eq!(Threshold::calibrate(&[0.5; 12], 99.0).unwrap().value, 0.5);
    assert_eq!(Threshold::calibrate(&[3.0], 50.0).unwrap().value, 3.0);
    let t = Threshold::calibrate(&hundred, 99.0).unwrap();
    assert!(!t.is_anomalous(99.0) && t.is_anomalous(99.0 + 1e-9));

    // Population standardizer.
    let series = one_feature_series(&[1.0, 2.0, 3.0, 4.0]);
    let standardizer = Standardizer::fit(&series).unwrap();
    assert_eq!(standardizer.means()[0], 2.5);
    assert!((standardizer.stds()[0] - 1.25f64.sqrt()).abs() < 1e-12);
    let transformed = standardizer.transform(&series).unwrap();
    let expected = (1.0 - 2.5) / 1.25f64.sqrt();
    assert!((transformed.records()[0].values[0] - expected).abs() < 1e-12);

    // Window-count formula: floor((n - W) / stride) + 1, empty when n < W.
    assert_eq!(make_windows(&one_feature_series(&[1.0, 2.0, 3.0]), 4, 1).unwrap().len(), 0);
    let ten = one_feature_series(&(1..=10).map(f64::from).collect::<Vec<_>>());
    assert_eq!(make_windows(&ten, 4, 2).unwrap().len(), 4);
    assert_eq!(make_windows(&ten, 10, 3).unwrap().len(), 1);
    assert_eq!(make_windows(&ten, 2, 1).unwrap().len(), 9);

    // Mean absolute error over a window pair.
    let window = Mat::from_rows(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
    let recon = Mat::from_rows(vec![vec![0.1, 0.3], vec![-0.2, 0.6]]).unwrap();
    assert!((mae(&window, &recon).unwrap() - 0.3).abs() < 1e-12);

    // Downward CUSUM recurrence.
    assert!(cusum_downward(&[100.0; 60], 100.0, 10.0, 150.0).unwrap().is_empty());
    let mut volumes = vec![100.0; 50];
    volumes.extend([0.0; 10]);
    let detections = cusum_downward(&volumes, 100.0, 10.0, 150.0).unwrap();
    assert_eq!(detections, vec![51, 53, 55, 57, 59]);

    println!(
        "PASS unit oracles: percentile, standardizer, window count, MAE, and CUSUM all match hand-computed values"
    );
}
