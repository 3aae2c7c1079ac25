//! Blind spot two: anomalies statistically close to benign churn slip by.
//!
//! A low-deviation event (the WannaCry-style signature) nudges the
//! announcement and withdrawal rates by 20 percent. Inside per-feature
//! noise of several counts per bin, that shift is a fraction of one
//! standard deviation, and window errors barely move. This example first
//! measures recall at the default intensity, then sweeps the intensity to
//! show detectability switching on only when the deviation grows large.
//!
//! Trains the default model once and reuses it for the sweep (about half
//! a minute in release).
//!
//! ```bash
//! cargo run --release --example low_deviation_blind_spot
//! ```

use bgpbs::eval::{fit_pipeline, score_scenario, ExperimentConfig};
use bgpbs::synthgen::{
    generate_benign, inject_scenario, make_scenario_suite, ScenarioKind, ScenarioSpec,
};
use bgpbs::Result;

fn main() -> Result<()> {
    let config = ExperimentConfig::default();
    let suite_config = config.suite_config();
    println!("fitting the default detection stack (seed {})...\n", config.seed);
    let suite = make_scenario_suite(&suite_config)?;
    let (fit_series, val_series) = suite
        .benign_train
        .split_chronological(config.train_fraction)?;
    let (bundle, _) = fit_pipeline(&fit_series, &val_series, &config)?;

    let default_report = score_scenario(&bundle, &suite.low_deviation)?;
    println!("=== Default intensity ===");
    println!(
        "reconstruction recall: {:.4} ({} of {} anomalous windows)",
        default_report.recon.recall.unwrap(),
        default_report.recon.counts.true_positives,
        default_report.anomalous_windows
    );

    // Rescore fresh injections at growing intensities with the same model.
    // Intensity i scales the designated count features by (1 + 0.2 * i).
    println!("\n=== Intensity sweep (same trained model) ===");
    println!("{:>9}  {:>11}  {:>7}", "intensity", "rate scale", "recall");
    let schema = suite_config.schema()?;
    let model = suite_config.benign_model(suite_config.seed);
    let length = suite_config.lengths.anomaly;
    let duration = length / 5;
    let start = (length - duration) / 2;
    let base = generate_benign(&model, length, &schema)?;
    for (step, intensity) in [1.0, 2.0, 4.0, 8.0, 16.0].into_iter().enumerate() {
        let mut spec = ScenarioSpec::new(
            ScenarioKind::LowDeviation,
            start,
            duration,
            suite_config.seed + 1 + step as u64,
        );
        spec.intensity = intensity;
        let series = inject_scenario(&base, &spec, &model)?;
        let scored = score_scenario(&bundle, &series)?;
        println!(
            "{intensity:>9}  {:>10.0}%  {:>7.4}",
            (1.0 + 0.2 * intensity) * 100.0,
            scored.recon.recall.unwrap()
        );
    }
    println!("\nThe default event sits well inside the benign error mass; only");
    println!("multiples of its deviation push windows past the threshold.");
    Ok(())
}
