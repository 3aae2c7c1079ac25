//! Blind spot one: a total signal loss scores as unusually NORMAL.
//!
//! When a session collapse zeroes every feature, the standardized input
//! becomes a flat, noiseless sequence. An autoencoder trained to absorb
//! benign churn reconstructs flat sequences almost perfectly, so the
//! reconstruction error of blackout windows drops BELOW the benign
//! median. A threshold on high error can never flag them, at any
//! percentile: recall is exactly zero while the outage is total.
//!
//! Runs the full default experiment (about half a minute in release).
//!
//! ```bash
//! cargo run --release --example signal_loss_blind_spot
//! ```

use bgpbs::eval::{run_experiment, ExperimentConfig};
use bgpbs::Result;

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn main() -> Result<()> {
    let config = ExperimentConfig::default();
    println!("running the default experiment (seed {})...\n", config.seed);
    let report = run_experiment(&config)?;
    let scenario = &report.scenarios["signal_loss"];

    println!("=== Signal-loss scenario ===");
    println!(
        "{} windows scored, {} overlap the blackout",
        scenario.windows, scenario.anomalous_windows
    );
    println!(
        "reconstruction recall: {:.4} ({} of {} blackout windows flagged)",
        scenario.recon.recall.unwrap(),
        scenario.recon.counts.true_positives,
        scenario.anomalous_windows
    );

    let benign: Vec<f64> = scenario
        .scores
        .iter()
        .filter(|s| !s.true_label.is_anomalous())
        .map(|s| s.error)
        .collect();
    let anomalous: Vec<f64> = scenario
        .scores
        .iter()
        .filter(|s| s.true_label.is_anomalous())
        .map(|s| s.error)
        .collect();
    let benign_median = median(benign);
    let anomalous_median = median(anomalous);

    println!("\n=== Why the detector is blind ===");
    println!("median benign window error:   {benign_median:.4}");
    println!("median blackout window error: {anomalous_median:.4}");
    println!("threshold (p99 of benign):    {:.4}", report.threshold.value);
    assert!(anomalous_median < benign_median);
    println!(
        "\nBlackout windows reconstruct {:.0}% better than typical benign windows,",
        (1.0 - anomalous_median / benign_median) * 100.0
    );
    println!("so raising or lowering the threshold cannot recover them; the miss is");
    println!("structural. The hybrid_detection example shows the remedy.");
    Ok(())
}
