//! Positive control: the reconstruction detector catches an update storm.
//!
//! A storm floods every count feature with overdispersed bursts and
//! inflates the path statistics. Windows overlapping it reconstruct
//! terribly, so their errors sit far above the benign error mass and the
//! calibrated threshold. This validates the instrument before the blind
//! spot examples probe where it fails.
//!
//! Runs the full default experiment (about half a minute in release).
//!
//! ```bash
//! cargo run --release --example storm_positive_control
//! ```

use bgpbs::eval::{run_experiment, ExperimentConfig};
use bgpbs::Result;

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn main() -> Result<()> {
    let config = ExperimentConfig::default();
    println!("running the default experiment (seed {})...\n", config.seed);
    let report = run_experiment(&config)?;
    let storm = &report.scenarios["storm"];

    println!("=== Storm scenario ===");
    println!(
        "{} windows scored, {} overlap the injected storm",
        storm.windows, storm.anomalous_windows
    );
    println!(
        "reconstruction recall: {:.4} (threshold {:.4})",
        storm.recon.recall.unwrap(),
        report.threshold.value
    );

    let mut benign: Vec<f64> = storm
        .scores
        .iter()
        .filter(|s| !s.true_label.is_anomalous())
        .map(|s| s.error)
        .collect();
    benign.sort_by(f64::total_cmp);
    let mut anomalous: Vec<f64> = storm
        .scores
        .iter()
        .filter(|s| s.true_label.is_anomalous())
        .map(|s| s.error)
        .collect();
    anomalous.sort_by(f64::total_cmp);

    println!("\n=== Error separation ===");
    println!(
        "benign windows:    median {:.4}, p90 {:.4}, max {:.4}",
        percentile(&benign, 50.0),
        percentile(&benign, 90.0),
        benign.last().unwrap()
    );
    println!(
        "storm windows:     min {:.4}, median {:.4}, max {:.4}",
        anomalous.first().unwrap(),
        percentile(&anomalous, 50.0),
        anomalous.last().unwrap()
    );
    println!(
        "the weakest storm window scores {:.1}x the benign p90",
        anomalous.first().unwrap() / percentile(&benign, 90.0)
    );

    // The two histogram populations share bin edges, so a disjoint support
    // shows up as benign mass confined to the first bins.
    let h = &storm.histogram;
    let benign_top_bin = h.benign.iter().rposition(|&c| c > 0).unwrap();
    let anomalous_low_bin = h.anomalous.iter().position(|&c| c > 0).unwrap();
    println!("\n=== Histogram ({} bins over [0, {:.2}]) ===", h.benign.len(), h.edges.last().unwrap());
    println!(
        "benign mass ends in bin {benign_top_bin}; storm mass starts in bin {anomalous_low_bin}"
    );
    Ok(())
}
