//! Fit the detection stack on benign data, persist it, reload it, and
//! score held-out series with the reloaded bundle.
//!
//! This walks the library path behind the `train` and `score`
//! subcommands: chronological split, standardizer and heartbeat fitting,
//! autoencoder training, threshold calibration, JSON persistence, and
//! per-window scoring. A reduced configuration (short series, small
//! hidden state, few epochs) keeps the run under a minute; the other
//! examples use the full defaults.
//!
//! ```bash
//! cargo run --release --example train_and_score
//! ```

use std::env;
use std::fs;

use bgpbs::eval::{fit_pipeline, score_scenario, ExperimentConfig, ModelBundle};
use bgpbs::synthgen::{make_scenario_suite, SuiteConfig};
use bgpbs::Result;

fn main() -> Result<()> {
    let mut config = ExperimentConfig {
        suite: SuiteConfig {
            lengths: bgpbs::synthgen::SuiteLengths {
                train: 2880,
                test: 1440,
                anomaly: 1500,
            },
            ..SuiteConfig::default()
        },
        ..ExperimentConfig::default()
    };
    config.train.hidden_dim = 16;
    config.train.epochs = 30;

    println!("=== Fit ===");
    let suite = make_scenario_suite(&config.suite_config())?;
    let (fit_series, val_series) = suite
        .benign_train
        .split_chronological(config.train_fraction)?;
    let (bundle, report) = fit_pipeline(&fit_series, &val_series, &config)?;
    println!(
        "trained {} epochs on {} windows (loss {:.4} -> {:.4})",
        report.epoch_losses.len(),
        report.windows_trained,
        report.epoch_losses.first().unwrap(),
        report.epoch_losses.last().unwrap()
    );
    println!(
        "threshold {:.4} = p{} of {} validation errors",
        bundle.threshold.value, bundle.threshold.percentile, bundle.threshold.n_calibration
    );
    println!(
        "heartbeat floor {:.2} (volume mean {:.2}, std {:.2})",
        bundle.heartbeat.limit(),
        bundle.heartbeat.mean,
        bundle.heartbeat.std
    );

    println!("\n=== Persist and reload ===");
    let model_path = env::temp_dir().join("bgpbs_train_and_score_model.json");
    bundle.save(&model_path)?;
    let reloaded = ModelBundle::load(&model_path)?;
    assert_eq!(reloaded, bundle);
    println!(
        "wrote {} ({} bytes); reloaded bundle is identical",
        model_path.display(),
        fs::metadata(&model_path)?.len()
    );

    println!("\n=== Score held-out series ===");
    for (name, series) in [("benign_test", &suite.benign_test), ("storm", &suite.storm)] {
        let scored = score_scenario(&reloaded, series)?;
        let flagged = scored.scores.iter().filter(|s| s.flagged).count();
        println!(
            "{name:>12}: {} windows, {} flagged, recon recall {}",
            scored.windows,
            flagged,
            scored
                .recon
                .recall
                .map(|r| format!("{r:.4}"))
                .unwrap_or_else(|| "n/a (no anomalous windows)".into())
        );
    }
    Ok(())
}
