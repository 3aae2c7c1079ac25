//! Run the full evaluation protocol on external CSV datasets.
//!
//! The experiment runner does not care where its data comes from: point
//! the config at a benign training CSV plus any number of named scenario
//! CSVs and the same split / fit / calibrate / score protocol applies.
//! This example fakes the "external" files by writing a generated suite
//! to disk first, which is exactly the handoff the `generate` and
//! `evaluate` subcommands use. Any CSV with a `bin_index,<features>,label`
//! header works, including 37-feature exports of public BGP datasets.
//!
//! Uses a reduced training configuration to finish quickly.
//!
//! ```bash
//! cargo run --release --example evaluate_external_csv
//! ```

use std::collections::BTreeMap;
use std::env;
use std::fs;

use bgpbs::eval::{emit_report, run_experiment, ExperimentConfig, ExternalData};
use bgpbs::synthgen::make_scenario_suite;
use bgpbs::Result;

fn main() -> Result<()> {
    let dir = env::temp_dir().join("bgpbs_external_csv");
    fs::create_dir_all(&dir)?;

    let mut config = ExperimentConfig::default();
    config.train.hidden_dim = 16;
    config.train.epochs = 30;

    println!("writing 'external' CSVs to {}", dir.display());
    let suite = make_scenario_suite(&config.suite_config())?;
    let mut scenarios = BTreeMap::new();
    for (name, series) in suite.all() {
        let path = dir.join(format!("{name}.csv"));
        series.to_csv_path(&path)?;
        if name != "benign_train" {
            scenarios.insert(name.to_string(), path);
        }
    }

    config.data = Some(ExternalData {
        train_csv: dir.join("benign_train.csv"),
        scenarios,
    });

    println!("running the protocol on the CSV files...\n");
    let report = run_experiment(&config)?;
    for (name, s) in &report.scenarios {
        println!(
            "{name:>14}: {} windows, recon recall {}, hybrid recall {}",
            s.windows,
            s.recon
                .recall
                .map(|r| format!("{r:.4}"))
                .unwrap_or_else(|| "n/a".into()),
            s.hybrid
                .recall
                .map(|r| format!("{r:.4}"))
                .unwrap_or_else(|| "n/a".into())
        );
    }

    let report_dir = dir.join("report");
    emit_report(&report, &report_dir)?;
    println!("\nreport written to {}", report_dir.display());
    for entry in fs::read_dir(&report_dir)? {
        println!("  {}", entry?.path().display());
    }
    Ok(())
}
