//! Generate the five-scenario synthetic suite and write it out as CSVs.
//!
//! The suite is the test bench for the whole toolkit: two benign series
//! (one to fit on, one to score as a control) and three single-anomaly
//! series, each carrying one injected signature in the middle fifth of its
//! timeline. Everything is derived from one seed, so rerunning this
//! example reproduces the same bytes.
//!
//! ```bash
//! cargo run --release --example generate_suite
//! ```

use std::env;
use std::fs;

use bgpbs::synthgen::{make_scenario_suite, SuiteConfig};
use bgpbs::Result;

fn main() -> Result<()> {
    let config = SuiteConfig::default();
    let suite = make_scenario_suite(&config)?;

    println!("=== Synthetic scenario suite (seed {}) ===\n", config.seed);
    println!(
        "{} features per bin, {}s bins, diurnal amplitude {}",
        suite.schema.dimension(),
        config.bin_width_seconds,
        config.diurnal_amplitude
    );
    println!("features: {}\n", suite.schema.feature_names.join(", "));

    for (name, series) in suite.all() {
        let anomalous: Vec<u64> = series
            .records()
            .iter()
            .filter(|r| r.label.is_anomalous())
            .map(|r| r.bin_index)
            .collect();
        let span = match (anomalous.first(), anomalous.last()) {
            (Some(first), Some(last)) => format!("bins {first}..={last}"),
            _ => "none".into(),
        };
        // Mean announcement volume separates the three signatures at a glance.
        let mean_announcements: f64 = series
            .records()
            .iter()
            .map(|r| r.values[0])
            .sum::<f64>()
            / series.len() as f64;
        println!(
            "{name:>14}: {:>5} bins, {:>4} anomalous ({span}), mean announcements {mean_announcements:.2}",
            series.len(),
            anomalous.len()
        );
    }

    let out_dir = env::temp_dir().join("bgpbs_suite");
    fs::create_dir_all(&out_dir)?;
    println!();
    for (name, series) in suite.all() {
        let path = out_dir.join(format!("{name}.csv"));
        series.to_csv_path(&path)?;
        println!("wrote {}", path.display());
    }
    println!("\nThese CSVs load back with FeatureSeries::from_csv_path and feed");
    println!("the `bgpbs train / score / evaluate` subcommands directly.");
    Ok(())
}
