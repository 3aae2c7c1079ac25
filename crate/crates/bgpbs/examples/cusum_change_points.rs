//! Downward CUSUM change points on update-volume sequences.
//!
//! The heartbeat flags sustained silence bin by bin; the CUSUM statistic
//! instead accumulates evidence of a mean DROP and timestamps the change.
//! This example runs the recurrence on a hand-built drop (small enough to
//! verify by hand) and then on a generated blackout scenario, reporting
//! the detection delay after onset. No training involved, so it runs
//! instantly.
//!
//! ```bash
//! cargo run --release --example cusum_change_points
//! ```

use bgpbs::detectors::{cusum_downward, HeartbeatDetector};
use bgpbs::synthgen::{make_scenario_suite, SuiteConfig};
use bgpbs::Result;

fn main() -> Result<()> {
    println!("=== Hand-checkable drop ===");
    // Volume holds at 100 and falls to zero at bin 50. With slack 10 the
    // statistic gains 90 per silent bin, so it crosses a decision bound of
    // 150 on the second silent bin.
    let mut volumes = vec![100.0; 50];
    volumes.extend(vec![0.0; 10]);
    let detections = cusum_downward(&volumes, 100.0, 10.0, 150.0)?;
    println!("volumes: 50 bins at 100, then 10 bins at 0");
    println!("detections (slack 10, bound 150): {detections:?}");
    assert_eq!(detections.first(), Some(&51));

    println!("\n=== Generated blackout ===");
    let config = SuiteConfig::default();
    let suite = make_scenario_suite(&config)?;
    let onset = suite
        .signal_loss
        .records()
        .iter()
        .find(|r| r.label.is_anomalous())
        .map(|r| r.bin_index)
        .unwrap();

    // Baseline statistics come from benign data only; the scenario series
    // is never touched during fitting.
    let heartbeat = HeartbeatDetector::fit(&suite.benign_train, &[0, 1], 3.0, 3)?;
    let volumes = heartbeat.volumes(&suite.signal_loss)?;
    let slack = heartbeat.std;
    let bound = 8.0 * heartbeat.std;
    let detections = cusum_downward(&volumes, heartbeat.mean, slack, bound)?;

    println!(
        "benign volume: mean {:.2}, std {:.2}; blackout onset at bin {onset}",
        heartbeat.mean, heartbeat.std
    );
    match detections.iter().find(|&&t| t as u64 >= onset) {
        Some(&t) => println!(
            "first change point at bin {t}, {} bins after onset",
            t as u64 - onset
        ),
        None => println!("no change point found"),
    }
    println!(
        "{} change points total: the statistic resets after each detection and",
        detections.len()
    );
    println!("immediately re-accumulates while the silence lasts.");

    let benign_detections = cusum_downward(
        &heartbeat.volumes(&suite.benign_test)?,
        heartbeat.mean,
        slack,
        bound,
    )?;
    println!(
        "\nbenign control: {} change points over {} bins",
        benign_detections.len(),
        suite.benign_test.len()
    );
    Ok(())
}
