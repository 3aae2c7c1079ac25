//! Black-box tests of the `bgpbs` binary: subcommand plumbing, seed
//! precedence, and the exit-code contract (0 success, 1 invalid input,
//! 2 I/O error, 3 training diverged).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bgpbs::dataset::FeatureSeries;
use tempfile::TempDir;

/// Config small enough that a full train finishes in about a second.
const SMALL_CONFIG: &str = r#"{
    "seed": 5,
    "suite": {"lengths": {"train": 300, "test": 200, "anomaly": 240}},
    "train": {"hidden_dim": 4, "epochs": 2}
}"#;

fn bgpbs() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bgpbs"));
    // Isolate tests from any ambient seed override.
    cmd.env_remove("BGPBS_SEED");
    cmd
}

fn run_ok(cmd: &mut Command) -> Output {
    let output = cmd.output().expect("binary should spawn");
    assert!(
        output.status.success(),
        "expected success, got {:?}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output()
        .expect("binary should spawn")
        .status
        .code()
        .expect("binary should not be killed by a signal")
}

fn write_small_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, SMALL_CONFIG).unwrap();
    path
}

fn generate_suite(dir: &Path, config: &Path) -> PathBuf {
    let out = dir.join("suite");
    run_ok(bgpbs().args([
        "generate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    out
}

#[test]
fn generate_writes_reloadable_suite() {
    let dir = TempDir::new().unwrap();
    let config = write_small_config(dir.path());
    let suite = generate_suite(dir.path(), &config);

    for (name, bins) in [
        ("benign_train", 300),
        ("benign_test", 200),
        ("storm", 240),
        ("signal_loss", 240),
        ("low_deviation", 240),
    ] {
        let series = FeatureSeries::from_csv_path(suite.join(format!("{name}.csv")), None)
            .unwrap_or_else(|e| panic!("{name} should reload: {e}"));
        assert_eq!(series.len(), bins, "{name}");
        assert_eq!(series.schema().dimension(), 8, "{name}");
    }
}

#[test]
fn seed_precedence_is_flag_then_env_then_config() {
    let dir = TempDir::new().unwrap();
    let config = write_small_config(dir.path());
    let storm = |out: &Path| fs::read(out.join("storm.csv")).unwrap();

    let config_run = generate_suite(dir.path(), &config);

    let rerun = dir.path().join("rerun");
    run_ok(bgpbs().args([
        "generate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        rerun.to_str().unwrap(),
    ]));
    assert_eq!(
        storm(&config_run),
        storm(&rerun),
        "same config seed must reproduce identical bytes"
    );

    let env_run = dir.path().join("env");
    run_ok(bgpbs()
        .env("BGPBS_SEED", "99")
        .args([
            "generate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            env_run.to_str().unwrap(),
        ]));
    assert_ne!(
        storm(&config_run),
        storm(&env_run),
        "BGPBS_SEED must override the config seed"
    );

    let flag_run = dir.path().join("flag");
    run_ok(bgpbs()
        .env("BGPBS_SEED", "99")
        .args([
            "generate",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "5",
            "--out",
            flag_run.to_str().unwrap(),
        ]));
    assert_eq!(
        storm(&config_run),
        storm(&flag_run),
        "--seed must override BGPBS_SEED"
    );
}

#[test]
fn train_then_score_round_trip() {
    let dir = TempDir::new().unwrap();
    let config = write_small_config(dir.path());
    let suite = generate_suite(dir.path(), &config);
    let model = dir.path().join("model.json");

    run_ok(bgpbs().args([
        "train",
        "--config",
        config.to_str().unwrap(),
        "--train",
        suite.join("benign_train.csv").to_str().unwrap(),
        "--val",
        suite.join("benign_test.csv").to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]));
    assert!(model.exists());

    let scores = dir.path().join("scores.csv");
    run_ok(bgpbs().args([
        "score",
        "--model",
        model.to_str().unwrap(),
        "--data",
        suite.join("storm.csv").to_str().unwrap(),
        "--out",
        scores.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&scores).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("start_bin,error,flagged,label"));
    // 240 bins, window 8, stride 1.
    assert_eq!(lines.count(), 233);
}

#[test]
fn train_honors_window_and_stride_flags() {
    let dir = TempDir::new().unwrap();
    let config = write_small_config(dir.path());
    let suite = generate_suite(dir.path(), &config);
    let model = dir.path().join("model.json");

    run_ok(bgpbs().args([
        "train",
        "--config",
        config.to_str().unwrap(),
        "--train",
        suite.join("benign_train.csv").to_str().unwrap(),
        "--val",
        suite.join("benign_test.csv").to_str().unwrap(),
        "--window",
        "4",
        "--stride",
        "2",
        "--out",
        model.to_str().unwrap(),
    ]));

    let scores = dir.path().join("scores.csv");
    run_ok(bgpbs().args([
        "score",
        "--model",
        model.to_str().unwrap(),
        "--data",
        suite.join("storm.csv").to_str().unwrap(),
        "--out",
        scores.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&scores).unwrap();
    // floor((240 - 4) / 2) + 1 windows.
    assert_eq!(text.lines().count() - 1, 119);
}

#[test]
fn evaluate_writes_the_report_files() {
    let dir = TempDir::new().unwrap();
    let config = write_small_config(dir.path());
    let out = dir.path().join("report");
    run_ok(bgpbs().args([
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));

    for file in [
        "report.json",
        "metrics.csv",
        "errors_benign_test.csv",
        "errors_storm.csv",
        "errors_signal_loss.csv",
        "errors_low_deviation.csv",
    ] {
        assert!(out.join(file).exists(), "missing {file}");
    }
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    // Header plus four scenarios times three detectors.
    assert_eq!(metrics.lines().count(), 1 + 4 * 3);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(exit_code(bgpbs().arg("--help")), 0);
    assert_eq!(exit_code(bgpbs().arg("--version")), 0);
    assert_eq!(exit_code(bgpbs().args(["evaluate", "--help"])), 0);
}

#[test]
fn usage_and_config_errors_exit_one() {
    let dir = TempDir::new().unwrap();

    assert_eq!(exit_code(bgpbs().arg("bogus")), 1, "unknown subcommand");
    assert_eq!(exit_code(&mut bgpbs()), 1, "missing subcommand");

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"windw": 8}"#).unwrap();
    assert_eq!(
        exit_code(bgpbs().args([
            "evaluate",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            dir.path().join("r").to_str().unwrap(),
        ])),
        1,
        "unknown config key"
    );

    assert_eq!(
        exit_code(bgpbs().env("BGPBS_SEED", "not-a-number").args([
            "generate",
            "--out",
            dir.path().join("s").to_str().unwrap(),
        ])),
        1,
        "unparseable BGPBS_SEED"
    );
}

#[test]
fn contaminated_training_data_exits_one() {
    let dir = TempDir::new().unwrap();
    let config = write_small_config(dir.path());
    let suite = generate_suite(dir.path(), &config);

    // The storm series contains anomalous rows; fitting on it must refuse.
    assert_eq!(
        exit_code(bgpbs().args([
            "train",
            "--config",
            config.to_str().unwrap(),
            "--train",
            suite.join("storm.csv").to_str().unwrap(),
            "--val",
            suite.join("benign_test.csv").to_str().unwrap(),
            "--out",
            dir.path().join("model.json").to_str().unwrap(),
        ])),
        1
    );
}

#[test]
fn missing_files_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        exit_code(bgpbs().args([
            "score",
            "--model",
            dir.path().join("absent.json").to_str().unwrap(),
            "--data",
            dir.path().join("absent.csv").to_str().unwrap(),
            "--out",
            dir.path().join("scores.csv").to_str().unwrap(),
        ])),
        2
    );
    assert_eq!(
        exit_code(bgpbs().args([
            "evaluate",
            "--config",
            dir.path().join("absent.json").to_str().unwrap(),
            "--out",
            dir.path().join("r").to_str().unwrap(),
        ])),
        2
    );
}

#[test]
fn diverged_training_exits_three() {
    let dir = TempDir::new().unwrap();
    let config = write_small_config(dir.path());
    let suite = generate_suite(dir.path(), &config);

    let diverging = dir.path().join("diverging.json");
    fs::write(
        &diverging,
        r#"{"seed": 5, "train": {"hidden_dim": 4, "epochs": 3, "learning_rate": 1e308}}"#,
    )
    .unwrap();
    assert_eq!(
        exit_code(bgpbs().args([
            "train",
            "--config",
            diverging.to_str().unwrap(),
            "--train",
            suite.join("benign_train.csv").to_str().unwrap(),
            "--val",
            suite.join("benign_test.csv").to_str().unwrap(),
            "--out",
            dir.path().join("model.json").to_str().unwrap(),
        ])),
        3
    );
}
