//! Command-line front end for the detection pipeline.
//!
//! Exit codes: 0 success, 1 invalid input or config, 2 I/O error,
//! 3 training diverged.

use std::env;
use std::fs;
use std::path::PathBuf;
use std::process;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use bgpbs::dataset::FeatureSeries;
use bgpbs::error::{Error, Result};
use bgpbs::eval::{
    emit_report, fit_pipeline, run_experiment, scores_to_csv, score_scenario, EvalMetrics,
    ExperimentConfig, ModelBundle,
};
use bgpbs::synthgen::make_scenario_suite;

#[derive(Parser)]
#[command(
    name = "bgpbs",
    version,
    about = "Hybrid BGP anomaly detection: LSTM autoencoder plus signal-loss heartbeat"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the five-scenario synthetic suite as CSV files.
    Generate {
        /// Experiment config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for the scenario CSVs (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed (precedence: flag, then BGPBS_SEED, then config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the full detection stack on benign CSVs and persist it.
    Train {
        /// Experiment config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Benign training series CSV.
        #[arg(long)]
        train: PathBuf,
        /// Benign validation series CSV for threshold calibration.
        #[arg(long)]
        val: PathBuf,
        /// Window length override.
        #[arg(long)]
        window: Option<usize>,
        /// Window stride override.
        #[arg(long)]
        stride: Option<usize>,
        /// Override the config seed (precedence: flag, then BGPBS_SEED, then config).
        #[arg(long)]
        seed: Option<u64>,
        /// Output path for the fitted model bundle JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score one series with a fitted model bundle.
    Score {
        /// Model bundle JSON produced by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Series CSV to score.
        #[arg(long)]
        data: PathBuf,
        /// Output CSV of per-window scores.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full experiment and emit the detection report.
    Evaluate {
        /// Experiment config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed (precedence: flag, then BGPBS_SEED, then config).
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            process::exit(code);
        }
    };
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        process::exit(err.exit_code());
    }
}

fn load_config(path: Option<&PathBuf>, seed_flag: Option<u64>) -> Result<ExperimentConfig> {
    let mut config = match path {
        Some(path) => ExperimentConfig::from_json_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = resolve_seed_override(seed_flag)? {
        config.seed = seed;
    }
    Ok(config)
}

fn resolve_seed_override(flag: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match env::var("BGPBS_SEED") {
        Ok(value) => value.trim().parse().map(Some).map_err(|_| {
            Error::InvalidInput(format!(
                "BGPBS_SEED must be an unsigned 64-bit integer, got '{value}'"
            ))
        }),
        Err(env::VarError::NotPresent) => Ok(None),
        Err(env::VarError::NotUnicode(_)) => {
            Err(Error::InvalidInput("BGPBS_SEED is not valid UTF-8".into()))
        }
    }
}

fn fmt_rate(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.4}"),
        None => "n/a".into(),
    }
}

fn fmt_metrics(m: &EvalMetrics) -> String {
    format!(
        "recall {} | fpr {}",
        fmt_rate(m.recall),
        fmt_rate(m.false_positive_rate)
    )
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate { config, out, seed } => {
            let config = load_config(config.as_ref(), seed)?;
            let suite = make_scenario_suite(&config.suite_config())?;
            fs::create_dir_all(&out)?;
            for (name, series) in suite.all() {
                let path = out.join(format!("{name}.csv"));
                series.to_csv_path(&path)?;
                println!("wrote {} ({} bins)", path.display(), series.len());
            }
        }
        Command::Train {
            config,
            train,
            val,
            window,
            stride,
            seed,
            out,
        } => {
            let mut config = load_config(config.as_ref(), seed)?;
            if let Some(window) = window {
                config.window = window;
            }
            if let Some(stride) = stride {
                config.stride = stride;
            }
            let fit_series = FeatureSeries::from_csv_path(&train, None)?;
            let val_series = FeatureSeries::from_csv_path(&val, Some(fit_series.schema()))?;
            let (bundle, report) = fit_pipeline(&fit_series, &val_series, &config)?;
            bundle.save(&out)?;
            println!(
                "trained on {} windows, validated on {}; threshold {:.6} (p{} of {} errors)",
                report.windows_trained,
                report.windows_validated,
                bundle.threshold.value,
                bundle.threshold.percentile,
                bundle.threshold.n_calibration
            );
            println!("wrote {}", out.display());
        }
        Command::Score { model, data, out } => {
            let bundle = ModelBundle::load(&model)?;
            let series = FeatureSeries::from_csv_path(&data, None)?;
            let report = score_scenario(&bundle, &series)?;
            fs::write(&out, scores_to_csv(&report.scores))?;
            let flagged = report.scores.iter().filter(|s| s.flagged).count();
            println!(
                "scored {} windows ({} flagged, {} heartbeat alert bins); wrote {}",
                report.windows,
                flagged,
                report.alerting_bins,
                out.display()
            );
        }
        Command::Evaluate { config, out, seed } => {
            let config = load_config(config.as_ref(), seed)?;
            let report = run_experiment(&config)?;
            emit_report(&report, &out)?;
            println!(
                "threshold {:.6} (p{} of {} validation errors)",
                report.threshold.value, report.threshold.percentile, report.threshold.n_calibration
            );
            for (name, scenario) in &report.scenarios {
                println!(
                    "{name}: recon {} | heartbeat {} | hybrid {}",
                    fmt_metrics(&scenario.recon),
                    fmt_metrics(&scenario.heartbeat),
                    fmt_metrics(&scenario.hybrid)
                );
            }
            println!("wrote report to {}", out.display());
        }
    }
    Ok(())
}
