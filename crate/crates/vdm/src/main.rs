//! Thin command-line driver over [`vdm::pipeline`].

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vdm::compare::Scenario;
use vdm::gof::UntestablePolicy;
use vdm::ingest::{DataSetId, RecordFormat};
use vdm::models::ModelId;
use vdm::pipeline::{
    cmd_compare, cmd_fit, cmd_ingest, cmd_predict, cmd_quality, PipelineError, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "vdm",
    version,
    about = "Fit vulnerability discovery models and evaluate their quality and predictability"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory holding the stores and reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Inconclusiveness contribution factor ω in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    omega: f64,
    /// Moving-average window (odd).
    #[arg(long, default_value_t = 5)]
    window: u32,
    /// Minimum horizon in months.
    #[arg(long, default_value_t = 6)]
    tau_min: u32,
    /// Largest horizon included in the analysis reports.
    #[arg(long, default_value_t = 72)]
    tau_max_cap: u32,
    /// How untestable χ² outcomes are counted: notfit or exclude.
    #[arg(long, default_value = "notfit")]
    untestable: UntestablePolicy,
    /// Models to include (comma-separated; default all eight).
    #[arg(long, value_delimiter = ',')]
    models: Vec<ModelId>,
}

#[derive(Subcommand)]
enum Command {
    /// Load records, build data sets, and extract the sample store.
    Ingest {
        #[command(flatten)]
        common: CommonArgs,
        /// Record file (CSV or JSON).
        #[arg(long)]
        records: PathBuf,
        /// Record file format; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<RecordFormat>,
        /// Release manifest (CSV: release,date,product,version).
        #[arg(long)]
        manifest: PathBuf,
        /// Data sets to build (comma-separated; default all five).
        #[arg(long, value_delimiter = ',')]
        datasets: Vec<DataSetId>,
        /// End of the data collection period (ISO date). Defaults to the
        /// latest record date.
        #[arg(long)]
        collection_date: Option<chrono::NaiveDate>,
    },
    /// Fit every selected model to every stored sample.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// Seed for the fitter's multistart jitter.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads for parallel fitting (0 = default pool).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Evaluate curves with the χ² test and write the quality reports.
    Quality {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate frozen curves on future samples and write predictability
    /// series.
    Predict {
        #[command(flatten)]
        common: CommonArgs,
        /// Prediction time spans Δ (comma-separated; default 3,6,12,24).
        #[arg(long, value_delimiter = ',')]
        delta: Vec<u32>,
    },
    /// Run the per-scenario model tournament and emit the better-than graph.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Scenarios to compare under (default: all four presets).
        #[arg(long, value_delimiter = ',')]
        scenario: Vec<Scenario>,
    },
}

fn base_config(common: &CommonArgs) -> RunConfig {
    let mut config = RunConfig {
        out: common.out.clone(),
        omega: common.omega,
        window: common.window,
        tau_min: common.tau_min,
        tau_max_cap: common.tau_max_cap,
        untestable: common.untestable,
        ..RunConfig::default()
    };
    if !common.models.is_empty() {
        config.models = common.models.clone();
    }
    config
}

fn run() -> Result<(), PipelineError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest {
            common,
            records,
            format,
            manifest,
            datasets,
            collection_date,
        } => {
            let mut config = base_config(&common);
            config.records = Some(records);
            config.records_format = format;
            config.manifest = Some(manifest);
            config.collection_date = collection_date;
            if !datasets.is_empty() {
                config.datasets = datasets;
            }
            let summary = cmd_ingest(&config)?;
            for warning in &summary.warnings {
                eprintln!("warning: {warning}");
            }
            for skipped in &summary.skipped {
                eprintln!("warning: skipped {}: {}", skipped.release, skipped.reason);
            }
            if let Some(date) = summary.collection_date {
                println!("collection date: {date}");
            }
            println!("loaded {} records", summary.records);
            for (release, tau_max) in &summary.release_horizons {
                println!("  {release}: tau_max = {tau_max}");
            }
            println!(
                "wrote {} samples to {}",
                summary.sample_count,
                config.out.join("samples.csv").display()
            );
        }
        Command::Fit {
            common,
            seed,
            workers,
        } => {
            let mut config = base_config(&common);
            config.seed = seed;
            config.workers = workers;
            let summary = cmd_fit(&config)?;
            println!(
                "fitted {} curves over {} samples ({} failures, {} not converged)",
                summary.curves, summary.samples, summary.failures, summary.non_converged
            );
            println!("wrote {}", config.out.join("curves.csv").display());
        }
        Command::Quality { common } => {
            let config = base_config(&common);
            let summary = cmd_quality(&config)?;
            for note in &summary.notes {
                eprintln!("note: {note}");
            }
            println!("evaluated {} curves", summary.evaluated);
            for (model, q) in &summary.overall {
                println!("  {model}: overall quality {q:.4}");
            }
            println!("reports written to {}", config.out.display());
        }
        Command::Predict { common, delta } => {
            let mut config = base_config(&common);
            config.deltas = delta;
            let summary = cmd_predict(&config)?;
            println!(
                "wrote {} predictability series ({} factor rows, {} horizon points skipped)",
                summary.series_files, summary.factor_rows, summary.skipped_points
            );
        }
        Command::Compare { common, scenario } => {
            let mut config = base_config(&common);
            config.scenarios = scenario;
            let summary = cmd_compare(&config)?;
            for note in &summary.notes {
                eprintln!("note: {note}");
            }
            for outcome in &summary.scenarios {
                let best = if outcome.best.is_empty() {
                    "none".to_string()
                } else {
                    outcome
                        .best
                        .iter()
                        .map(|m| m.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                };
                println!(
                    "{}: {} models, {} edges, alpha_effective = {}, best: {best}",
                    outcome.scenario,
                    outcome.models.len(),
                    outcome.edges,
                    outcome.alpha_effective
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
