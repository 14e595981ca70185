//! Batch pipeline: the five evaluation steps as reproducible commands with
//! persisted intermediate stores.
//!
//! `ingest` builds the sample store from record and manifest files, `fit`
//! the curve store, `quality` the evaluated store plus quality reports,
//! `predict` the predictability series, and `compare` the per-scenario
//! better-than graphs. Every report is recomputable from the stores, and
//! re-running a command on unchanged inputs with the same seed writes
//! byte-identical files.

pub mod store;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use thiserror::Error;

use crate::compare::{
    build_graph, ModelSeries, Scenario, DEFAULT_ALPHA,
};
use crate::fit::{fit_all, FitConfig, FitError, FittedCurve};
use crate::gof::{evaluate_sample, EvaluatedSample, GofOutcome, UntestablePolicy};
use crate::ingest::{
    enumerate_samples, load_manifest, load_records, DataSetId, IngestError, RecordFormat,
    SampleSet, SkippedRelease, TAU_MIN,
};
use crate::models::ModelId;
use crate::predict::{geometric_mean, prediction_quality, PredictionQuality};
use crate::quality::{
    moving_average, overall_quality, quality_by_period, temporal_quality_series, Period,
    QualitySeries, DEFAULT_OMEGA, DEFAULT_WINDOW,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input error: {0}")]
    Input(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("store {path} is unreadable: {message}")]
    Store { path: String, message: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("fit configuration: {0}")]
    FitConfig(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl PipelineError {
    /// Process exit code: 1 for input problems, 2 for internal invariant
    /// violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Internal(_) => 2,
            _ => 1,
        }
    }
}

impl From<FitError> for PipelineError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::Config(msg) => PipelineError::FitConfig(msg),
            other => PipelineError::Internal(other.to_string()),
        }
    }
}

/// Configuration of a pipeline run; one struct serves all five commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub records: Option<PathBuf>,
    pub records_format: Option<RecordFormat>,
    pub manifest: Option<PathBuf>,
    pub datasets: Vec<DataSetId>,
    pub models: Vec<ModelId>,
    pub omega: f64,
    pub window: u32,
    pub scenarios: Vec<Scenario>,
    pub tau_min: u32,
    pub tau_max_cap: u32,
    /// Prediction time spans; defaults to 3, 6, 12, 24 when empty.
    pub deltas: Vec<u32>,
    pub seed: u64,
    pub out: PathBuf,
    /// 0 uses the default thread pool.
    pub workers: usize,
    /// End of the data collection period; defaults to the latest record date.
    pub collection_date: Option<NaiveDate>,
    pub untestable: UntestablePolicy,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            records: None,
            records_format: None,
            manifest: None,
            datasets: DataSetId::ALL.to_vec(),
            models: ModelId::ALL.to_vec(),
            omega: DEFAULT_OMEGA,
            window: DEFAULT_WINDOW,
            scenarios: Vec::new(),
            tau_min: TAU_MIN,
            tau_max_cap: 72,
            deltas: Vec::new(),
            seed: 0,
            out: PathBuf::from("out"),
            workers: 0,
            collection_date: None,
            untestable: UntestablePolicy::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(PipelineError::Input(format!(
                "omega must lie in [0, 1], got {}",
                self.omega
            )));
        }
        if self.window == 0 || self.window % 2 == 0 {
            return Err(PipelineError::Input(format!(
                "window must be odd, got {}",
                self.window
            )));
        }
        if self.tau_min < TAU_MIN {
            return Err(PipelineError::Input(format!(
                "tau-min must be at least {TAU_MIN}, got {}",
                self.tau_min
            )));
        }
        if self.tau_max_cap < self.tau_min {
            return Err(PipelineError::Input(
                "tau-max-cap must not be below tau-min".to_string(),
            ));
        }
        if self.models.is_empty() {
            return Err(PipelineError::Input("no models selected".to_string()));
        }
        if self.datasets.is_empty() {
            return Err(PipelineError::Input("no data sets selected".to_string()));
        }
        Ok(())
    }

    fn deltas(&self) -> Vec<u32> {
        if self.deltas.is_empty() {
            vec![3, 6, 12, 24]
        } else {
            self.deltas.clone()
        }
    }

    fn scenarios(&self) -> Vec<Scenario> {
        if self.scenarios.is_empty() {
            Scenario::ALL.to_vec()
        } else {
            self.scenarios.clone()
        }
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn create_out_dir(config: &RunConfig) -> Result<(), PipelineError> {
    std::fs::create_dir_all(&config.out).map_err(|e| PipelineError::Io {
        path: config.out.display().to_string(),
        source: e,
    })
}

fn report_writer(path: &Path, header: &str) -> Result<BufWriter<File>, PipelineError> {
    let file = File::create(path).map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut buf = BufWriter::new(file);
    writeln!(buf, "# {header}").map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(buf)
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<(), PipelineError> {
    w.flush().map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn join<T: ToString>(items: &[T], separator: &str) -> String {
    items
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(separator)
}

// Echo of the effective configuration; commands write it next to their
// outputs so every report names the inputs it came from.
fn write_run_manifest(config: &RunConfig, command: &str) -> Result<(), PipelineError> {
    let path = config.out_path(&format!("manifest_{command}.txt"));
    let mut w = report_writer(&path, "vdm-run-manifest version=1")?;
    let datasets: Vec<&str> = config.datasets.iter().map(|d| d.name()).collect();
    let models: Vec<&str> = config.models.iter().map(|m| m.name()).collect();
    let scenarios: Vec<&str> = config.scenarios().iter().map(|s| s.name()).collect();
    let lines = [
        format!("command={command}"),
        format!("records={}", config.records.as_deref().map(|p| p.display().to_string()).unwrap_or_default()),
        format!("manifest={}", config.manifest.as_deref().map(|p| p.display().to_string()).unwrap_or_default()),
        format!("datasets={}", datasets.join(",")),
        format!("models={}", models.join(",")),
        format!("omega={}", config.omega),
        format!("window={}", config.window),
        format!("scenarios={}", scenarios.join(",")),
        format!("tau_min={}", config.tau_min),
        format!("tau_max_cap={}", config.tau_max_cap),
        format!("deltas={}", join(&config.deltas(), ",")),
        format!("seed={}", config.seed),
        format!("workers={}", config.workers),
        format!(
            "collection_date={}",
            config.collection_date.map(|d| d.to_string()).unwrap_or_default()
        ),
        format!(
            "untestable={}",
            match config.untestable {
                UntestablePolicy::CountAsNotFit => "notfit",
                UntestablePolicy::Exclude => "exclude",
            }
        ),
        format!("out={}", config.out.display()),
    ];
    for line in lines {
        writeln!(w, "{line}").map_err(|e| PipelineError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
    }
    finish(&path, w)
}

/// Outcome of `ingest`: what was extracted and what was skipped.
#[derive(Debug)]
pub struct IngestSummary {
    pub records: usize,
    pub sample_count: usize,
    /// (release, τ_max) for every release that produced samples.
    pub release_horizons: Vec<(String, u32)>,
    pub skipped: Vec<SkippedRelease>,
    pub warnings: Vec<String>,
    pub collection_date: Option<NaiveDate>,
}

/// Step 1: load records and manifest, build the selected data sets, extract
/// every observed sample, and persist the sample store.
pub fn cmd_ingest(config: &RunConfig) -> Result<IngestSummary, PipelineError> {
    config.validate()?;
    create_out_dir(config)?;
    let records_path = config
        .records
        .as_deref()
        .ok_or_else(|| PipelineError::Input("ingest requires --records".to_string()))?;
    let manifest_path = config
        .manifest
        .as_deref()
        .ok_or_else(|| PipelineError::Input("ingest requires --manifest".to_string()))?;
    let format = config
        .records_format
        .unwrap_or_else(|| RecordFormat::from_path(records_path));
    let records = load_records(records_path, format)?;
    let manifest = load_manifest(manifest_path)?;

    let mut warnings = Vec::new();
    let collection_date = config
        .collection_date
        .or_else(|| records.iter().map(|r| r.date).max());

    let releases: Vec<String> = manifest.releases().map(|s| s.to_string()).collect();
    let mut enumeration = Default::default();
    match collection_date {
        Some(date) => {
            enumeration = enumerate_samples(
                &records,
                &manifest,
                &releases,
                &config.datasets,
                date,
                config.tau_min,
            )?;
        }
        None => warnings.push(
            "record file is empty and no --collection-date given; no samples extracted"
                .to_string(),
        ),
    }

    store::write_samples(&config.out_path(store::SAMPLES_FILE), &enumeration.samples)?;
    write_run_manifest(config, "ingest")?;

    let mut release_horizons: BTreeMap<String, u32> = BTreeMap::new();
    for sample in enumeration.samples.iter() {
        let entry = release_horizons.entry(sample.release().to_string()).or_default();
        *entry = (*entry).max(sample.horizon());
    }
    Ok(IngestSummary {
        records: records.len(),
        sample_count: enumeration.samples.len(),
        release_horizons: release_horizons.into_iter().collect(),
        skipped: enumeration.skipped,
        warnings,
        collection_date,
    })
}

/// Outcome of `fit`.
#[derive(Debug)]
pub struct FitSummary {
    pub samples: usize,
    pub curves: usize,
    pub failures: usize,
    pub non_converged: usize,
}

fn run_in_pool<T: Send>(workers: usize, task: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    if workers == 0 {
        Ok(task())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| PipelineError::Input(format!("cannot build worker pool: {e}")))?;
        Ok(pool.install(task))
    }
}

/// Step 2: fit every selected model to every stored sample and persist the
/// curve store. Individual non-convergence never aborts the batch.
pub fn cmd_fit(config: &RunConfig) -> Result<FitSummary, PipelineError> {
    config.validate()?;
    create_out_dir(config)?;
    let samples = store::read_samples(&config.out_path(store::SAMPLES_FILE))?;
    let fit_config = FitConfig {
        seed: config.seed,
        ..FitConfig::default()
    };
    fit_config.validate()?;
    let models = config.models.clone();
    let sample_list: Vec<&crate::ingest::ObservedSample> = samples.iter().collect();
    let batch = run_in_pool(config.workers, move || {
        fit_all(sample_list, &models, &fit_config)
    })?;
    store::write_curves(&config.out_path(store::CURVES_FILE), &batch.curves)?;
    write_run_manifest(config, "fit")?;
    Ok(FitSummary {
        samples: samples.len(),
        curves: batch.curves.len(),
        failures: batch.failures.len(),
        non_converged: batch.curves.iter().filter(|c| !c.converged).count(),
    })
}

fn write_series_file(
    path: &Path,
    header: &str,
    series: &QualitySeries,
    smoothed: Option<&QualitySeries>,
    value_column: &str,
) -> Result<(), PipelineError> {
    let mut w = report_writer(path, header)?;
    let ma: BTreeMap<u32, f64> = smoothed
        .map(|s| s.points.iter().copied().collect())
        .unwrap_or_default();
    writeln!(w, "tau,{value_column},ma").map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    for &(tau, value) in &series.points {
        let ma_field = ma.get(&tau).map(|v| format!("{v}")).unwrap_or_default();
        writeln!(w, "{tau},{value},{ma_field}").map_err(|e| PipelineError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
    }
    finish(path, w)
}

/// Outcome of `quality`.
#[derive(Debug)]
pub struct QualitySummary {
    pub evaluated: usize,
    /// (model, overall Q) over the analysis window.
    pub overall: Vec<(ModelId, f64)>,
    pub notes: Vec<String>,
}

fn load_stores(config: &RunConfig) -> Result<(SampleSet, Vec<FittedCurve>), PipelineError> {
    let samples = store::read_samples(&config.out_path(store::SAMPLES_FILE))?;
    let curves = store::read_curves(&config.out_path(store::CURVES_FILE))?;
    Ok((samples, curves))
}

fn evaluate_own_samples(
    samples: &SampleSet,
    curves: &[FittedCurve],
) -> Result<Vec<EvaluatedSample>, PipelineError> {
    curves
        .iter()
        .map(|curve| {
            let sample = samples.get(&curve.sample_key).ok_or_else(|| {
                PipelineError::Input(format!(
                    "curve store references sample {} which is not in the sample store; re-run ingest and fit",
                    curve.sample_key
                ))
            })?;
            Ok(evaluate_sample(curve, sample))
        })
        .collect()
}

/// Step 3: evaluate every stored curve against its own sample, persist the
/// evaluated store, and write the quality reports (temporal series with the
/// moving average, per-period base-line verdicts, and overall quality).
pub fn cmd_quality(config: &RunConfig) -> Result<QualitySummary, PipelineError> {
    config.validate()?;
    create_out_dir(config)?;
    let (samples, curves) = load_stores(config)?;
    let evaluated = evaluate_own_samples(&samples, &curves)?;
    store::write_evaluated(&config.out_path(store::EVALUATED_FILE), &evaluated)?;

    let in_window: Vec<EvaluatedSample> = evaluated
        .iter()
        .filter(|e| e.horizon() >= config.tau_min && e.horizon() <= config.tau_max_cap)
        .cloned()
        .collect();

    let mut notes = Vec::new();
    let mut overall = Vec::new();
    let policy = config.untestable;

    let overall_path = config.out_path("quality_overall.csv");
    let mut overall_file = report_writer(
        &overall_path,
        &format!("vdm-report kind=quality-overall omega={}", config.omega),
    )?;
    writeln!(overall_file, "model,total,good,inconclusive,notfit,untestable,q")
        .map_err(|e| PipelineError::Io { path: overall_path.display().to_string(), source: e })?;

    let periods_path = config.out_path("quality_periods.csv");
    let mut periods_file = report_writer(
        &periods_path,
        &format!("vdm-report kind=quality-periods omega={}", config.omega),
    )?;
    writeln!(periods_file, "model,period,horizons,median,p_above,p_below,verdict")
        .map_err(|e| PipelineError::Io { path: periods_path.display().to_string(), source: e })?;

    for &model in &config.models {
        let of_model: Vec<EvaluatedSample> = in_window
            .iter()
            .filter(|e| e.curve.model == model)
            .cloned()
            .collect();
        if of_model.is_empty() {
            notes.push(format!("{model}: no evaluated samples in the analysis window"));
            continue;
        }

        let series = temporal_quality_series(model, &of_model, config.omega, policy)
            .map_err(|e| PipelineError::Internal(e.to_string()))?;
        let smoothed = moving_average(&series, config.window).ok();
        write_series_file(
            &config.out_path(&format!("quality_{model}.csv")),
            &format!(
                "vdm-report kind=quality-series model={model} omega={} window={}",
                config.omega, config.window
            ),
            &series,
            smoothed.as_ref(),
            "q",
        )?;

        let (mut good, mut inconclusive, mut notfit, mut untestable) = (0usize, 0, 0, 0);
        for e in &of_model {
            if matches!(e.outcome, GofOutcome::Untestable { .. }) {
                untestable += 1;
            }
            match e.effective_class(policy) {
                Some(crate::gof::FitClass::GoodFit) => good += 1,
                Some(crate::gof::FitClass::InconclusiveFit) => inconclusive += 1,
                Some(crate::gof::FitClass::NotFit) => notfit += 1,
                None => {}
            }
        }
        let q = overall_quality(&of_model, config.omega, policy)
            .map_err(|e| PipelineError::Internal(e.to_string()))?;
        writeln!(
            overall_file,
            "{model},{},{good},{inconclusive},{notfit},{untestable},{q}",
            good + inconclusive + notfit
        )
        .map_err(|e| PipelineError::Io { path: overall_path.display().to_string(), source: e })?;
        overall.push((model, q));

        for period in Period::ALL {
            match quality_by_period(model, &of_model, config.omega, policy, period) {
                Ok(report) => {
                    writeln!(
                        periods_file,
                        "{model},{},{},{},{},{},{}",
                        period,
                        report.qualities.len(),
                        report.median,
                        report.p_above,
                        report.p_below,
                        report.verdict
                    )
                    .map_err(|e| PipelineError::Io {
                        path: periods_path.display().to_string(),
                        source: e,
                    })?;
                }
                Err(_) => notes.push(format!("{model}: no horizons in the {period} period")),
            }
        }
    }
    finish(&overall_path, overall_file)?;
    finish(&periods_path, periods_file)?;
    write_run_manifest(config, "quality")?;

    Ok(QualitySummary {
        evaluated: evaluated.len(),
        overall,
        notes,
    })
}

/// Outcome of `predict`.
#[derive(Debug)]
pub struct PredictSummary {
    pub series_files: usize,
    pub factor_rows: usize,
    pub skipped_points: usize,
}

/// Step 4: evaluate frozen curves on future samples and write per-(model, Δ)
/// predictability series plus the per-(τ, δ) factor diagnostics.
pub fn cmd_predict(config: &RunConfig) -> Result<PredictSummary, PipelineError> {
    config.validate()?;
    create_out_dir(config)?;
    let (samples, curves) = load_stores(config)?;
    let deltas = config.deltas();
    let max_delta = *deltas.iter().max().unwrap_or(&0);
    let max_horizon = curves
        .iter()
        .map(|c| c.sample_key.horizon)
        .max()
        .unwrap_or(0)
        .min(config.tau_max_cap);
    let policy = config.untestable;

    // Q*(τ, δ) factor table per model
    let mut factors: BTreeMap<(ModelId, u32, u32), PredictionQuality> = BTreeMap::new();
    for &model in &config.models {
        for tau in config.tau_min..=max_horizon {
            let at_tau: Vec<&FittedCurve> = curves
                .iter()
                .filter(|c| c.model == model && c.sample_key.horizon == tau)
                .collect();
            if at_tau.is_empty() {
                continue;
            }
            for delta in 0..=max_delta {
                if let Ok(q) = prediction_quality(&at_tau, &samples, delta, config.omega, policy) {
                    factors.insert((model, tau, delta), q);
                }
            }
        }
    }

    let diag_path = config.out_path("predict_factors.csv");
    let mut diag = report_writer(
        &diag_path,
        &format!("vdm-report kind=predict-factors omega={}", config.omega),
    )?;
    writeln!(diag, "model,tau,delta,value,good,inconclusive,notfit,untestable,excluded_missing_future")
        .map_err(|e| PipelineError::Io { path: diag_path.display().to_string(), source: e })?;
    for ((model, tau, delta), q) in &factors {
        writeln!(
            diag,
            "{model},{tau},{delta},{},{},{},{},{},{}",
            q.value, q.good, q.inconclusive, q.not_fit, q.untestable, q.excluded_missing_future
        )
        .map_err(|e| PipelineError::Io { path: diag_path.display().to_string(), source: e })?;
    }
    let factor_rows = factors.len();
    finish(&diag_path, diag)?;

    let mut series_files = 0;
    let mut skipped_points = 0;
    for &model in &config.models {
        for &span in &deltas {
            let mut points = Vec::new();
            for tau in config.tau_min..=max_horizon {
                let values: Vec<f64> = (0..=span)
                    .map_while(|delta| factors.get(&(model, tau, delta)).map(|q| q.value))
                    .collect();
                if values.len() == span as usize + 1 {
                    points.push((tau, geometric_mean(&values)));
                } else {
                    skipped_points += 1;
                }
            }
            if points.is_empty() {
                continue;
            }
            let series = QualitySeries {
                model,
                omega: config.omega,
                points,
                window: None,
            };
            let smoothed = moving_average(&series, config.window).ok();
            write_series_file(
                &config.out_path(&format!("predictability_{model}_d{span}.csv")),
                &format!(
                    "vdm-report kind=predictability-series model={model} delta={span} omega={} window={}",
                    config.omega, config.window
                ),
                &series,
                smoothed.as_ref(),
                "predictability",
            )?;
            series_files += 1;
        }
    }
    write_run_manifest(config, "predict")?;

    Ok(PredictSummary {
        series_files,
        factor_rows,
        skipped_points,
    })
}

/// Outcome of `compare` for one scenario.
#[derive(Debug)]
pub struct ScenarioOutcome {
    pub scenario: Scenario,
    pub models: Vec<ModelId>,
    pub edges: usize,
    pub best: Vec<ModelId>,
    pub alpha_effective: f64,
}

/// Outcome of `compare`.
#[derive(Debug)]
pub struct CompareSummary {
    pub scenarios: Vec<ScenarioOutcome>,
    pub notes: Vec<String>,
}

fn median_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Step 5: per scenario, gather each model's predictability and temporal
/// quality sets over the observation window, run the Bonferroni-corrected
/// tournament, and emit the graph (DOT), the pairwise table, and a summary.
pub fn cmd_compare(config: &RunConfig) -> Result<CompareSummary, PipelineError> {
    config.validate()?;
    create_out_dir(config)?;
    let (samples, curves) = load_stores(config)?;
    let evaluated = store::read_evaluated(&config.out_path(store::EVALUATED_FILE))?;
    let policy = config.untestable;

    let mut notes = Vec::new();
    let mut outcomes = Vec::new();
    for scenario in config.scenarios() {
        let (obs_lo, obs_hi) = scenario.observation();
        let lo = obs_lo.max(config.tau_min);
        let hi = obs_hi.min(config.tau_max_cap);
        let span = scenario.span();

        let mut series_map: BTreeMap<ModelId, ModelSeries> = BTreeMap::new();
        for &model in &config.models {
            let mut rho = Vec::new();
            for tau in lo..=hi {
                let at_tau: Vec<&FittedCurve> = curves
                    .iter()
                    .filter(|c| c.model == model && c.sample_key.horizon == tau)
                    .collect();
                if at_tau.is_empty() {
                    continue;
                }
                let factors: Vec<f64> = (0..=span)
                    .map_while(|delta| {
                        prediction_quality(&at_tau, &samples, delta, config.omega, policy)
                            .ok()
                            .map(|q| q.value)
                    })
                    .collect();
                if factors.len() == span as usize + 1 {
                    rho.push(geometric_mean(&factors));
                }
            }
            let quality: Vec<f64> = match temporal_quality_series(model, &evaluated, config.omega, policy) {
                Ok(series) => series
                    .points
                    .into_iter()
                    .filter(|&(tau, _)| tau >= lo && tau <= hi)
                    .map(|(_, q)| q)
                    .collect(),
                Err(_) => Vec::new(),
            };
            if rho.is_empty() || quality.is_empty() {
                notes.push(format!(
                    "{}: {model} lacks data in the observation window, excluded",
                    scenario.name()
                ));
                continue;
            }
            series_map.insert(model, ModelSeries { predictability: rho, quality });
        }

        let graph = build_graph(&series_map, DEFAULT_ALPHA)
            .map_err(|e| PipelineError::Internal(e.to_string()))?;

        let dot_path = config.out_path(&format!("graph_{}.dot", scenario.name()));
        let mut dot = report_writer(
            &dot_path,
            &format!(
                "vdm-report kind=comparison-graph scenario={} alpha_effective={}",
                scenario.name(),
                graph.alpha_effective
            ),
        )?;
        write!(dot, "{}", graph.to_dot()).map_err(|e| PipelineError::Io {
            path: dot_path.display().to_string(),
            source: e,
        })?;
        finish(&dot_path, dot)?;

        let table_path = config.out_path(&format!("comparison_{}.csv", scenario.name()));
        let mut table = report_writer(
            &table_path,
            &format!("vdm-report kind=comparison-table scenario={}", scenario.name()),
        )?;
        writeln!(table, "model_a,model_b,p_predictability,p_quality,direction,basis,alpha_effective")
            .map_err(|e| PipelineError::Io { path: table_path.display().to_string(), source: e })?;
        for r in &graph.results {
            writeln!(
                table,
                "{},{},{},{},{},{},{}",
                r.model_a, r.model_b, r.p_predictability, r.p_quality, r.direction, r.basis,
                r.alpha_effective
            )
            .map_err(|e| PipelineError::Io { path: table_path.display().to_string(), source: e })?;
        }
        finish(&table_path, table)?;

        let summary_path = config.out_path(&format!("scenario_{}.csv", scenario.name()));
        let mut summary = report_writer(
            &summary_path,
            &format!(
                "vdm-report kind=scenario-summary scenario={} observation={}-{} delta={}",
                scenario.name(),
                lo,
                hi,
                span
            ),
        )?;
        writeln!(summary, "model,points,median_predictability,median_quality")
            .map_err(|e| PipelineError::Io { path: summary_path.display().to_string(), source: e })?;
        for (model, series) in &series_map {
            writeln!(
                summary,
                "{model},{},{},{}",
                series.predictability.len(),
                median_of(&series.predictability),
                median_of(&series.quality)
            )
            .map_err(|e| PipelineError::Io { path: summary_path.display().to_string(), source: e })?;
        }
        finish(&summary_path, summary)?;

        outcomes.push(ScenarioOutcome {
            scenario,
            models: graph.nodes.clone(),
            edges: graph.edges.len(),
            best: graph.best.clone(),
            alpha_effective: graph.alpha_effective,
        });
    }
    write_run_manifest(config, "compare")?;

    Ok(CompareSummary {
        scenarios: outcomes,
        notes,
    })
}
