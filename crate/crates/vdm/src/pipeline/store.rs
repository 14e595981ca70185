//! Persisted intermediate stores.
//!
//! Plain CSV files with a versioned `#` comment header, written in
//! deterministic order with round-trip float formatting, so re-running a
//! step on unchanged inputs reproduces the file byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use crate::fit::FittedCurve;
use crate::gof::{EvaluatedSample, GofOutcome};
use crate::ingest::{ObservedSample, SampleKey, SampleSet};
use crate::models::ParamVector;

use super::PipelineError;

pub const STORE_VERSION: u32 = 1;

pub const SAMPLES_FILE: &str = "samples.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const EVALUATED_FILE: &str = "evaluated.csv";

fn io_error(path: &Path, source: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn store_error(path: &Path, message: impl Into<String>) -> PipelineError {
    PipelineError::Store {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn writer_with_header(path: &Path, kind: &str) -> Result<csv::Writer<BufWriter<File>>, PipelineError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut buf = BufWriter::new(file);
    writeln!(buf, "# vdm-store kind={kind} version={STORE_VERSION}").map_err(|e| io_error(path, e))?;
    Ok(csv::Writer::from_writer(buf))
}

fn reader(path: &Path) -> Result<csv::Reader<File>, PipelineError> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file))
}

pub fn write_samples(path: &Path, samples: &SampleSet) -> Result<(), PipelineError> {
    let mut w = writer_with_header(path, "samples")?;
    w.write_record(["release", "dataset", "horizon", "counts"])
        .map_err(|e| store_error(path, e.to_string()))?;
    for sample in samples.iter() {
        let counts = sample
            .counts()
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        w.write_record([
            sample.release(),
            sample.dataset().name(),
            &sample.horizon().to_string(),
            &counts,
        ])
        .map_err(|e| store_error(path, e.to_string()))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn read_samples(path: &Path) -> Result<SampleSet, PipelineError> {
    let mut samples = SampleSet::new();
    for (index, row) in reader(path)?.records().enumerate() {
        let row = row.map_err(|e| store_error(path, e.to_string()))?;
        let context = |what: &str| format!("row {}: {what}", index + 1);
        if row.len() != 4 {
            return Err(store_error(path, context("expected 4 columns")));
        }
        let dataset = row[1]
            .parse()
            .map_err(|e| store_error(path, context(&format!("{e}"))))?;
        let horizon: usize = row[2]
            .parse()
            .map_err(|_| store_error(path, context("bad horizon")))?;
        let counts: Vec<u32> = row[3]
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| store_error(path, context("bad counts")))?;
        if counts.len() != horizon {
            return Err(store_error(path, context("horizon does not match counts")));
        }
        let sample = ObservedSample::new(row[0].to_string(), dataset, counts)
            .map_err(|e| store_error(path, context(&e.to_string())))?;
        samples.insert(sample);
    }
    Ok(samples)
}

fn params_field(params: &ParamVector) -> String {
    params
        .values()
        .iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

const CURVE_COLUMNS: [&str; 8] = [
    "release",
    "dataset",
    "horizon",
    "model",
    "params",
    "rss",
    "converged",
    "iterations",
];

fn curve_record(curve: &FittedCurve) -> Vec<String> {
    vec![
        curve.sample_key.release.clone(),
        curve.sample_key.dataset.name().to_string(),
        curve.sample_key.horizon.to_string(),
        curve.model.name().to_string(),
        params_field(&curve.params),
        format!("{}", curve.residual_sum_squares),
        curve.converged.to_string(),
        curve.iterations.to_string(),
    ]
}

fn parse_curve(path: &Path, index: usize, row: &csv::StringRecord) -> Result<FittedCurve, PipelineError> {
    let context = |what: String| store_error(path, format!("row {}: {what}", index + 1));
    let model: crate::models::ModelId = row[3]
        .parse()
        .map_err(|e| context(format!("{e}")))?;
    let values: Vec<f64> = row[4]
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| context("bad params".to_string()))?;
    let params = ParamVector::new(model, values).map_err(|e| context(e.to_string()))?;
    let dataset = row[1].parse().map_err(|e| context(format!("{e}")))?;
    let horizon: u32 = row[2]
        .parse()
        .map_err(|_| context("bad horizon".to_string()))?;
    Ok(FittedCurve {
        model,
        params,
        sample_key: SampleKey::new(row[0].to_string(), dataset, horizon),
        residual_sum_squares: row[5]
            .parse()
            .map_err(|_| context("bad rss".to_string()))?,
        converged: row[6]
            .parse()
            .map_err(|_| context("bad converged flag".to_string()))?,
        iterations: row[7]
            .parse()
            .map_err(|_| context("bad iterations".to_string()))?,
    })
}

pub fn write_curves(path: &Path, curves: &[FittedCurve]) -> Result<(), PipelineError> {
    let mut w = writer_with_header(path, "curves")?;
    w.write_record(CURVE_COLUMNS)
        .map_err(|e| store_error(path, e.to_string()))?;
    for curve in curves {
        w.write_record(curve_record(curve))
            .map_err(|e| store_error(path, e.to_string()))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn read_curves(path: &Path) -> Result<Vec<FittedCurve>, PipelineError> {
    let mut curves = Vec::new();
    for (index, row) in reader(path)?.records().enumerate() {
        let row = row.map_err(|e| store_error(path, e.to_string()))?;
        if row.len() != CURVE_COLUMNS.len() {
            return Err(store_error(path, format!("row {}: expected {} columns", index + 1, CURVE_COLUMNS.len())));
        }
        curves.push(parse_curve(path, index, &row)?);
    }
    Ok(curves)
}

const EVALUATED_COLUMNS: [&str; 14] = [
    "release",
    "dataset",
    "horizon",
    "model",
    "fit_horizon",
    "params",
    "rss",
    "converged",
    "iterations",
    "status",
    "chi_square",
    "dof",
    "p_value",
    "fit_class",
];

pub fn write_evaluated(path: &Path, evaluated: &[EvaluatedSample]) -> Result<(), PipelineError> {
    let mut w = writer_with_header(path, "evaluated")?;
    w.write_record(EVALUATED_COLUMNS)
        .map_err(|e| store_error(path, e.to_string()))?;
    for sample in evaluated {
        let mut record = vec![
            sample.sample_key.release.clone(),
            sample.sample_key.dataset.name().to_string(),
            sample.sample_key.horizon.to_string(),
            sample.curve.model.name().to_string(),
            sample.curve.sample_key.horizon.to_string(),
            params_field(&sample.curve.params),
            format!("{}", sample.curve.residual_sum_squares),
            sample.curve.converged.to_string(),
            sample.curve.iterations.to_string(),
        ];
        match &sample.outcome {
            GofOutcome::Tested {
                chi_square,
                dof,
                p_value,
                fit_class,
                binning_start,
            } => {
                record.push(format!("tested:{binning_start}"));
                record.push(format!("{chi_square}"));
                record.push(dof.to_string());
                record.push(format!("{p_value}"));
                record.push(fit_class.name().to_string());
            }
            GofOutcome::Untestable { reason } => {
                record.push(format!("untestable:{}", reason.name()));
                record.extend(["", "", "", ""].map(String::from));
            }
        }
        w.write_record(&record)
            .map_err(|e| store_error(path, e.to_string()))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn read_evaluated(path: &Path) -> Result<Vec<EvaluatedSample>, PipelineError> {
    let mut evaluated = Vec::new();
    for (index, row) in reader(path)?.records().enumerate() {
        let row = row.map_err(|e| store_error(path, e.to_string()))?;
        if row.len() != EVALUATED_COLUMNS.len() {
            return Err(store_error(
                path,
                format!("row {}: expected {} columns", index + 1, EVALUATED_COLUMNS.len()),
            ));
        }
        let context = |what: String| store_error(path, format!("row {}: {what}", index + 1));
        // the curve columns are laid out as in the curve store, with the
        // curve's own horizon in fit_horizon
        let curve_row = csv::StringRecord::from(vec![
            row[0].to_string(),
            row[1].to_string(),
            row[4].to_string(),
            row[3].to_string(),
            row[5].to_string(),
            row[6].to_string(),
            row[7].to_string(),
            row[8].to_string(),
        ]);
        let curve = parse_curve(path, index, &curve_row)?;
        let dataset = row[1].parse().map_err(|e| context(format!("{e}")))?;
        let horizon: u32 = row[2]
            .parse()
            .map_err(|_| context("bad horizon".to_string()))?;
        let outcome = match row[9].split_once(':') {
            Some(("tested", binning_start)) => GofOutcome::Tested {
                chi_square: row[10]
                    .parse()
                    .map_err(|_| context("bad chi_square".to_string()))?,
                dof: row[11].parse().map_err(|_| context("bad dof".to_string()))?,
                p_value: row[12]
                    .parse()
                    .map_err(|_| context("bad p_value".to_string()))?,
                fit_class: row[13]
                    .parse()
                    .map_err(|e| context(format!("{e}")))?,
                binning_start: binning_start
                    .parse()
                    .map_err(|_| context("bad binning_start".to_string()))?,
            },
            Some(("untestable", reason)) => GofOutcome::Untestable {
                reason: reason.parse().map_err(|e| context(format!("{e}")))?,
            },
            _ => return Err(context(format!("bad status \"{}\"", &row[9]))),
        };
        evaluated.push(EvaluatedSample {
            sample_key: SampleKey::new(row[0].to_string(), dataset, horizon),
            curve,
            outcome,
        });
    }
    Ok(evaluated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{fit, FitConfig};
    use crate::gof::evaluate_sample;
    use crate::ingest::DataSetId;
    use crate::models::ModelId;

    fn sample_set() -> SampleSet {
        let mut samples = SampleSet::new();
        samples.insert(
            ObservedSample::new("P1.0", DataSetId::Nvd, vec![3, 5, 7, 9, 11, 13]).unwrap(),
        );
        samples.insert(
            ObservedSample::new("P1.0", DataSetId::NvdBug, vec![0, 1, 1, 4, 6, 9]).unwrap(),
        );
        samples
    }

    #[test]
    fn samples_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(SAMPLES_FILE);
        let samples = sample_set();
        write_samples(&path, &samples).unwrap();
        let read = read_samples(&path).unwrap();
        assert_eq!(read.len(), samples.len());
        for sample in samples.iter() {
            assert_eq!(read.get(&sample.key()).unwrap(), sample);
        }
        // the header carries the store version
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# vdm-store kind=samples version=1"));
    }

    #[test]
    fn curves_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(CURVES_FILE);
        let samples = sample_set();
        let config = FitConfig::default();
        let curves: Vec<FittedCurve> = samples
            .iter()
            .flat_map(|s| {
                [ModelId::Ln, ModelId::Aml, ModelId::Yf]
                    .iter()
                    .map(|&m| fit(m, s, &config).unwrap())
                    .collect::<Vec<_>>()
            })
            .collect();
        write_curves(&path, &curves).unwrap();
        let read = read_curves(&path).unwrap();
        assert_eq!(read.len(), curves.len());
        for (a, b) in curves.iter().zip(&read) {
            assert_eq!(a.params.values(), b.params.values(), "params must round-trip exactly");
            assert_eq!(
                a.residual_sum_squares.to_bits(),
                b.residual_sum_squares.to_bits()
            );
            assert_eq!(a.sample_key, b.sample_key);
        }
    }

    #[test]
    fn evaluated_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(EVALUATED_FILE);
        let samples = sample_set();
        let config = FitConfig::default();
        let evaluated: Vec<EvaluatedSample> = samples
            .iter()
            .map(|s| {
                let curve = fit(ModelId::Ln, s, &config).unwrap();
                evaluate_sample(&curve, s)
            })
            .collect();
        write_evaluated(&path, &evaluated).unwrap();
        let read = read_evaluated(&path).unwrap();
        assert_eq!(read.len(), evaluated.len());
        for (a, b) in evaluated.iter().zip(&read) {
            assert_eq!(a.sample_key, b.sample_key);
            assert_eq!(a.outcome, b.outcome);
        }
    }

    #[test]
    fn tampered_store_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(SAMPLES_FILE);
        std::fs::write(
            &path,
            "# vdm-store kind=samples version=1\nrelease,dataset,horizon,counts\nP1.0,NVD,6,1 2 3\n",
        )
        .unwrap();
        assert!(read_samples(&path).is_err());
    }
}
