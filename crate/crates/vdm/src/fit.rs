//! Damped nonlinear least squares (Levenberg–Marquardt) over the model
//! families, with analytic Jacobians.
//!
//! Positivity constraints are enforced by fitting in log space rather than
//! by rejection, so every iterate is admissible. Each fit runs a small
//! deterministic multistart (×/÷ {1, 2, 5, 10} on the heuristic guess, plus
//! seeded jitter for any extra starts) and keeps the lowest residual sum of
//! squares. Non-convergence is reported, not treated as failure: the best
//! curve found still flows into the χ² evaluation downstream.

use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::{ObservedSample, SampleKey};
use crate::models::{
    evaluate, gradient, initial_guess_for_counts, ModelError, ModelId, ParamBound, ParamVector,
};

#[derive(Debug, Error)]
pub enum FitError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("every start diverged fitting {model} to {key}")]
    AllStartsDiverged { model: ModelId, key: SampleKey },
    #[error("invalid fit configuration: {0}")]
    Config(String),
}

/// Tuning knobs for the least-squares engine.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub max_iterations: u32,
    pub step_tolerance: f64,
    pub residual_tolerance: f64,
    pub damping_init: f64,
    pub multistart_count: u32,
    /// Seed for the jittered extra starts; fits are deterministic given it.
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iterations: 200,
            step_tolerance: 1e-10,
            residual_tolerance: 1e-10,
            damping_init: 1e-3,
            multistart_count: 8,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        if self.max_iterations == 0 || self.multistart_count == 0 {
            return Err(FitError::Config(
                "max_iterations and multistart_count must be positive".into(),
            ));
        }
        for (name, v) in [
            ("step_tolerance", self.step_tolerance),
            ("residual_tolerance", self.residual_tolerance),
            ("damping_init", self.damping_init),
        ] {
            if !(v > 0.0) {
                return Err(FitError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// A model fitted to one observed sample.
#[derive(Debug, Clone)]
pub struct FittedCurve {
    pub model: ModelId,
    pub params: ParamVector,
    pub sample_key: SampleKey,
    pub residual_sum_squares: f64,
    pub converged: bool,
    pub iterations: u32,
}

// Internal coordinates: log for positive parameters, identity otherwise.
fn to_internal(model: ModelId, values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .zip(model.bounds())
        .map(|(&v, bound)| match bound {
            ParamBound::Free => v,
            _ => v.max(1e-12).ln(),
        })
        .collect()
}

fn to_external(model: ModelId, theta: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .zip(model.bounds())
        .map(|(&t, bound)| match bound {
            ParamBound::Free => t,
            _ => t.exp(),
        })
        .collect()
}

fn residuals(params: &ParamVector, observed: &[f64]) -> Option<(Vec<f64>, f64)> {
    let mut r = Vec::with_capacity(observed.len());
    let mut rss = 0.0;
    for (i, &y) in observed.iter().enumerate() {
        let t = (i + 1) as f64;
        let value = evaluate(params, t).ok()?;
        if !value.is_finite() {
            return None;
        }
        let e = value - y;
        r.push(e);
        rss += e * e;
    }
    rss.is_finite().then_some((r, rss))
}

// Gauss elimination with partial pivoting; systems here are at most 3×3.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !a[pivot][col].is_finite() || a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = b[row];
        for k in row + 1..n {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

struct StartResult {
    theta: Vec<f64>,
    rss: f64,
    converged: bool,
    iterations: u32,
}

fn run_start(
    model: ModelId,
    theta0: Vec<f64>,
    observed: &[f64],
    config: &FitConfig,
) -> Option<StartResult> {
    let arity = model.arity();
    let mut theta = theta0;
    let params = ParamVector::new(model, to_external(model, &theta)).ok()?;
    let (mut r, mut rss) = residuals(&params, observed)?;
    let mut lambda = config.damping_init;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_iterations {
        iterations += 1;
        let params = ParamVector::new(model, to_external(model, &theta)).ok()?;
        let external = params.values();

        // Jacobian in internal coordinates: chain rule multiplies the log
        // parameters' columns by their current value.
        let mut jtj = vec![vec![0.0; arity]; arity];
        let mut jtr = vec![0.0; arity];
        let mut degenerate = false;
        'rows: for (i, &res) in r.iter().enumerate() {
            let t = (i + 1) as f64;
            let g = gradient(&params, t).ok()?;
            let mut row = Vec::with_capacity(arity);
            for (k, bound) in model.bounds().iter().enumerate() {
                let scale = match bound {
                    ParamBound::Free => 1.0,
                    _ => external[k],
                };
                let value = g[k] * scale;
                if !value.is_finite() {
                    degenerate = true;
                    break 'rows;
                }
                row.push(value);
            }
            for a in 0..arity {
                jtr[a] += row[a] * res;
                for b in a..arity {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        if degenerate {
            // no finite descent direction from here; keep the best point
            break;
        }
        for a in 0..arity {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }

        let mut damped = jtj.clone();
        for k in 0..arity {
            damped[k][k] += lambda * jtj[k][k].max(1e-12);
        }
        let step = match solve_linear(damped, jtr.iter().map(|&v| -v).collect()) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => {
                lambda *= 10.0;
                if lambda > 1e14 {
                    break;
                }
                continue;
            }
        };

        let candidate: Vec<f64> = theta.iter().zip(&step).map(|(t, d)| t + d).collect();
        let trial = ParamVector::new(model, to_external(model, &candidate)).ok();
        let trial_res = trial.and_then(|p| residuals(&p, observed));
        match trial_res {
            Some((new_r, new_rss)) if new_rss <= rss => {
                let step_norm = step.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let theta_norm = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let improvement = rss - new_rss;
                theta = candidate;
                r = new_r;
                rss = new_rss;
                lambda = (lambda / 3.0).max(1e-14);
                if step_norm <= config.step_tolerance * (1.0 + theta_norm)
                    || improvement <= config.residual_tolerance * (1.0 + rss)
                {
                    converged = true;
                    break;
                }
            }
            _ => {
                lambda *= 10.0;
                if lambda > 1e14 {
                    break;
                }
            }
        }
    }

    Some(StartResult {
        theta,
        rss,
        converged,
        iterations,
    })
}

// FNV-1a, used to derive a stable per-fit seed for the jittered starts.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn multistart_guesses(
    model: ModelId,
    base: &ParamVector,
    key: &SampleKey,
    config: &FitConfig,
) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};

    const FACTORS: [f64; 7] = [1.0, 2.0, 0.5, 5.0, 0.2, 10.0, 0.1];
    let mut guesses = Vec::with_capacity(config.multistart_count as usize);
    for k in 0..config.multistart_count as usize {
        if k < FACTORS.len() {
            let factor = FACTORS[k];
            guesses.push(base.values().iter().map(|&v| v * factor).collect());
        } else {
            let seed = config
                .seed
                .wrapping_add(fnv1a(format!("{}/{}/{k}", model, key).as_bytes()));
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let jittered = base
                .values()
                .iter()
                .zip(model.bounds())
                .map(|(&v, bound)| {
                    let noise: f64 = rng.gen_range(-1.0..1.0);
                    match bound {
                        ParamBound::Free => v + noise * v.abs().max(1.0),
                        _ => v * (noise * 1.2).exp(),
                    }
                })
                .collect();
            guesses.push(jittered);
        }
    }
    guesses
}

/// Fits `model` to a raw cumulative series (month 1 first).
pub fn fit_counts(
    model: ModelId,
    observed: &[f64],
    key: SampleKey,
    config: &FitConfig,
) -> Result<FittedCurve, FitError> {
    config.validate()?;
    let base = initial_guess_for_counts(model, observed)?;
    let mut best: Option<StartResult> = None;
    for guess in multistart_guesses(model, &base, &key, config) {
        let theta0 = to_internal(model, &guess);
        if let Some(result) = run_start(model, theta0, observed, config) {
            let better = match &best {
                None => true,
                Some(b) => result.rss < b.rss,
            };
            if better {
                best = Some(result);
            }
        }
    }
    let best = best.ok_or(FitError::AllStartsDiverged { model, key: key.clone() })?;
    let params = ParamVector::new(model, to_external(model, &best.theta))?;
    Ok(FittedCurve {
        model,
        params,
        sample_key: key,
        residual_sum_squares: best.rss,
        converged: best.converged,
        iterations: best.iterations,
    })
}

/// Fits `model` to an observed sample by minimizing
/// `Σ_t (counts[t] - Ω(t))²` over `t = 1..=τ`.
pub fn fit(
    model: ModelId,
    sample: &ObservedSample,
    config: &FitConfig,
) -> Result<FittedCurve, FitError> {
    fit_counts(model, &sample.counts_f64(), sample.key(), config)
}

/// A fit that could not produce a curve at all.
#[derive(Debug)]
pub struct FitFailure {
    pub key: SampleKey,
    pub model: ModelId,
    pub error: FitError,
}

/// Results of a batch fit; failures never abort the batch.
#[derive(Debug, Default)]
pub struct FitBatch {
    pub curves: Vec<FittedCurve>,
    pub failures: Vec<FitFailure>,
}

/// Fits every model to every sample, in parallel, gathering results in
/// input order.
pub fn fit_all<'a>(
    samples: impl IntoIterator<Item = &'a ObservedSample>,
    models: &[ModelId],
    config: &FitConfig,
) -> FitBatch {
    let tasks: Vec<(&ObservedSample, ModelId)> = samples
        .into_iter()
        .flat_map(|s| models.iter().map(move |&m| (s, m)))
        .collect();
    let results: Vec<Result<FittedCurve, FitFailure>> = tasks
        .par_iter()
        .map(|&(sample, model)| {
            fit(model, sample, config).map_err(|error| FitFailure {
                key: sample.key(),
                model,
                error,
            })
        })
        .collect();
    let mut batch = FitBatch::default();
    for result in results {
        match result {
            Ok(curve) => batch.curves.push(curve),
            Err(failure) => batch.failures.push(failure),
        }
    }
    batch
}
