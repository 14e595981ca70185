//! The eight vulnerability discovery model families.
//!
//! Every model is a closed-form curve `Ω(t)` for the cumulative number of
//! vulnerabilities `t` months after release, with `t = 1` the first month.
//! The module provides evaluation, analytic gradients for the least-squares
//! fitter, and data-driven starting points for parameter estimation.
//!
//! | Id  | Curve                                                   | Parameters |
//! |-----|---------------------------------------------------------|------------|
//! | AML | `B / (B·C·exp(-A·B·t) + 1)`                             | A, B, C    |
//! | AT  | `s·ln(t) + C`                                           | s, C       |
//! | JW  | `γ·(1 - exp(-(t/β)^α))`                                 | γ, β, α    |
//! | LN  | `A·t + B`                                               | A, B       |
//! | LP  | `β₀·ln(1 + β₁·t)`                                       | β₀, β₁     |
//! | RE  | `N·(1 - exp(-λ·t))`                                     | N, λ       |
//! | RQ  | `A·t²/2 + B·t`                                          | A, B       |
//! | YF  | `γ/2·(erf((t-τ)/(σ√2)) + erf((t+τ)/(σ√2)))`             | γ, τ, σ    |
//!
//! AT's original slope is a ratio of two coefficients that are not separately
//! identifiable, so it is fitted as the single parameter `s`. YF's folded
//! scale uses the standard `σ√2` denominator.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ingest::ObservedSample;
use crate::special::erf;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Identifier of one of the eight model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Aml,
    At,
    Jw,
    Ln,
    Lp,
    Re,
    Rq,
    Yf,
}

/// How a single parameter is constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamBound {
    /// Any finite real.
    Free,
    /// Strictly positive.
    Positive,
    /// Zero or positive.
    NonNegative,
}

impl ModelId {
    /// All eight models, in the conventional alphabetical order.
    pub const ALL: [ModelId; 8] = [
        ModelId::Aml,
        ModelId::At,
        ModelId::Jw,
        ModelId::Ln,
        ModelId::Lp,
        ModelId::Re,
        ModelId::Rq,
        ModelId::Yf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Aml => "AML",
            ModelId::At => "AT",
            ModelId::Jw => "JW",
            ModelId::Ln => "LN",
            ModelId::Lp => "LP",
            ModelId::Re => "RE",
            ModelId::Rq => "RQ",
            ModelId::Yf => "YF",
        }
    }

    /// Number of free parameters.
    pub fn arity(self) -> usize {
        match self {
            ModelId::Aml | ModelId::Jw | ModelId::Yf => 3,
            _ => 2,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelId::Aml => &["A", "B", "C"],
            ModelId::At => &["s", "C"],
            ModelId::Jw => &["gamma", "beta", "alpha"],
            ModelId::Ln => &["A", "B"],
            ModelId::Lp => &["beta0", "beta1"],
            ModelId::Re => &["N", "lambda"],
            ModelId::Rq => &["A", "B"],
            ModelId::Yf => &["gamma", "tau", "sigma"],
        }
    }

    /// Per-parameter constraint, aligned with [`ModelId::param_names`].
    pub fn bounds(self) -> &'static [ParamBound] {
        use ParamBound::*;
        match self {
            ModelId::Aml => &[Positive, Positive, Positive],
            ModelId::At => &[Free, Free],
            ModelId::Jw => &[Positive, Positive, Positive],
            ModelId::Ln => &[Free, Free],
            ModelId::Lp => &[Positive, Positive],
            ModelId::Re => &[Positive, Positive],
            ModelId::Rq => &[Free, Free],
            ModelId::Yf => &[Positive, NonNegative, Positive],
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AML" => Ok(ModelId::Aml),
            "AT" => Ok(ModelId::At),
            "JW" => Ok(ModelId::Jw),
            "LN" => Ok(ModelId::Ln),
            "LP" => Ok(ModelId::Lp),
            "RE" => Ok(ModelId::Re),
            "RQ" => Ok(ModelId::Rq),
            "YF" => Ok(ModelId::Yf),
            _ => Err(ModelError::UnknownModel(s.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown model \"{0}\" (expected one of AML, AT, JW, LN, LP, RE, RQ, YF)")]
    UnknownModel(String),
    #[error("{model} expects {expected} parameters, got {got}")]
    Arity {
        model: ModelId,
        expected: usize,
        got: usize,
    },
    #[error("parameter {name} of {model} must be {requirement}, got {value}")]
    Constraint {
        model: ModelId,
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("{model} is undefined at t = {t}")]
    Domain { model: ModelId, t: f64 },
    #[error("sample has {got} data points; at least {min} are required")]
    SampleTooShort { got: usize, min: usize },
}

/// A validated parameter vector bound to its model.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    model: ModelId,
    values: Vec<f64>,
}

impl ParamVector {
    /// Validates arity, finiteness, and the model's positivity constraints.
    pub fn new(model: ModelId, values: Vec<f64>) -> Result<Self, ModelError> {
        if values.len() != model.arity() {
            return Err(ModelError::Arity {
                model,
                expected: model.arity(),
                got: values.len(),
            });
        }
        for ((&v, &bound), &name) in values
            .iter()
            .zip(model.bounds())
            .zip(model.param_names())
        {
            if !v.is_finite() {
                return Err(ModelError::Constraint {
                    model,
                    name,
                    requirement: "finite",
                    value: v,
                });
            }
            match bound {
                ParamBound::Free => {}
                ParamBound::Positive if v <= 0.0 => {
                    return Err(ModelError::Constraint {
                        model,
                        name,
                        requirement: "positive",
                        value: v,
                    });
                }
                ParamBound::NonNegative if v < 0.0 => {
                    return Err(ModelError::Constraint {
                        model,
                        name,
                        requirement: "nonnegative",
                        value: v,
                    });
                }
                _ => {}
            }
        }
        Ok(ParamVector { model, values })
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_domain(model: ModelId, t: f64) -> Result<(), ModelError> {
    let ok = match model {
        ModelId::At => t.is_finite() && t > 0.0,
        _ => t.is_finite() && t >= 0.0,
    };
    if ok {
        Ok(())
    } else {
        Err(ModelError::Domain { model, t })
    }
}

/// Expected cumulative count `Ω(t)` of the curve at `t` months.
///
/// `t` must be nonnegative (strictly positive for AT). Pure and
/// deterministic: identical inputs give bit-identical outputs.
pub fn evaluate(params: &ParamVector, t: f64) -> Result<f64, ModelError> {
    check_domain(params.model, t)?;
    let p = &params.values;
    Ok(match params.model {
        ModelId::Aml => {
            let (a, b, c) = (p[0], p[1], p[2]);
            let e = (-a * b * t).exp();
            if e == 0.0 {
                b
            } else {
                b / (b * c * e + 1.0)
            }
        }
        ModelId::At => p[0] * t.ln() + p[1],
        ModelId::Jw => {
            let (g, beta, alpha) = (p[0], p[1], p[2]);
            g * (1.0 - (-(t / beta).powf(alpha)).exp())
        }
        ModelId::Ln => p[0] * t + p[1],
        ModelId::Lp => p[0] * (1.0 + p[1] * t).ln(),
        ModelId::Re => p[0] * (1.0 - (-p[1] * t).exp()),
        ModelId::Rq => p[0] * t * t / 2.0 + p[1] * t,
        ModelId::Yf => {
            let (g, tau, sigma) = (p[0], p[1], p[2]);
            let s = sigma * SQRT_2;
            g / 2.0 * (erf((t - tau) / s) + erf((t + tau) / s))
        }
    })
}

/// Partial derivatives `∂Ω/∂pᵢ`, in parameter order.
pub fn gradient(params: &ParamVector, t: f64) -> Result<Vec<f64>, ModelError> {
    check_domain(params.model, t)?;
    let p = &params.values;
    Ok(match params.model {
        ModelId::Aml => {
            let (a, b, c) = (p[0], p[1], p[2]);
            let e = (-a * b * t).exp();
            if e == 0.0 {
                // saturated: Ω ≡ B
                vec![0.0, 1.0, 0.0]
            } else {
                let d = b * c * e + 1.0;
                let d2 = d * d;
                vec![
                    b * b * b * c * t * e / d2,
                    (1.0 + a * b * b * c * t * e) / d2,
                    -(b * b * e) / d2,
                ]
            }
        }
        ModelId::At => vec![t.ln(), 1.0],
        ModelId::Jw => {
            let (g, beta, alpha) = (p[0], p[1], p[2]);
            let u = (t / beta).powf(alpha);
            if !u.is_finite() {
                // saturated: Ω ≡ γ
                vec![1.0, 0.0, 0.0]
            } else {
                let e = (-u).exp();
                let ue = u * e;
                let d_alpha = if u == 0.0 { 0.0 } else { g * ue * (t / beta).ln() };
                vec![1.0 - e, -g * alpha * ue / beta, d_alpha]
            }
        }
        ModelId::Ln => vec![t, 1.0],
        ModelId::Lp => {
            let (b0, b1) = (p[0], p[1]);
            vec![(1.0 + b1 * t).ln(), b0 * t / (1.0 + b1 * t)]
        }
        ModelId::Re => {
            let (n, lambda) = (p[0], p[1]);
            let e = (-lambda * t).exp();
            vec![1.0 - e, n * t * e]
        }
        ModelId::Rq => vec![t * t / 2.0, t],
        ModelId::Yf => {
            let (g, tau, sigma) = (p[0], p[1], p[2]);
            let s = sigma * SQRT_2;
            let um = (t - tau) / s;
            let up = (t + tau) / s;
            let em = (-um * um).exp();
            let ep = (-up * up).exp();
            // u·exp(-u²) → 0 in the deep tails; avoid inf · 0
            let flank_m = if em == 0.0 { 0.0 } else { um * em };
            let flank_p = if ep == 0.0 { 0.0 } else { up * ep };
            vec![
                0.5 * (erf(um) + erf(up)),
                g / (sigma * (2.0 * std::f64::consts::PI).sqrt()) * (ep - em),
                -g / (SQRT_PI * sigma) * (flank_m + flank_p),
            ]
        }
    })
}

/// Minimum number of data points an observed sample must have before a fit
/// is attempted.
pub const MIN_POINTS: usize = 5;

/// Data-driven starting point for fitting `model` to `sample`.
pub fn initial_guess(model: ModelId, sample: &ObservedSample) -> Result<ParamVector, ModelError> {
    let counts: Vec<f64> = sample.counts().iter().map(|&c| c as f64).collect();
    initial_guess_for_counts(model, &counts)
}

/// [`initial_guess`] over a raw cumulative series (month 1 first).
///
/// Heuristics per family: LN and AT use the end-point slope, RQ the two-point
/// quadratic inversion, RE and AML invert the curve through the asymptote
/// headroom `1.1 × last count`, JW and YF place their shape parameters from
/// the half-growth month. All outputs satisfy the model's constraints.
pub fn initial_guess_for_counts(model: ModelId, counts: &[f64]) -> Result<ParamVector, ModelError> {
    if counts.len() < MIN_POINTS {
        return Err(ModelError::SampleTooShort {
            got: counts.len(),
            min: MIN_POINTS,
        });
    }
    let n = counts.len();
    let t_last = n as f64;
    let y_first = counts[0];
    let y_last = counts[n - 1];
    let mid = n / 2; // month index, 1-based
    let t_mid = mid as f64;
    let y_mid = counts[mid - 1];

    const FLOOR: f64 = 1e-3;
    let values = match model {
        ModelId::Ln => {
            let a = (y_last - y_first) / (t_last - 1.0);
            vec![a, y_first - a]
        }
        ModelId::At => {
            let s = (y_last - y_first) / t_last.ln();
            vec![s, y_first]
        }
        ModelId::Rq => {
            // exact through (1, y1) and (n, y_last)
            let a = 2.0 * (y_last - t_last * y_first) / (t_last * t_last - t_last);
            vec![a, y_first - a / 2.0]
        }
        ModelId::Re => {
            if y_last <= 0.0 {
                vec![1.0, 0.1]
            } else {
                let cap = 1.1 * y_last;
                let lambda = -(1.0 - y_first / cap).max(FLOOR).ln();
                vec![cap, lambda.max(FLOOR)]
            }
        }
        ModelId::Aml => {
            if y_last <= 0.0 || y_mid <= 0.0 {
                vec![0.01, 1.0, 1.0]
            } else {
                let b = 1.1 * y_last;
                // invert B·C·exp(-A·B·t) = B/y - 1 at the midpoint and the end
                let r_mid = b / y_mid - 1.0;
                let r_last = b / y_last - 1.0;
                let a = ((r_mid / r_last).ln() / (b * (t_last - t_mid))).max(FLOOR / b);
                let c = (r_mid * (a * b * t_mid).exp() / b).max(FLOOR);
                vec![a, b, c]
            }
        }
        ModelId::Jw => {
            if y_last <= 0.0 {
                vec![1.0, t_last, 1.0]
            } else {
                let g = 1.1 * y_last;
                let u_last = -(1.0 - y_last / g).ln(); // > 0
                let alpha = if y_mid > 0.0 && y_mid < y_last {
                    let u_mid = -(1.0 - y_mid / g).ln();
                    ((u_last / u_mid).ln() / (t_last / t_mid).ln()).clamp(0.2, 10.0)
                } else {
                    1.0
                };
                let beta = (t_last * u_last.powf(-1.0 / alpha)).max(FLOOR);
                vec![g, beta, alpha]
            }
        }
        ModelId::Lp => {
            let b0 = (y_last.max(FLOOR)) / (1.0 + t_last).ln();
            vec![b0, 1.0]
        }
        ModelId::Yf => {
            if y_last <= 0.0 {
                vec![1.0, t_mid, t_last / 4.0]
            } else {
                let g = 1.1 * y_last;
                let half = y_last / 2.0;
                let t_half = counts
                    .iter()
                    .position(|&y| y >= half)
                    .map(|i| (i + 1) as f64)
                    .unwrap_or(t_mid);
                let sigma = ((t_last - t_half) / 2.0).max(0.75);
                vec![g, t_half, sigma]
            }
        }
    };
    ParamVector::new(model, values)
}
