//! Evaluation toolkit for vulnerability discovery models (VDMs).
//!
//! A VDM is a parametric function `Ω(t)` for the cumulative number of
//! vulnerabilities reported against a software release `t` months after it
//! shipped. This crate implements the full evaluation methodology around
//! such models:
//!
//! 1. **Ingest** ([`ingest`]) — load vulnerability records, realize the five
//!    cross-source data-set joins, and extract monthly cumulative samples per
//!    release and horizon.
//! 2. **Fit** ([`fit`]) — estimate the parameters of eight model families
//!    ([`models`]) for each observed sample by damped nonlinear least
//!    squares.
//! 3. **Goodness of fit** ([`gof`]) — score every fitted curve with a
//!    Pearson χ² test and classify it as a good, inconclusive, or poor fit.
//! 4. **Quality and predictability** ([`quality`], [`predict`]) — aggregate
//!    the classifications into per-horizon quality series and into the
//!    geometric-mean predictability of frozen curves over future horizons.
//! 5. **Compare** ([`compare`]) — rank models per usage scenario with
//!    one-sided Wilcoxon rank-sum tests under a Bonferroni correction and
//!    emit the resulting better-than graph.
//!
//! The [`pipeline`] module wires the five steps into reproducible batch
//! commands with persisted intermediate stores; the `vdm` binary is a thin
//! CLI over it. Each major capability also has a runnable example under
//! `examples/`.

pub mod compare;
pub mod fit;
pub mod gof;
pub mod ingest;
pub mod models;
pub mod pipeline;
pub mod predict;
pub mod quality;
pub mod special;

pub use fit::{fit, fit_all, FitConfig, FitError, FittedCurve};
pub use gof::{classify, evaluate_sample, EvaluatedSample, FitClass, GofOutcome, UntestablePolicy};
pub use ingest::{DataSetId, ObservedSample, RecordStore, SampleKey, SampleSet, VulnRecord};
pub use models::{evaluate, gradient, initial_guess, ModelId, ParamVector};
