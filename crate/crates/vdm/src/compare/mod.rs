//! Pairwise and tournament comparison of models.
//!
//! A model beats another when its predictability is significantly greater
//! under a one-sided rank-sum test, or, when the predictability test is
//! inconclusive, when its temporal quality is. Running one model against
//! `k` opponents Bonferroni-corrects the significance level to `α/k`. The
//! decided pairs form a directed better-than graph whose edge style records
//! the basis of each win.

mod rank;

pub use rank::{
    rank_sum_exact, rank_sum_normal, rank_sum_one_sided, signed_rank_one_sided_above,
    signed_rank_one_sided_below, EXACT_LIMIT,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::models::ModelId;

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("rank tests need at least one value on each side")]
    EmptyInput,
    #[error("model {model} has no series data for the comparison")]
    MissingSeries { model: ModelId },
}

/// Baseline significance level of the evaluation.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Bonferroni-corrected significance level for `comparisons` simultaneous
/// tests.
pub fn bonferroni(alpha: f64, comparisons: usize) -> f64 {
    alpha / comparisons.max(1) as f64
}

/// A usage scenario: observation window and prediction time span, in months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    /// Plan for short-term support: observe months 6–24, predict 3 ahead.
    ShortTerm,
    /// Plan for long-term support: observe months 6–24, predict 12 ahead.
    LongTerm,
    /// Upgrade or keep: observe months 6–12, predict 6 ahead.
    UpgradeOrKeep,
    /// Historic analysis: observe months 24–36, predict 12 ahead.
    Historic,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::ShortTerm,
        Scenario::LongTerm,
        Scenario::UpgradeOrKeep,
        Scenario::Historic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ShortTerm => "short-term",
            Scenario::LongTerm => "long-term",
            Scenario::UpgradeOrKeep => "upgrade-or-keep",
            Scenario::Historic => "historic",
        }
    }

    /// Observation period (inclusive horizon range).
    pub fn observation(self) -> (u32, u32) {
        match self {
            Scenario::ShortTerm | Scenario::LongTerm => (6, 24),
            Scenario::UpgradeOrKeep => (6, 12),
            Scenario::Historic => (24, 36),
        }
    }

    /// Prediction time span Δ.
    pub fn span(self) -> u32 {
        match self {
            Scenario::ShortTerm => 3,
            Scenario::LongTerm => 12,
            Scenario::UpgradeOrKeep => 6,
            Scenario::Historic => 12,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "short-term" => Ok(Scenario::ShortTerm),
            "long-term" => Ok(Scenario::LongTerm),
            "upgrade-or-keep" => Ok(Scenario::UpgradeOrKeep),
            "historic" => Ok(Scenario::Historic),
            other => Err(format!(
                "unknown scenario \"{other}\" (expected short-term, long-term, upgrade-or-keep, or historic)"
            )),
        }
    }
}

/// What a decided comparison was decided on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonBasis {
    Predictability,
    Quality,
    Both,
    Inconclusive,
}

impl ComparisonBasis {
    pub fn name(self) -> &'static str {
        match self {
            ComparisonBasis::Predictability => "predictability",
            ComparisonBasis::Quality => "quality",
            ComparisonBasis::Both => "both",
            ComparisonBasis::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for ComparisonBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FirstBetter,
    SecondBetter,
    Neither,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::FirstBetter => "a_better",
            Direction::SecondBetter => "b_better",
            Direction::Neither => "none",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one pairwise comparison.
#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub model_a: ModelId,
    pub model_b: ModelId,
    pub basis: ComparisonBasis,
    pub direction: Direction,
    /// One-sided p-value of ρ(a) > ρ(b).
    pub p_predictability: f64,
    /// One-sided p-value of Q(a) > Q(b).
    pub p_quality: f64,
    pub alpha_effective: f64,
}

fn decide(p: f64, alpha: f64) -> Direction {
    if p < alpha {
        Direction::FirstBetter
    } else if p >= 1.0 - alpha {
        Direction::SecondBetter
    } else {
        Direction::Neither
    }
}

/// Compares two models: predictability first, temporal quality as the
/// tie-breaker, both at the Bonferroni-corrected level `alpha_effective`.
pub fn compare_pair(
    model_a: ModelId,
    model_b: ModelId,
    rho_a: &[f64],
    rho_b: &[f64],
    quality_a: &[f64],
    quality_b: &[f64],
    alpha_effective: f64,
) -> Result<ComparisonResult, CompareError> {
    let p_predictability = rank_sum_one_sided(rho_a, rho_b)?;
    let p_quality = rank_sum_one_sided(quality_a, quality_b)?;
    let by_predictability = decide(p_predictability, alpha_effective);
    let by_quality = decide(p_quality, alpha_effective);

    let (direction, basis) = match by_predictability {
        Direction::Neither => match by_quality {
            Direction::Neither => (Direction::Neither, ComparisonBasis::Inconclusive),
            decided => (decided, ComparisonBasis::Quality),
        },
        decided if by_quality == decided => (decided, ComparisonBasis::Both),
        decided => (decided, ComparisonBasis::Predictability),
    };

    Ok(ComparisonResult {
        model_a,
        model_b,
        basis,
        direction,
        p_predictability,
        p_quality,
        alpha_effective,
    })
}

/// Edge style in the better-than graph, mirroring the comparison basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeStyle {
    /// Better on both predictability and quality.
    Solid,
    /// Better on predictability only.
    Dashed,
    /// Better on quality only.
    Dotted,
}

impl EdgeStyle {
    pub fn name(self) -> &'static str {
        match self {
            EdgeStyle::Solid => "solid",
            EdgeStyle::Dashed => "dashed",
            EdgeStyle::Dotted => "dotted",
        }
    }

    fn from_basis(basis: ComparisonBasis) -> Option<EdgeStyle> {
        match basis {
            ComparisonBasis::Both => Some(EdgeStyle::Solid),
            ComparisonBasis::Predictability => Some(EdgeStyle::Dashed),
            ComparisonBasis::Quality => Some(EdgeStyle::Dotted),
            ComparisonBasis::Inconclusive => None,
        }
    }
}

/// Directed edge: `from` is better than `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: ModelId,
    pub to: ModelId,
    pub style: EdgeStyle,
}

/// The per-model inputs of a tournament: the predictability set ρ and the
/// temporal-quality set over the scenario's observation window.
#[derive(Debug, Clone, Default)]
pub struct ModelSeries {
    pub predictability: Vec<f64>,
    pub quality: Vec<f64>,
}

/// Better-than graph over a set of models.
#[derive(Debug, Clone)]
pub struct ComparisonGraph {
    pub nodes: Vec<ModelId>,
    pub edges: Vec<GraphEdge>,
    /// Every pairwise result, including inconclusive ones.
    pub results: Vec<ComparisonResult>,
    pub alpha_effective: f64,
    /// Models with no incoming edge and maximal out-degree; ties reported,
    /// not broken.
    pub best: Vec<ModelId>,
}

impl ComparisonGraph {
    /// Graphviz DOT rendering; best models are double-circled.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph comparison {\n    rankdir=LR;\n");
        for node in &self.nodes {
            if self.best.contains(node) {
                out.push_str(&format!("    \"{node}\" [peripheries=2];\n"));
            } else {
                out.push_str(&format!("    \"{node}\";\n"));
            }
        }
        for edge in &self.edges {
            out.push_str(&format!(
                "    \"{}\" -> \"{}\" [style={}];\n",
                edge.from,
                edge.to,
                edge.style.name()
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Runs every pairwise comparison and assembles the better-than graph.
///
/// The significance level is Bonferroni-corrected to
/// `alpha / (|models| - 1)`, the number of opponents each model faces.
pub fn build_graph(
    series: &BTreeMap<ModelId, ModelSeries>,
    alpha: f64,
) -> Result<ComparisonGraph, CompareError> {
    let nodes: Vec<ModelId> = series.keys().copied().collect();
    let alpha_effective = bonferroni(alpha, nodes.len().saturating_sub(1));
    let mut edges = Vec::new();
    let mut results = Vec::new();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            let sa = &series[&a];
            let sb = &series[&b];
            let result = compare_pair(
                a,
                b,
                &sa.predictability,
                &sb.predictability,
                &sa.quality,
                &sb.quality,
                alpha_effective,
            )?;
            if let Some(style) = EdgeStyle::from_basis(result.basis) {
                let (from, to) = match result.direction {
                    Direction::FirstBetter => (a, b),
                    Direction::SecondBetter => (b, a),
                    Direction::Neither => unreachable!("decided basis implies a direction"),
                };
                edges.push(GraphEdge { from, to, style });
            }
            results.push(result);
        }
    }

    let mut best = Vec::new();
    if !edges.is_empty() {
        let undefeated: Vec<ModelId> = nodes
            .iter()
            .copied()
            .filter(|&m| !edges.iter().any(|e| e.to == m))
            .collect();
        let out_degree = |m: ModelId| edges.iter().filter(|e| e.from == m).count();
        if let Some(max_out) = undefeated.iter().map(|&m| out_degree(m)).max() {
            if max_out > 0 {
                best = undefeated
                    .into_iter()
                    .filter(|&m| out_degree(m) == max_out)
                    .collect();
            }
        }
    }

    Ok(ComparisonGraph {
        nodes,
        edges,
        results,
        alpha_effective,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(predictability: &[f64], quality: &[f64]) -> ModelSeries {
        ModelSeries {
            predictability: predictability.to_vec(),
            quality: quality.to_vec(),
        }
    }

    #[test]
    fn bonferroni_levels() {
        assert!((bonferroni(0.05, 7) - 0.05 / 7.0).abs() < 1e-12);
        assert!((bonferroni(0.05, 5) - 0.01).abs() < 1e-12);
        assert_eq!(bonferroni(0.05, 0), 0.05);
    }

    #[test]
    fn maximal_separation_decides_on_predictability() {
        let ones = vec![1.0; 20];
        let zeros = vec![0.0; 20];
        let flat = vec![0.5; 20];
        let result = compare_pair(
            ModelId::Aml,
            ModelId::At,
            &ones,
            &zeros,
            &flat,
            &flat,
            0.01,
        )
        .unwrap();
        assert_eq!(result.direction, Direction::FirstBetter);
        assert_eq!(result.basis, ComparisonBasis::Predictability);
    }

    #[test]
    fn identical_series_are_inconclusive() {
        let flat = vec![0.5; 25];
        let result =
            compare_pair(ModelId::Ln, ModelId::Lp, &flat, &flat, &flat, &flat, 0.01).unwrap();
        assert_eq!(result.direction, Direction::Neither);
        assert_eq!(result.basis, ComparisonBasis::Inconclusive);
    }

    #[test]
    fn quality_breaks_a_predictability_tie() {
        let flat = vec![0.5; 25];
        let high: Vec<f64> = (0..25).map(|i| 0.9 + 0.001 * i as f64).collect();
        let low: Vec<f64> = (0..25).map(|i| 0.1 + 0.001 * i as f64).collect();
        let result =
            compare_pair(ModelId::Ln, ModelId::Lp, &flat, &flat, &high, &low, 0.01).unwrap();
        assert_eq!(result.direction, Direction::FirstBetter);
        assert_eq!(result.basis, ComparisonBasis::Quality);
        // and losing on quality flips the direction
        let result =
            compare_pair(ModelId::Ln, ModelId::Lp, &flat, &flat, &low, &high, 0.01).unwrap();
        assert_eq!(result.direction, Direction::SecondBetter);
    }

    #[test]
    fn antisymmetry_under_argument_swap() {
        let strong: Vec<f64> = (0..15).map(|i| 0.7 + 0.01 * i as f64).collect();
        let weak: Vec<f64> = (0..15).map(|i| 0.2 + 0.01 * i as f64).collect();
        let ab = compare_pair(ModelId::Aml, ModelId::Ln, &strong, &weak, &strong, &weak, 0.05)
            .unwrap();
        let ba = compare_pair(ModelId::Ln, ModelId::Aml, &weak, &strong, &weak, &strong, 0.05)
            .unwrap();
        assert_eq!(ab.direction, Direction::FirstBetter);
        assert_eq!(ba.direction, Direction::SecondBetter);
    }

    #[test]
    fn single_model_graph_has_no_edges() {
        let mut input = BTreeMap::new();
        input.insert(ModelId::Aml, series(&[1.0; 10], &[1.0; 10]));
        let graph = build_graph(&input, DEFAULT_ALPHA).unwrap();
        assert!(graph.edges.is_empty());
        assert!(graph.best.is_empty());
    }

    #[test]
    fn two_separated_models_give_one_solid_edge() {
        let mut input = BTreeMap::new();
        input.insert(ModelId::Aml, series(&[1.0; 20], &[1.0; 20]));
        input.insert(ModelId::At, series(&[0.0; 20], &[0.0; 20]));
        let graph = build_graph(&input, DEFAULT_ALPHA).unwrap();
        assert_eq!(graph.edges.len(), 1);
        let edge = graph.edges[0];
        assert_eq!(edge.from, ModelId::Aml);
        assert_eq!(edge.to, ModelId::At);
        assert_eq!(edge.style, EdgeStyle::Solid);
        assert_eq!(graph.best, vec![ModelId::Aml]);
        let dot = graph.to_dot();
        assert!(dot.contains("\"AML\" -> \"AT\" [style=solid]"), "{dot}");
        assert!(dot.contains("\"AML\" [peripheries=2]"), "{dot}");
    }

    #[test]
    fn six_model_tournament_uses_alpha_of_one_percent() {
        let mut input = BTreeMap::new();
        for model in [ModelId::Aml, ModelId::Jw, ModelId::Ln, ModelId::Lp, ModelId::Re, ModelId::Yf] {
            input.insert(model, series(&[0.5; 10], &[0.5; 10]));
        }
        let graph = build_graph(&input, DEFAULT_ALPHA).unwrap();
        assert!((graph.alpha_effective - 0.01).abs() < 1e-12);
        // identical series across all models: no edges at all
        assert!(graph.edges.is_empty());
    }

    #[test]
    fn scenario_presets() {
        assert_eq!(Scenario::ShortTerm.observation(), (6, 24));
        assert_eq!(Scenario::ShortTerm.span(), 3);
        assert_eq!(Scenario::LongTerm.span(), 12);
        assert_eq!(Scenario::UpgradeOrKeep.observation(), (6, 12));
        assert_eq!(Scenario::UpgradeOrKeep.span(), 6);
        assert_eq!(Scenario::Historic.observation(), (24, 36));
        assert_eq!("short-term".parse::<Scenario>().unwrap(), Scenario::ShortTerm);
        assert!("quarterly".parse::<Scenario>().is_err());
    }
}
