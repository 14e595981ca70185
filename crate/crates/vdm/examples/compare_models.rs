//! Pairwise model comparison and the better-than graph.
//!
//! ```bash
//! cargo run -p vdm --example compare_models
//! ```

use std::collections::BTreeMap;

use vdm::compare::{
    build_graph, compare_pair, rank_sum_one_sided, ModelSeries, Scenario, DEFAULT_ALPHA,
};
use vdm::models::ModelId;

fn main() {
    // the one-sided rank-sum test underlying every comparison
    let strong = [0.9, 0.85, 0.95, 0.8, 0.88, 0.92, 0.84, 0.9, 0.87, 0.93];
    let weak = [0.3, 0.45, 0.2, 0.5, 0.35, 0.4, 0.25, 0.3, 0.48, 0.42];
    let p = rank_sum_one_sided(&strong, &weak).unwrap();
    println!("rank-sum p-value (strong > weak): {p:.6}");

    let result = compare_pair(
        ModelId::Aml,
        ModelId::Ln,
        &strong,
        &weak,
        &strong,
        &weak,
        0.01,
    )
    .unwrap();
    println!(
        "AML vs LN: {} on {} (p_pred = {:.5}, p_qual = {:.5})\n",
        result.direction, result.basis, result.p_predictability, result.p_quality
    );

    // a four-model tournament from synthetic per-horizon series
    let mut series = BTreeMap::new();
    let profile = |base: f64, slope: f64| -> Vec<f64> {
        (0..19).map(|i| (base + slope * i as f64).clamp(0.0, 1.0)).collect()
    };
    series.insert(ModelId::Aml, ModelSeries { predictability: profile(0.85, 0.002), quality: profile(0.8, 0.003) });
    series.insert(ModelId::Ln, ModelSeries { predictability: profile(0.7, -0.01), quality: profile(0.75, -0.008) });
    series.insert(ModelId::Re, ModelSeries { predictability: profile(0.5, -0.005), quality: profile(0.55, -0.004) });
    series.insert(ModelId::At, ModelSeries { predictability: profile(0.2, 0.0), quality: profile(0.15, 0.0) });

    let graph = build_graph(&series, DEFAULT_ALPHA).unwrap();
    let best: Vec<&str> = graph.best.iter().map(|m| m.name()).collect();
    println!(
        "tournament over {} models, alpha_effective = {:.4}, best: {}",
        graph.nodes.len(),
        graph.alpha_effective,
        best.join(", ")
    );
    for edge in &graph.edges {
        println!("  {} beats {} ({})", edge.from, edge.to, edge.style.name());
    }
    println!("\n{}", graph.to_dot());

    println!("scenario presets:");
    for scenario in Scenario::ALL {
        let (lo, hi) = scenario.observation();
        println!("  {scenario}: observe months {lo}..{hi}, predict {} ahead", scenario.span());
    }
}
