//! Fixtures shared by the benchmarks.

use f2lp_core::{Dataset, PlantedPartition};

/// Planted partition with roughly 10 within-class neighbors per node and
/// 16-dimensional noisy features.
pub fn fixture(nodes: usize) -> Dataset {
    let classes = 5;
    let class_size = (nodes / classes).max(1) as f64;
    PlantedPartition {
        nodes,
        classes,
        p_in: (10.0 / class_size).min(1.0),
        p_out: (2.0 / nodes as f64).min(1.0),
        feature_dim: Some(16),
        feature_noise: 0.8,
        seed: 0,
        ..Default::default()
    }
    .generate()
    .expect("fixture parameters are valid")
}
