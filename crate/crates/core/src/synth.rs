//! Planted-partition (two-level stochastic block model) datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Dataset, FeatureMatrix, Labels, SplitFractions, SplitMasks};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedPartition {
    pub nodes: usize,
    pub classes: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Defaults to `classes` when `None`; must be at least `classes`.
    pub feature_dim: Option<usize>,
    pub feature_noise: f64,
    pub seed: u64,
    pub split: SplitFractions,
}

impl Default for PlantedPartition {
    fn default() -> Self {
        PlantedPartition {
            nodes: 400,
            classes: 4,
            p_in: 0.10,
            p_out: 0.01,
            feature_dim: None,
            feature_noise: 1.0,
            seed: 0,
            split: SplitFractions::STANDARD,
        }
    }
}

impl PlantedPartition {
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 {
            return Err(Error::Config("classes must be at least 1".into()));
        }
        if self.classes > self.nodes {
            return Err(Error::Config(format!(
                "classes ({}) exceeds nodes ({})",
                self.classes, self.nodes
            )));
        }
        if !(0.0..=1.0).contains(&self.p_in) || !(0.0..=1.0).contains(&self.p_out) {
            return Err(Error::Config("edge probabilities must lie in [0, 1]".into()));
        }
        if self.p_out > self.p_in {
            return Err(Error::Config("p_out must not exceed p_in".into()));
        }
        if self.feature_dim() < self.classes {
            return Err(Error::Config(format!(
                "feature_dim ({}) must be at least classes ({})",
                self.feature_dim(),
                self.classes
            )));
        }
        if !self.feature_noise.is_finite() || self.feature_noise < 0.0 {
            return Err(Error::Config("feature_noise must be finite and >= 0".into()));
        }
        self.split.validate()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim.unwrap_or(self.classes)
    }

    /// Class of node `i` under round-robin assignment.
    pub fn class_of(&self, i: usize) -> usize {
        i % self.classes
    }

    /// Expected number of intra- and inter-class edges.
    pub fn expected_edges(&self) -> (f64, f64) {
        let sizes: Vec<f64> = (0..self.classes)
            .map(|c| ((self.nodes - c) as f64 / self.classes as f64).ceil())
            .collect();
        let intra: f64 = sizes.iter().map(|s| s * (s - 1.0) / 2.0).sum();
        let total = self.nodes as f64 * (self.nodes as f64 - 1.0) / 2.0;
        (intra * self.p_in, (total - intra) * self.p_out)
    }

    /// Generates the dataset. Deterministic in all fields, including `seed`.
    pub fn generate(&self) -> Result<Dataset> {
        self.validate()?;
        let n = self.nodes;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);

        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                let p = if self.class_of(u) == self.class_of(v) {
                    self.p_in
                } else {
                    self.p_out
                };
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let graph = Graph::from_edges(n, edges)?;

        let d = self.feature_dim();
        let noise = Normal::new(0.0, self.feature_noise)
            .map_err(|e| Error::Config(format!("feature_noise: {e}")))?;
        let mut values = vec![0.0; n * d];
        for (i, row) in values.chunks_exact_mut(d).enumerate() {
            row[self.class_of(i)] = 1.0;
            if self.feature_noise > 0.0 {
                for v in row.iter_mut() {
                    *v += noise.sample(&mut rng);
                }
            }
        }
        let features = FeatureMatrix::new(n, d, values)?;

        let y: Vec<usize> = (0..n).map(|i| self.class_of(i)).collect();
        let labels = Labels::from_classes(self.classes, &y)?;
        let split = SplitMasks::stratified(&labels, self.split, rng.random())?;

        let name = format!(
            "planted-n{}-c{}-pin{}-pout{}-noise{}-seed{}",
            self.nodes, self.classes, self.p_in, self.p_out, self.feature_noise, self.seed
        );
        Dataset::new(name, graph, features, labels, split)
    }
}
