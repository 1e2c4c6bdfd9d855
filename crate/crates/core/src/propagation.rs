//! Node-wise adaptive feature propagation.
//!
//! Every node gets its own teleport probability `alpha_i` and depth `k_i`,
//! derived from its local clustering coefficient. The working matrix evolves
//! globally,
//!
//! ```text
//! H(0)   = X
//! H(t+1) = (I - diag(alpha)) A H(t) + diag(alpha) X
//! ```
//!
//! for `max_i k_i` steps, and row `i` of the output is the snapshot of
//! `H(k_i)`. A node whose depth is reached keeps feeding its live row of `H`
//! to its neighbors in later steps; only its output row stops changing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LccMapping {
    /// Linear in `1 - lcc`: `lcc = 1` maps to the lower bounds, `lcc = 0` to
    /// the upper bounds.
    LinearComplement,
}

/// Ranges for the per-node propagation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub mapping: LccMapping,
}

impl KernelConfig {
    pub fn new(k_min: usize, k_max: usize, alpha_min: f64, alpha_max: f64) -> Result<Self> {
        let cfg = KernelConfig {
            k_min,
            k_max,
            alpha_min,
            alpha_max,
            mapping: LccMapping::LinearComplement,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_min < 1 {
            return Err(Error::Config(format!("k_min must be >= 1, got {}", self.k_min)));
        }
        if self.k_min > self.k_max {
            return Err(Error::Config(format!(
                "k_min ({}) must not exceed k_max ({})",
                self.k_min, self.k_max
            )));
        }
        if !(self.alpha_min > 0.0) {
            return Err(Error::Config(format!("alpha_min must be > 0, got {}", self.alpha_min)));
        }
        if !(self.alpha_max < 1.0) {
            return Err(Error::Config(format!("alpha_max must be < 1, got {}", self.alpha_max)));
        }
        if self.alpha_min > self.alpha_max {
            return Err(Error::Config(format!(
                "alpha_min ({}) must not exceed alpha_max ({})",
                self.alpha_min, self.alpha_max
            )));
        }
        Ok(())
    }
}

impl Default for KernelConfig {
    /// `k in [3, 15]`, `alpha in [0.1, 0.2]`.
    fn default() -> Self {
        KernelConfig {
            k_min: 3,
            k_max: 15,
            alpha_min: 0.1,
            alpha_max: 0.2,
            mapping: LccMapping::LinearComplement,
        }
    }
}

/// Per-node teleport probability and propagation depth.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationParams {
    alpha: Vec<f64>,
    k: Vec<usize>,
}

impl PropagationParams {
    /// Any `alpha` in `[0, 1]` and any depth, including 0, are accepted.
    pub fn new(alpha: Vec<f64>, k: Vec<usize>) -> Result<Self> {
        if alpha.len() != k.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} alphas, {} depths",
                alpha.len(),
                k.len()
            )));
        }
        if let Some(a) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::OutOfRange(format!("alpha {a} outside [0, 1]")));
        }
        Ok(PropagationParams { alpha, k })
    }

    pub fn constant(n: usize, alpha: f64, k: usize) -> Result<Self> {
        Self::new(vec![alpha; n], vec![k; n])
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn max_k(&self) -> usize {
        self.k.iter().copied().max().unwrap_or(0)
    }
}

/// Maps clustering coefficients to per-node `(alpha_i, k_i)`.
///
/// Higher clustering gives lower `alpha` (more smoothing) and fewer steps.
/// Depths are rounded half away from zero and clamped to `[k_min, k_max]`;
/// `alpha` is clamped to `[alpha_min, alpha_max]`.
pub fn map_lcc_to_params(lcc: &[f64], cfg: &KernelConfig) -> Result<PropagationParams> {
    cfg.validate()?;
    if let Some(v) = lcc.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::OutOfRange(format!("clustering coefficient {v} outside [0, 1]")));
    }
    let (a_lo, a_hi) = (cfg.alpha_min, cfg.alpha_max);
    let (k_lo, k_hi) = (cfg.k_min as f64, cfg.k_max as f64);
    let mut alpha = Vec::with_capacity(lcc.len());
    let mut k = Vec::with_capacity(lcc.len());
    for &c in lcc {
        let spread = match cfg.mapping {
            LccMapping::LinearComplement => 1.0 - c,
        };
        alpha.push((a_lo + spread * (a_hi - a_lo)).clamp(a_lo, a_hi));
        k.push((k_lo + spread * (k_hi - k_lo)).round().clamp(k_lo, k_hi) as usize);
    }
    Ok(PropagationParams { alpha, k })
}

/// Runs the adaptive propagation and returns the per-node snapshots.
/// Nodes with `k_i = 0` keep their input row.
pub fn adaptive_propagate(
    adj: &NormalizedAdjacency,
    x: &FeatureMatrix,
    params: &PropagationParams,
) -> Result<FeatureMatrix> {
    let n = adj.num_nodes();
    if x.rows() != n || params.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "adjacency has {n} nodes, features {} rows, params {}",
            x.rows(),
            params.len()
        )));
    }
    let d = x.cols();
    let max_k = params.max_k();
    let mut out = x.clone();
    if d == 0 || max_k == 0 {
        return Ok(out);
    }

    let mut due: Vec<Vec<usize>> = vec![Vec::new(); max_k + 1];
    for (i, &k) in params.k().iter().enumerate() {
        due[k].push(i);
    }

    let mut h = x.clone();
    let mut next = FeatureMatrix::zeros(n, d);
    for step in 1..=max_k {
        next.values_mut()
            .par_chunks_mut(d)
            .enumerate()
            .for_each(|(i, row)| {
                row.fill(0.0);
                let (cols, weights) = adj.row(i);
                for (&j, &w) in cols.iter().zip(weights) {
                    for (acc, v) in row.iter_mut().zip(h.row(j)) {
                        *acc += w * v;
                    }
                }
                let a = params.alpha[i];
                for (acc, x0) in row.iter_mut().zip(x.row(i)) {
                    *acc = (1.0 - a) * *acc + a * x0;
                }
            });
        std::mem::swap(&mut h, &mut next);
        for &i in &due[step] {
            out.row_mut(i).copy_from_slice(h.row(i));
        }
    }
    Ok(out)
}

/// APPNP-style propagation with one `alpha` and one depth for every node.
pub fn fixed_propagate(
    adj: &NormalizedAdjacency,
    x: &FeatureMatrix,
    k: usize,
    alpha: f64,
) -> Result<FeatureMatrix> {
    let params = PropagationParams::constant(adj.num_nodes(), alpha, k)?;
    adaptive_propagate(adj, x, &params)
}
