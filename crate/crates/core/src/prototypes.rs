//! Class prototypes: geometric median via Weiszfeld iteration, or the
//! arithmetic mean.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, Labels};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeiszfeldConfig {
    /// Stop once the iterate moves less than this (Euclidean).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Distances below this are clamped, bounding each inverse-distance
    /// weight by `1 / singularity_epsilon`.
    pub singularity_epsilon: f64,
}

impl Default for WeiszfeldConfig {
    fn default() -> Self {
        WeiszfeldConfig {
            tolerance: 1e-6,
            max_iterations: 100,
            singularity_epsilon: 1e-12,
        }
    }
}

impl WeiszfeldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("weiszfeld tolerance must be > 0".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("weiszfeld max_iterations must be >= 1".into()));
        }
        if !(self.singularity_epsilon > 0.0) {
            return Err(Error::Config("singularity_epsilon must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrototypeMethod {
    GeometricMedian,
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricMedian {
    pub point: Vec<f64>,
    /// Weiszfeld updates applied; 0 for the one- and two-point shortcuts.
    pub iterations: usize,
    pub converged: bool,
    /// Sum of distances at the start point and after every update.
    pub objective_trace: Vec<f64>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Sum of Euclidean distances from `center` to every row of `points`.
pub fn sum_of_distances(points: &FeatureMatrix, center: &[f64]) -> f64 {
    points.iter_rows().map(|p| dist(p, center)).sum()
}

/// Normalized inverse-distance weights for one Weiszfeld update.
pub fn weiszfeld_weights(points: &FeatureMatrix, center: &[f64], singularity_epsilon: f64) -> Vec<f64> {
    let mut w: Vec<f64> = points
        .iter_rows()
        .map(|p| 1.0 / dist(p, center).max(singularity_epsilon))
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// One update: the weighted average of `points` under [`weiszfeld_weights`].
pub fn weiszfeld_step(points: &FeatureMatrix, center: &[f64], singularity_epsilon: f64) -> Vec<f64> {
    let w = weiszfeld_weights(points, center, singularity_epsilon);
    let mut next = vec![0.0; points.cols()];
    for (p, wi) in points.iter_rows().zip(&w) {
        for (acc, x) in next.iter_mut().zip(p) {
            *acc += wi * x;
        }
    }
    next
}

pub fn mean_prototype(points: &FeatureMatrix) -> Result<Vec<f64>> {
    if points.rows() == 0 {
        return Err(Error::Empty("mean of zero points".into()));
    }
    let mut acc = vec![0.0; points.cols()];
    for p in points.iter_rows() {
        for (a, x) in acc.iter_mut().zip(p) {
            *a += x;
        }
    }
    let m = points.rows() as f64;
    acc.iter_mut().for_each(|a| *a /= m);
    Ok(acc)
}

/// Point minimizing the sum of Euclidean distances to the rows of `points`,
/// found by Weiszfeld iteration started at the mean.
pub fn geometric_median(points: &FeatureMatrix, cfg: &WeiszfeldConfig) -> Result<GeometricMedian> {
    cfg.validate()?;
    if points.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("geometric median input".into()));
    }
    let shortcut = |point: Vec<f64>| GeometricMedian {
        objective_trace: vec![sum_of_distances(points, &point)],
        point,
        iterations: 0,
        converged: true,
    };
    match points.rows() {
        0 => return Err(Error::Empty("geometric median of zero points".into())),
        1 => return Ok(shortcut(points.row(0).to_vec())),
        2 => return Ok(shortcut(mean_prototype(points)?)),
        _ => {}
    }

    let mut center = mean_prototype(points)?;
    let mut trace = vec![sum_of_distances(points, &center)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        let next = weiszfeld_step(points, &center, cfg.singularity_epsilon);
        iterations += 1;
        let moved = dist(&next, &center);
        center = next;
        trace.push(sum_of_distances(points, &center));
        if moved < cfg.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::debug!("weiszfeld stopped after {iterations} iterations without converging");
    }
    Ok(GeometricMedian {
        point: center,
        iterations,
        converged,
        objective_trace: trace,
    })
}

/// Prototype matrix (one row per class) with construction metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    pub prototypes: FeatureMatrix,
    pub method: PrototypeMethod,
    /// Training nodes per class.
    pub support: Vec<usize>,
    /// Weiszfeld iterations per class; `None` for mean prototypes.
    pub iterations: Option<Vec<usize>>,
}

impl PrototypeSet {
    pub fn num_classes(&self) -> usize {
        self.prototypes.rows()
    }

    pub fn dim(&self) -> usize {
        self.prototypes.cols()
    }

    pub fn row(&self, c: usize) -> &[f64] {
        self.prototypes.row(c)
    }
}

/// Builds one prototype per class from the training rows of `features`.
pub fn build_prototypes(
    features: &FeatureMatrix,
    labels: &Labels,
    train_mask: &[bool],
    method: PrototypeMethod,
    cfg: &WeiszfeldConfig,
) -> Result<PrototypeSet> {
    if features.rows() != labels.len() || train_mask.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "features {} rows, labels {}, mask {}",
            features.rows(),
            labels.len(),
            train_mask.len()
        )));
    }
    labels.check_classes_covered(train_mask)?;
    let members = labels.members_by_class(train_mask);
    let per_class: Vec<(Vec<f64>, usize)> = members
        .par_iter()
        .map(|idx| {
            let points = features.select_rows(idx);
            match method {
                PrototypeMethod::Mean => mean_prototype(&points).map(|p| (p, 0)),
                PrototypeMethod::GeometricMedian => {
                    geometric_median(&points, cfg).map(|gm| (gm.point, gm.iterations))
                }
            }
        })
        .collect::<Result<_>>()?;

    let rows: Vec<&[f64]> = per_class.iter().map(|(p, _)| p.as_slice()).collect();
    let prototypes = if rows.is_empty() {
        FeatureMatrix::zeros(0, features.cols())
    } else {
        FeatureMatrix::from_rows(&rows)?
    };
    Ok(PrototypeSet {
        prototypes,
        method,
        support: members.iter().map(Vec::len).collect(),
        iterations: (method == PrototypeMethod::GeometricMedian)
            .then(|| per_class.iter().map(|&(_, it)| it).collect()),
    })
}
