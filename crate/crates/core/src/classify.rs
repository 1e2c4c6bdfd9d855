//! Cosine scoring against class prototypes and the end-to-end pipeline.

use rayon::prelude::*;

use crate::dataset::{Dataset, FeatureMatrix};
use crate::error::{Error, Result};
use crate::graph::{compute_lcc, normalize_adjacency};
use crate::propagation::{adaptive_propagate, map_lcc_to_params, KernelConfig, PropagationParams};
use crate::prototypes::{build_prototypes, PrototypeMethod, PrototypeSet, WeiszfeldConfig};

/// Norms below this are treated as zero; cosine against a zero vector is 0.
pub const ZERO_NORM: f64 = 1e-12;

/// `n x C` cosine similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    classes: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let classes = rows.first().map_or(0, |r| r.as_ref().len());
        let values = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        ScoreMatrix { classes, values }
    }

    pub fn rows(&self) -> usize {
        self.values.len().checked_div(self.classes).unwrap_or(0)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.classes..(i + 1) * self.classes]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub labels: Vec<usize>,
    /// Rows whose maximum was attained by more than one class.
    pub tie_count: usize,
}

impl Prediction {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn cosine_scores(x: &FeatureMatrix, protos: &PrototypeSet) -> Result<ScoreMatrix> {
    if x.cols() != protos.dim() {
        return Err(Error::DimensionMismatch(format!(
            "features have {} columns, prototypes {}",
            x.cols(),
            protos.dim()
        )));
    }
    let c = protos.num_classes();
    let unit_protos: Vec<Option<Vec<f64>>> = protos
        .prototypes
        .iter_rows()
        .map(|p| {
            let n = norm(p);
            (n >= ZERO_NORM).then(|| p.iter().map(|v| v / n).collect())
        })
        .collect();
    let mut values = vec![0.0; x.rows() * c];
    if c > 0 {
        values.par_chunks_mut(c).enumerate().for_each(|(i, out)| {
            let row = x.row(i);
            let n = norm(row);
            if n < ZERO_NORM {
                return;
            }
            for (s, p) in out.iter_mut().zip(&unit_protos) {
                if let Some(p) = p {
                    let dot: f64 = row.iter().zip(p).map(|(a, b)| a * b).sum();
                    *s = (dot / n).clamp(-1.0, 1.0);
                }
            }
        });
    }
    Ok(ScoreMatrix { classes: c, values })
}

/// Index of the first maximum, plus whether the maximum is shared.
pub(crate) fn argmax_first(row: &[f64]) -> (usize, bool) {
    let mut best = 0;
    let mut tied = false;
    for (c, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = c;
            tied = false;
        } else if v == row[best] {
            tied = true;
        }
    }
    (best, tied)
}

/// Row-wise argmax; ties go to the lowest class index.
pub fn assign_labels(scores: &ScoreMatrix) -> Prediction {
    let mut tie_count = 0;
    let labels = (0..scores.rows())
        .map(|i| {
            let (c, tied) = argmax_first(scores.row(i));
            tie_count += usize::from(tied);
            c
        })
        .collect();
    Prediction { labels, tie_count }
}

/// Everything the pipeline computes, for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct F2lpOutput {
    pub prediction: Prediction,
    pub scores: ScoreMatrix,
    pub params: PropagationParams,
    pub prototypes: PrototypeSet,
    pub lcc: Vec<f64>,
}

/// Geometric-median prototypes on raw features, LCC-adaptive propagation,
/// then cosine assignment.
pub fn f2lp_predict(ds: &Dataset, kcfg: &KernelConfig, wcfg: &WeiszfeldConfig) -> Result<F2lpOutput> {
    kcfg.validate()?;
    let lcc = compute_lcc(&ds.graph);
    let params = map_lcc_to_params(&lcc, kcfg)?;
    let (prediction, scores, prototypes) = f2lp_predict_with_params(ds, &params, wcfg)?;
    Ok(F2lpOutput {
        prediction,
        scores,
        params,
        prototypes,
        lcc,
    })
}

/// The pipeline with caller-supplied propagation parameters in place of the
/// LCC mapping.
pub fn f2lp_predict_with_params(
    ds: &Dataset,
    params: &PropagationParams,
    wcfg: &WeiszfeldConfig,
) -> Result<(Prediction, ScoreMatrix, PrototypeSet)> {
    let prototypes = build_prototypes(
        &ds.features,
        &ds.labels,
        &ds.split.train_mask(),
        PrototypeMethod::GeometricMedian,
        wcfg,
    )?;
    let adj = normalize_adjacency(&ds.graph);
    let evolved = adaptive_propagate(&adj, &ds.features, params)?;
    let scores = cosine_scores(&evolved, &prototypes)?;
    Ok((assign_labels(&scores), scores, prototypes))
}

/// Nearest-prototype classification of the raw features, no propagation.
pub fn prototype_predict(
    ds: &Dataset,
    method: PrototypeMethod,
    wcfg: &WeiszfeldConfig,
) -> Result<(Prediction, ScoreMatrix, PrototypeSet)> {
    let prototypes = build_prototypes(&ds.features, &ds.labels, &ds.split.train_mask(), method, wcfg)?;
    let scores = cosine_scores(&ds.features, &prototypes)?;
    Ok((assign_labels(&scores), scores, prototypes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn protos(rows: &[&[f64]]) -> PrototypeSet {
        PrototypeSet {
            prototypes: FeatureMatrix::from_rows(rows).unwrap(),
            method: PrototypeMethod::Mean,
            support: vec![1; rows.len()],
            iterations: None,
        }
    }

    #[test]
    fn parallel_vector_scores_one() {
        let p = protos(&[&[1.0, 2.0, -1.0], &[0.0, 0.0, 1.0]]);
        let x = FeatureMatrix::from_rows(&[[3.0, 6.0, -3.0]]).unwrap();
        let s = cosine_scores(&x, &p).unwrap();
        assert!((s.row(0)[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_scores_zero() {
        let p = protos(&[&[1.0, 0.0]]);
        let x = FeatureMatrix::from_rows(&[[0.0, 5.0]]).unwrap();
        assert_eq!(cosine_scores(&x, &p).unwrap().row(0), &[0.0]);
    }

    #[test]
    fn zero_norm_rows_and_prototypes_score_zero() {
        let p = protos(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let x = FeatureMatrix::from_rows(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let s = cosine_scores(&x, &p).unwrap();
        assert_eq!(s.row(0), &[0.0, 0.0]);
        assert_eq!(s.row(1)[0], 0.0);
        assert!((s.row(1)[1] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let p = protos(&[&[1.0, 0.0]]);
        let x = FeatureMatrix::from_rows(&[[1.0, 0.0, 0.0]]).unwrap();
        assert!(cosine_scores(&x, &p).is_err());
    }

    #[test]
    fn argmax_and_ties() {
        let s = ScoreMatrix::from_rows(&[&[0.1, 0.9, 0.3][..], &[0.5, 0.5, 0.1], &[0.0, 0.0, 0.0]]);
        let p = assign_labels(&s);
        assert_eq!(p.labels, vec![1, 0, 0]);
        assert_eq!(p.tie_count, 2);
    }

    #[test]
    fn tie_below_max_not_counted() {
        let s = ScoreMatrix::from_rows(&[[0.2, 0.2, 0.7]]);
        let p = assign_labels(&s);
        assert_eq!(p.labels, vec![2]);
        assert_eq!(p.tie_count, 0);
    }
}
