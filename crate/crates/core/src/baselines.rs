//! Training-free comparison methods and a single dispatch point for all of
//! them.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::classify::{argmax_first, ZERO_NORM, f2lp_predict, f2lp_predict_with_params, prototype_predict, Prediction};
use crate::dataset::{Dataset, FeatureMatrix, Labels};
use crate::error::{Error, Result};
use crate::graph::{normalize_adjacency, NormalizedAdjacency};
use crate::propagation::{KernelConfig, PropagationParams};
use crate::prototypes::{PrototypeMethod, WeiszfeldConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelPropConfig {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LabelPropConfig {
    fn default() -> Self {
        LabelPropConfig {
            max_iters: 100,
            tol: 1e-6,
        }
    }
}

/// Iterates `Y <- A Y` from one-hot training labels, resetting training rows
/// to their labels after every step.
pub fn label_propagation(
    adj: &NormalizedAdjacency,
    labels: &Labels,
    train_mask: &[bool],
    cfg: &LabelPropConfig,
) -> Result<Prediction> {
    let n = adj.num_nodes();
    if labels.len() != n || train_mask.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "adjacency has {n} nodes, labels {}, mask {}",
            labels.len(),
            train_mask.len()
        )));
    }
    labels.check_classes_covered(train_mask)?;
    let c = labels.num_classes();
    let seed = |i: usize| train_mask[i].then(|| labels.get(i)).flatten();

    let mut y = vec![0.0; n * c];
    for i in 0..n {
        if let Some(k) = seed(i) {
            y[i * c + k] = 1.0;
        }
    }
    let mut next = vec![0.0; n * c];
    for _ in 0..cfg.max_iters {
        let mut change = 0.0f64;
        for i in 0..n {
            let out = &mut next[i * c..(i + 1) * c];
            match seed(i) {
                Some(k) => {
                    out.fill(0.0);
                    out[k] = 1.0;
                }
                None => {
                    out.fill(0.0);
                    let (cols, weights) = adj.row(i);
                    for (&j, &w) in cols.iter().zip(weights) {
                        for (o, v) in out.iter_mut().zip(&y[j * c..(j + 1) * c]) {
                            *o += w * v;
                        }
                    }
                }
            }
            for (o, v) in out.iter().zip(&y[i * c..(i + 1) * c]) {
                change = change.max((o - v).abs());
            }
        }
        std::mem::swap(&mut y, &mut next);
        debug_assert!((0..n).all(|i| seed(i).is_none_or(|k| y[i * c + k] == 1.0)));
        if change < cfg.tol {
            break;
        }
    }

    let mut tie_count = 0;
    let labels = (0..n)
        .map(|i| {
            let (k, tied) = argmax_first(&y[i * c..(i + 1) * c]);
            tie_count += usize::from(tied);
            k
        })
        .collect();
    Ok(Prediction { labels, tie_count })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnMetric {
    Cosine,
}

fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let (na, nb) = (na.sqrt(), nb.sqrt());
    if na < ZERO_NORM || nb < ZERO_NORM {
        1.0
    } else {
        1.0 - dot / (na * nb)
    }
}

/// Majority vote among the `k` nearest training nodes. Distance ties go to
/// the lower node id; vote ties to the lower class id. `k` larger than the
/// training set is clamped.
pub fn knn_classify(
    x: &FeatureMatrix,
    labels: &Labels,
    train_mask: &[bool],
    k: usize,
    metric: KnnMetric,
) -> Result<Prediction> {
    if k == 0 {
        return Err(Error::Config("knn k must be >= 1".into()));
    }
    if x.rows() != labels.len() || train_mask.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "features {} rows, labels {}, mask {}",
            x.rows(),
            labels.len(),
            train_mask.len()
        )));
    }
    let train: Vec<(usize, usize)> = (0..x.rows())
        .filter(|&i| train_mask[i])
        .filter_map(|i| labels.get(i).map(|c| (i, c)))
        .collect();
    if train.is_empty() {
        return Err(Error::Empty("knn needs at least one labeled training node".into()));
    }
    let k = if k > train.len() {
        log::warn!("knn k = {k} exceeds {} training nodes; clamping", train.len());
        train.len()
    } else {
        k
    };

    let c = labels.num_classes();
    let mut tie_count = 0;
    let mut dists: Vec<(f64, usize, usize)> = Vec::with_capacity(train.len());
    let mut out = Vec::with_capacity(x.rows());
    for q in 0..x.rows() {
        dists.clear();
        dists.extend(train.iter().map(|&(i, cls)| {
            let d = match metric {
                KnnMetric::Cosine => cosine_distance(x.row(q), x.row(i)),
            };
            (d, i, cls)
        }));
        dists.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0.0; c];
        for &(_, _, cls) in &dists[..k] {
            votes[cls] += 1.0;
        }
        let (best, tied) = argmax_first(&votes);
        tie_count += usize::from(tied);
        out.push(best);
    }
    Ok(Prediction {
        labels: out,
        tie_count,
    })
}

/// Methods available to the benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "f2lp")]
    F2lp,
    #[serde(rename = "fixed-appnp")]
    FixedAppnpProto,
    #[serde(rename = "proto-geomed")]
    ProtoGeomed,
    #[serde(rename = "proto-mean")]
    ProtoMean,
    #[serde(rename = "labelprop")]
    LabelProp,
    #[serde(rename = "knn5")]
    Knn5,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::F2lp,
        Method::FixedAppnpProto,
        Method::ProtoGeomed,
        Method::ProtoMean,
        Method::LabelProp,
        Method::Knn5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::F2lp => "f2lp",
            Method::FixedAppnpProto => "fixed-appnp",
            Method::ProtoGeomed => "proto-geomed",
            Method::ProtoMean => "proto-mean",
            Method::LabelProp => "labelprop",
            Method::Knn5 => "knn5",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match key.as_str() {
            "f2lp" | "f2lp-ap" => Method::F2lp,
            "fixed-appnp" | "fixed-appnp-proto" | "fixedappnp-proto" => Method::FixedAppnpProto,
            "proto-geomed" | "prototypeonly-geomed" => Method::ProtoGeomed,
            "proto-mean" | "prototypeonly-mean" => Method::ProtoMean,
            "labelprop" | "label-propagation" => Method::LabelProp,
            "knn5" | "knn" => Method::Knn5,
            _ => return Err(Error::Config(format!("unknown method {s:?}"))),
        })
    }
}

/// Settings shared by every method; each method reads only what it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub kernel: KernelConfig,
    pub weiszfeld: WeiszfeldConfig,
    pub fixed_k: usize,
    pub fixed_alpha: f64,
    pub label_prop: LabelPropConfig,
    pub knn_k: usize,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            kernel: KernelConfig::default(),
            weiszfeld: WeiszfeldConfig::default(),
            fixed_k: 5,
            fixed_alpha: 0.1,
            label_prop: LabelPropConfig::default(),
            knn_k: 5,
        }
    }
}

impl MethodConfig {
    pub fn validate(&self, method: Method) -> Result<()> {
        self.weiszfeld.validate()?;
        match method {
            Method::F2lp => self.kernel.validate(),
            Method::FixedAppnpProto if !(0.0..=1.0).contains(&self.fixed_alpha) => {
                Err(Error::Config(format!("fixed alpha {} outside [0, 1]", self.fixed_alpha)))
            }
            Method::Knn5 if self.knn_k == 0 => Err(Error::Config("knn k must be >= 1".into())),
            _ => Ok(()),
        }
    }
}

/// Runs one method on the dataset's current split. The wall time covers the
/// whole inference path (adjacency normalization included) and nothing else.
pub fn run_method(ds: &Dataset, method: Method, cfg: &MethodConfig) -> Result<(Prediction, Duration)> {
    cfg.validate(method)?;
    let start = Instant::now();
    let pred = match method {
        Method::F2lp => f2lp_predict(ds, &cfg.kernel, &cfg.weiszfeld)?.prediction,
        Method::FixedAppnpProto => {
            let params = PropagationParams::constant(ds.num_nodes(), cfg.fixed_alpha, cfg.fixed_k)?;
            f2lp_predict_with_params(ds, &params, &cfg.weiszfeld)?.0
        }
        Method::ProtoGeomed => prototype_predict(ds, PrototypeMethod::GeometricMedian, &cfg.weiszfeld)?.0,
        Method::ProtoMean => prototype_predict(ds, PrototypeMethod::Mean, &cfg.weiszfeld)?.0,
        Method::LabelProp => {
            let adj = normalize_adjacency(&ds.graph);
            label_propagation(&adj, &ds.labels, &ds.split.train_mask(), &cfg.label_prop)?
        }
        Method::Knn5 => knn_classify(
            &ds.features,
            &ds.labels,
            &ds.split.train_mask(),
            cfg.knn_k,
            KnnMetric::Cosine,
        )?,
    };
    Ok((pred, start.elapsed()))
}
