//! Training-free semi-supervised node classification.
//!
//! The pipeline has three stages:
//!
//! 1. one prototype per class, the geometric median of its raw training
//!    features ([`prototypes`]);
//! 2. feature propagation whose teleport probability and depth vary per node
//!    with its local clustering coefficient ([`graph`], [`propagation`]);
//! 3. cosine similarity to the prototypes and an argmax ([`classify`]).
//!
//! [`baselines`] holds label propagation, kNN and the prototype-only and
//! fixed-parameter ablations; [`metrics`] the evaluation code.

pub mod baselines;
pub mod classify;
pub mod dataset;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod propagation;
pub mod prototypes;
pub mod synth;

pub use baselines::{run_method, Method, MethodConfig};
pub use classify::{f2lp_predict, F2lpOutput, Prediction, ScoreMatrix};
pub use dataset::{load_dataset, save_dataset, Dataset, FeatureMatrix, Labels, Role, SplitFractions, SplitMasks};
pub use error::{Error, Result};
pub use graph::{compute_lcc, normalize_adjacency, Graph, NormalizedAdjacency};
pub use metrics::EvalReport;
pub use propagation::{KernelConfig, PropagationParams};
pub use prototypes::{PrototypeMethod, PrototypeSet, WeiszfeldConfig};
pub use synth::PlantedPartition;
