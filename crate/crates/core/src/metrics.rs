//! Accuracy, macro-F1, confusion matrices and multi-run statistics.
//!
//! Every metric takes a node mask; masked nodes without a label are skipped.

use serde::{Deserialize, Serialize};

use crate::classify::Prediction;
use crate::dataset::Labels;
use crate::error::{Error, Result};

fn evaluated<'a>(
    pred: &'a Prediction,
    truth: &'a Labels,
    mask: &'a [bool],
) -> Result<impl Iterator<Item = (usize, usize)> + 'a> {
    if pred.len() != truth.len() || mask.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "prediction {} nodes, labels {}, mask {}",
            pred.len(),
            truth.len(),
            mask.len()
        )));
    }
    let mut it = (0..truth.len())
        .filter(move |&i| mask[i])
        .filter_map(move |i| truth.get(i).map(|t| (t, pred.labels[i])))
        .peekable();
    if it.peek().is_none() {
        return Err(Error::Empty("evaluation mask selects no labeled node".into()));
    }
    Ok(it)
}

/// Fraction of evaluated nodes predicted correctly.
pub fn accuracy(pred: &Prediction, truth: &Labels, mask: &[bool]) -> Result<f64> {
    let (mut hit, mut total) = (0usize, 0usize);
    for (t, p) in evaluated(pred, truth, mask)? {
        hit += usize::from(t == p);
        total += 1;
    }
    Ok(hit as f64 / total as f64)
}

/// Entry `[t][p]` counts evaluated nodes of true class `t` predicted `p`.
/// Predictions outside `[0, classes)` are an error.
pub fn confusion_matrix(pred: &Prediction, truth: &Labels, mask: &[bool], classes: usize) -> Result<Vec<Vec<usize>>> {
    let mut m = vec![vec![0usize; classes]; classes];
    for (t, p) in evaluated(pred, truth, mask)? {
        if t >= classes || p >= classes {
            return Err(Error::OutOfRange(format!("class pair ({t}, {p}) with {classes} classes")));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

/// Unweighted mean of per-class F1 over all `classes`. A class with no true
/// positives contributes 0, including one absent from both truth and
/// prediction.
pub fn macro_f1(pred: &Prediction, truth: &Labels, mask: &[bool], classes: usize) -> Result<f64> {
    if classes == 0 {
        return Err(Error::Empty("macro-F1 over zero classes".into()));
    }
    let cm = confusion_matrix(pred, truth, mask, classes)?;
    let f1_sum: f64 = (0..classes)
        .map(|c| {
            let tp = cm[c][c] as f64;
            let actual: usize = cm[c].iter().sum();
            let predicted: usize = cm.iter().map(|row| row[c]).sum();
            if tp == 0.0 {
                0.0
            } else {
                // 2PR / (P + R) simplifies to 2TP / (actual + predicted)
                2.0 * tp / (actual + predicted) as f64
            }
        })
        .sum();
    Ok(f1_sum / classes as f64)
}

/// Mean and population standard deviation (divide by `n`).
pub fn run_statistics(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("statistics of zero runs".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Result<Self> {
        let (mean, std) = run_statistics(values)?;
        Ok(MeanStd { mean, std })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStat {
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub name: String,
    pub accuracy: MeanStd,
    pub macro_f1: MeanStd,
    /// Wall time in seconds, millisecond resolution. The only
    /// non-deterministic field of the report.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub time_sec: Option<TimeStat>,
    /// Test-set confusion matrix of the first run.
    pub confusion: Vec<Vec<usize>>,
    pub per_run_accuracy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub seed: u64,
    pub runs: usize,
    pub config: serde_json::Value,
    pub methods: Vec<MethodReport>,
    /// Numbers copied from elsewhere (e.g. trained baselines), never computed
    /// here.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub external_references: Option<serde_json::Value>,
}

impl EvalReport {
    /// The report with timing removed; identical across repeated runs.
    pub fn deterministic_payload(&self) -> EvalReport {
        let mut r = self.clone();
        r.methods.iter_mut().for_each(|m| m.time_sec = None);
        r
    }
}
