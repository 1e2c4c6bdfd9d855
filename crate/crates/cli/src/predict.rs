use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use f2lp_core::metrics::{accuracy, macro_f1};
use f2lp_core::{f2lp_predict, load_dataset, WeiszfeldConfig};

use crate::tables::write_table;
use crate::KernelArgs;

#[derive(Args, Debug, Clone)]
pub struct PredictArgs {
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Predictions TSV: node_id, predicted_class, top_score.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-node parameters TSV: node_id, lcc, alpha, k. Defaults to
    /// `<out stem>.params.tsv` next to `--out`.
    #[arg(long)]
    pub params_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictSummary {
    pub nodes: usize,
    pub test_nodes: usize,
    /// Present when the test split has at least one labeled node.
    pub accuracy: Option<f64>,
    pub macro_f1: Option<f64>,
    pub params_path: PathBuf,
}

pub fn cmd_predict(args: &PredictArgs) -> anyhow::Result<PredictSummary> {
    let kcfg = args.kernel.config()?;
    let ds = load_dataset(&args.data)?;
    let out = f2lp_predict(&ds, &kcfg, &WeiszfeldConfig::default()).context("running the pipeline")?;

    let rows: Vec<Vec<String>> = (0..ds.num_nodes())
        .map(|i| {
            let c = out.prediction.labels[i];
            vec![i.to_string(), c.to_string(), out.scores.row(i)[c].to_string()]
        })
        .collect();
    write_table(&args.out, b'\t', &["node_id", "predicted_class", "top_score"], &rows)?;

    let params_path = args.params_out.clone().unwrap_or_else(|| crate::default_params_path(&args.out));
    let rows: Vec<Vec<String>> = (0..ds.num_nodes())
        .map(|i| {
            vec![
                i.to_string(),
                out.lcc[i].to_string(),
                out.params.alpha()[i].to_string(),
                out.params.k()[i].to_string(),
            ]
        })
        .collect();
    write_table(&params_path, b'\t', &["node_id", "lcc", "alpha", "k"], &rows)?;

    let test = ds.split.test_mask();
    let test_nodes = (0..ds.num_nodes()).filter(|&i| test[i] && ds.labels.get(i).is_some()).count();
    let (acc, f1) = if test_nodes > 0 {
        (
            Some(accuracy(&out.prediction, &ds.labels, &test)?),
            Some(macro_f1(&out.prediction, &ds.labels, &test, ds.num_classes())?),
        )
    } else {
        (None, None)
    };
    Ok(PredictSummary {
        nodes: ds.num_nodes(),
        test_nodes,
        accuracy: acc,
        macro_f1: f1,
        params_path,
    })
}
