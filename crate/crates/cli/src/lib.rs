//! Library half of the `f2lp` binary.
//!
//! Each subcommand is a plain function taking its parsed arguments, so the
//! integration and acceptance tests drive the same code paths as the binary.
//! Errors carry their exit code through [`exit_code`]: usage and
//! configuration problems map to 2, everything else to 1.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use f2lp_core::{KernelConfig, SplitFractions};

pub mod bench;
pub mod predict;
pub mod sensitivity;
pub mod synth;
mod tables;

pub use bench::{cmd_bench, evaluate, BenchArgs};
pub use predict::{cmd_predict, PredictArgs, PredictSummary};
pub use sensitivity::{cmd_sensitivity, sensitivity_grid, Grid, SensitivityArgs, SensitivityOutcome, SensitivityRow};
pub use synth::{cmd_synth, SynthArgs};

/// Caps worker threads for every parallel section.
pub const THREADS_ENV: &str = "F2LP_THREADS";

#[derive(Parser, Debug)]
#[command(name = "f2lp", version, about = "Training-free graph node classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify every node of a dataset and write per-node predictions.
    Predict(PredictArgs),
    /// Compare methods over repeated resampled splits.
    Bench(BenchArgs),
    /// Evaluate the adaptive method over a grid of kernel bounds.
    Sensitivity(SensitivityArgs),
    /// Write a planted-partition dataset directory.
    Synth(SynthArgs),
}

/// Bounds of the clustering-coefficient kernel.
#[derive(Args, Debug, Clone)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 3)]
    pub k_min: usize,
    #[arg(long, default_value_t = 15)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 0.2)]
    pub alpha_max: f64,
}

impl Default for KernelArgs {
    fn default() -> Self {
        KernelArgs {
            k_min: 3,
            k_max: 15,
            alpha_min: 0.1,
            alpha_max: 0.2,
        }
    }
}

impl KernelArgs {
    pub fn config(&self) -> f2lp_core::Result<KernelConfig> {
        KernelConfig::new(self.k_min, self.k_max, self.alpha_min, self.alpha_max)
    }
}

/// Split fractions written as `train,val,test`.
pub fn parse_split(s: &str) -> Result<SplitFractions, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [train, val, test] = parts[..] else {
        return Err(format!("expected three comma-separated fractions, got {}", parts.len()));
    };
    let fracs = SplitFractions { train, val, test };
    fracs.validate().map_err(|e| e.to_string())?;
    Ok(fracs)
}

/// A bad flag or flag combination detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// 2 for usage or configuration errors anywhere in the chain, else 1.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<f2lp_core::Error>() {
            return if e.is_config() { 2 } else { 1 };
        }
    }
    1
}

/// Worker count from the environment; `None` means rayon's default.
pub fn thread_cap() -> Option<usize> {
    let raw = std::env::var(THREADS_ENV).ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            log::warn!("ignoring {THREADS_ENV}={raw:?}: expected a positive integer");
            None
        }
    }
}

pub(crate) fn pool(threads: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.or_else(thread_cap) {
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

/// Wall time truncated to whole milliseconds, in seconds.
pub(crate) fn millis(d: std::time::Duration) -> f64 {
    d.as_millis() as f64 / 1000.0
}

pub(crate) fn round_millis(secs: f64) -> f64 {
    (secs * 1000.0).round() / 1000.0
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Predict(a) => {
            let s = cmd_predict(a)?;
            if let (Some(acc), Some(f1)) = (s.accuracy, s.macro_f1) {
                println!("test accuracy {acc:.4}  macro-F1 {f1:.4}  ({} labeled test nodes)", s.test_nodes);
            }
            println!("wrote {} predictions to {}", s.nodes, a.out.display());
        }
        Command::Bench(a) => {
            let r = cmd_bench(a)?;
            for m in &r.methods {
                println!(
                    "{:<13} acc {:.4} ± {:.4}  F1 {:.4} ± {:.4}",
                    m.name, m.accuracy.mean, m.accuracy.std, m.macro_f1.mean, m.macro_f1.std
                );
            }
            println!("reports in {}", a.out_dir.display());
        }
        Command::Sensitivity(a) => {
            let o = cmd_sensitivity(a)?;
            println!(
                "{} configurations evaluated, {} skipped; wrote {}",
                o.rows.len(),
                o.skipped,
                a.out.display()
            );
        }
        Command::Synth(a) => {
            let ds = cmd_synth(a)?;
            println!(
                "wrote {} ({} nodes, {} edges, homophily {:.3}) to {}",
                ds.name,
                ds.num_nodes(),
                ds.graph.num_edges(),
                ds.edge_homophily(),
                a.out.display()
            );
        }
    }
    Ok(())
}

pub(crate) fn default_params_path(out: &std::path::Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "predictions".into());
    out.with_file_name(format!("{stem}.params.tsv"))
}
