use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use clap::Args;
use f2lp_core::metrics::{accuracy, confusion_matrix, macro_f1, MeanStd, MethodReport, TimeStat};
use f2lp_core::{load_dataset, run_method, Dataset, EvalReport, Method, MethodConfig, SplitFractions, SplitMasks};
use rayon::prelude::*;
use serde_json::json;

use crate::tables::{write_json, write_table};
use crate::{millis, round_millis, usage, KernelArgs};

/// Marker attached to numbers injected from the `--reference` side file.
pub const EXTERNAL_NOTE: &str = "external, not computed";

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Dataset directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated subset of f2lp, fixed-appnp, proto-geomed,
    /// proto-mean, labelprop, knn5.
    #[arg(long, default_value = "f2lp,fixed-appnp,proto-geomed,proto-mean,labelprop,knn5")]
    pub methods: String,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Run `r` resamples the split with seed `seed + r`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "0.6,0.2,0.2", value_parser = crate::parse_split)]
    pub split: SplitFractions,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 5)]
    pub fixed_k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub fixed_alpha: f64,
    /// Time every (method, run) alone on a single thread.
    #[arg(long)]
    pub timing_strict: bool,
    /// JSON file of numbers reported elsewhere, copied into the report
    /// under `external_references`.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn parse_methods(list: &str) -> anyhow::Result<Vec<Method>> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m: Method = name.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(usage("--methods is empty"));
    }
    Ok(out)
}

struct RunOutcome {
    accuracy: f64,
    macro_f1: f64,
    time: Duration,
    confusion: Vec<Vec<usize>>,
}

fn one_run(ds: &Dataset, method: Method, cfg: &MethodConfig) -> anyhow::Result<RunOutcome> {
    let (pred, time) = run_method(ds, method, cfg).with_context(|| format!("running {method}"))?;
    let test = ds.split.test_mask();
    let c = ds.num_classes();
    Ok(RunOutcome {
        accuracy: accuracy(&pred, &ds.labels, &test)?,
        macro_f1: macro_f1(&pred, &ds.labels, &test, c)?,
        time,
        confusion: confusion_matrix(&pred, &ds.labels, &test, c)?,
    })
}

/// Runs every method `runs` times on stratified resamples of `ds` and
/// assembles the report. With `timing_strict` the runs execute one at a
/// time on a single thread; otherwise (method, run) pairs run in parallel.
pub fn evaluate(
    ds: &Dataset,
    methods: &[Method],
    cfg: &MethodConfig,
    runs: usize,
    seed: u64,
    fracs: SplitFractions,
    timing_strict: bool,
) -> anyhow::Result<EvalReport> {
    if runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    for &m in methods {
        cfg.validate(m)?;
    }
    let datasets: Vec<Dataset> = (0..runs as u64)
        .map(|r| {
            let split = SplitMasks::stratified(&ds.labels, fracs, seed.wrapping_add(r))?;
            ds.with_split(split)
        })
        .collect::<f2lp_core::Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..methods.len()).flat_map(|m| (0..runs).map(move |r| (m, r))).collect();

    let outcomes: Vec<RunOutcome> = if timing_strict {
        crate::pool(Some(1))?.install(|| {
            jobs.iter()
                .map(|&(m, r)| one_run(&datasets[r], methods[m], cfg))
                .collect::<anyhow::Result<_>>()
        })?
    } else {
        crate::pool(None)?.install(|| {
            jobs.par_iter()
                .map(|&(m, r)| one_run(&datasets[r], methods[m], cfg))
                .collect::<anyhow::Result<_>>()
        })?
    };

    let mut reports = Vec::with_capacity(methods.len());
    for (mi, chunk) in outcomes.chunks(runs).enumerate() {
        let accs: Vec<f64> = chunk.iter().map(|o| o.accuracy).collect();
        let f1s: Vec<f64> = chunk.iter().map(|o| o.macro_f1).collect();
        let times: Vec<f64> = chunk.iter().map(|o| millis(o.time)).collect();
        reports.push(MethodReport {
            name: methods[mi].name().to_string(),
            accuracy: MeanStd::of(&accs)?,
            macro_f1: MeanStd::of(&f1s)?,
            time_sec: Some(TimeStat {
                mean: round_millis(times.iter().sum::<f64>() / runs as f64),
            }),
            confusion: chunk[0].confusion.clone(),
            per_run_accuracy: accs,
        });
    }

    Ok(EvalReport {
        dataset: ds.name.clone(),
        seed,
        runs,
        config: json!({ "methods": cfg, "split": fracs }),
        methods: reports,
        external_references: None,
    })
}

fn load_reference(path: &Path) -> anyhow::Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let values: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(json!({ "note": EXTERNAL_NOTE, "source": path.display().to_string(), "values": values }))
}

/// Writes `report.json`, `report.deterministic.json` (timing stripped, so
/// identical invocations produce identical bytes), `summary.csv` and one
/// `confusion_<method>.csv` per method.
pub fn write_reports(report: &EvalReport, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join("report.json"), report)?;
    write_json(&dir.join("report.deterministic.json"), &report.deterministic_payload())?;

    let rows: Vec<Vec<String>> = report
        .methods
        .iter()
        .map(|m| {
            vec![
                m.name.clone(),
                m.accuracy.mean.to_string(),
                m.accuracy.std.to_string(),
                m.macro_f1.mean.to_string(),
                m.macro_f1.std.to_string(),
                m.time_sec.map(|t| t.mean.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    write_table(
        &dir.join("summary.csv"),
        b',',
        &["method", "acc_mean", "acc_std", "f1_mean", "f1_std", "time_mean"],
        &rows,
    )?;

    for m in &report.methods {
        let classes = m.confusion.len();
        let mut header = vec!["truth".to_string()];
        header.extend((0..classes).map(|c| format!("pred_{c}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = m
            .confusion
            .iter()
            .enumerate()
            .map(|(t, row)| std::iter::once(t.to_string()).chain(row.iter().map(usize::to_string)).collect())
            .collect();
        write_table(&dir.join(format!("confusion_{}.csv", m.name)), b',', &header, &rows)?;
    }
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> anyhow::Result<EvalReport> {
    let methods = parse_methods(&args.methods)?;
    let cfg = MethodConfig {
        kernel: args.kernel.config()?,
        fixed_k: args.fixed_k,
        fixed_alpha: args.fixed_alpha,
        ..Default::default()
    };
    let reference = args.reference.as_deref().map(load_reference).transpose()?;
    let ds = load_dataset(&args.data)?;
    let mut report = evaluate(&ds, &methods, &cfg, args.runs, args.seed, args.split, args.timing_strict)?;
    report.external_references = reference;
    write_reports(&report, &args.out_dir)?;
    Ok(report)
}
