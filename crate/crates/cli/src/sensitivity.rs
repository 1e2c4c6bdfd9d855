use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use f2lp_core::metrics::{accuracy, macro_f1};
use f2lp_core::{f2lp_predict, load_dataset, Dataset, KernelConfig, WeiszfeldConfig};
use rayon::prelude::*;

use crate::tables::write_table;
use crate::{millis, usage};

#[derive(Args, Debug, Clone)]
pub struct SensitivityArgs {
    /// Dataset directory; its stored split is used.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub k_min: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "5,10,15")]
    pub k_max: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1")]
    pub alpha_min: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2")]
    pub alpha_max: Vec<f64>,
    /// Output CSV, one row per evaluated configuration.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub k_min: Vec<usize>,
    pub k_max: Vec<usize>,
    pub alpha_min: Vec<f64>,
    pub alpha_max: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            k_min: vec![1, 2, 3],
            k_max: vec![5, 10, 15],
            alpha_min: vec![0.05, 0.1],
            alpha_max: vec![0.1, 0.2],
        }
    }
}

impl Grid {
    /// Valid kernel configurations in row-major order (k_min outermost)
    /// and the number of combinations rejected by validation.
    pub fn configs(&self) -> (Vec<KernelConfig>, usize) {
        let mut ok = Vec::new();
        let mut skipped = 0;
        for &k_min in &self.k_min {
            for &k_max in &self.k_max {
                for &a_min in &self.alpha_min {
                    for &a_max in &self.alpha_max {
                        match KernelConfig::new(k_min, k_max, a_min, a_max) {
                            Ok(c) => ok.push(c),
                            Err(e) => {
                                log::debug!("skipping ({k_min}, {k_max}, {a_min}, {a_max}): {e}");
                                skipped += 1;
                            }
                        }
                    }
                }
            }
        }
        (ok, skipped)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub config: KernelConfig,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub time_sec: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityOutcome {
    pub rows: Vec<SensitivityRow>,
    pub skipped: usize,
}

pub fn sensitivity_grid(ds: &Dataset, grid: &Grid) -> anyhow::Result<SensitivityOutcome> {
    let (configs, skipped) = grid.configs();
    if configs.is_empty() {
        return Err(usage(format!("empty grid: all {skipped} combinations are invalid")));
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} invalid grid combinations");
    }
    let test = ds.split.test_mask();
    let wcfg = WeiszfeldConfig::default();
    let rows = crate::pool(None)?.install(|| {
        configs
            .par_iter()
            .map(|cfg| {
                let start = Instant::now();
                let out = f2lp_predict(ds, cfg, &wcfg)?;
                let time_sec = millis(start.elapsed());
                Ok(SensitivityRow {
                    config: *cfg,
                    accuracy: accuracy(&out.prediction, &ds.labels, &test)?,
                    macro_f1: macro_f1(&out.prediction, &ds.labels, &test, ds.num_classes())?,
                    time_sec,
                })
            })
            .collect::<f2lp_core::Result<Vec<_>>>()
    })?;
    Ok(SensitivityOutcome { rows, skipped })
}

pub fn cmd_sensitivity(args: &SensitivityArgs) -> anyhow::Result<SensitivityOutcome> {
    let grid = Grid {
        k_min: args.k_min.clone(),
        k_max: args.k_max.clone(),
        alpha_min: args.alpha_min.clone(),
        alpha_max: args.alpha_max.clone(),
    };
    let ds = load_dataset(&args.data)?;
    let outcome = sensitivity_grid(&ds, &grid)?;
    let rows: Vec<Vec<String>> = outcome
        .rows
        .iter()
        .map(|r| {
            vec![
                r.config.k_min.to_string(),
                r.config.k_max.to_string(),
                r.config.alpha_min.to_string(),
                r.config.alpha_max.to_string(),
                r.accuracy.to_string(),
                r.macro_f1.to_string(),
                r.time_sec.to_string(),
            ]
        })
        .collect();
    write_table(
        &args.out,
        b',',
        &["k_min", "k_max", "alpha_min", "alpha_max", "accuracy", "macro_f1", "time_sec"],
        &rows,
    )?;
    Ok(outcome)
}
