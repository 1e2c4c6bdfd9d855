use std::path::PathBuf;

use clap::Args;
use f2lp_core::{save_dataset, Dataset, PlantedPartition, SplitFractions};

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 400)]
    pub nodes: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.10)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.01)]
    pub p_out: f64,
    /// Standard deviation of the Gaussian noise added to one-hot features.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    /// Feature width; defaults to the number of classes.
    #[arg(long)]
    pub feature_dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `train,val,test` fractions of the stored split.
    #[arg(long, default_value = "0.6,0.2,0.2", value_parser = crate::parse_split)]
    pub split: SplitFractions,
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
}

impl SynthArgs {
    pub fn generator(&self) -> PlantedPartition {
        PlantedPartition {
            nodes: self.nodes,
            classes: self.classes,
            p_in: self.p_in,
            p_out: self.p_out,
            feature_dim: self.feature_dim,
            feature_noise: self.noise,
            seed: self.seed,
            split: self.split,
        }
    }
}

pub fn cmd_synth(args: &SynthArgs) -> anyhow::Result<Dataset> {
    let ds = args.generator().generate()?;
    save_dataset(&ds, &args.out)?;
    Ok(ds)
}
