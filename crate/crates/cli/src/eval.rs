use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Result};
use ccid_core::features::{read_dataset, renormalize, SequenceSample, N_FEATURES};
use ccid_core::nn::Checkpoint;
use ccid_core::train::evaluate_checkpoint;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::manifest::{beside, RunManifest};
use crate::output::Outputs;

pub const NAME: &str = "eval";

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Validation,
    Test,
    All,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Checkpoint to evaluate [default: <out-root>/model/best.ckpt].
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Dataset file [default: <out-root>/dataset.bin].
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Partition::Test)]
    pub split: Partition,
    /// Also write the printed report here; the manifest goes beside it
    /// [default manifest: <out-root>/eval.manifest.json].
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Where the manifest goes when there is no report.
    #[arg(skip)]
    pub manifest: Option<PathBuf>,
}

impl EvalArgs {
    pub fn resolve(mut self, root: &Path) -> Self {
        self.checkpoint.get_or_insert_with(|| root.join("model").join("best.ckpt"));
        self.dataset.get_or_insert_with(|| root.join("dataset.bin"));
        self.manifest = Some(match &self.report {
            Some(r) => beside(r),
            None => root.join("eval.manifest.json"),
        });
        self
    }
}

pub fn run(args: EvalArgs) -> Result<()> {
    let started = Instant::now();
    let ckpt_path = args.checkpoint.clone().expect("resolved");
    let dataset_path = args.dataset.clone().expect("resolved");
    let ckpt = Checkpoint::read(&ckpt_path)?;
    let dataset = read_dataset(&dataset_path)?;
    if ckpt.params.config.input_size != N_FEATURES {
        bail!(
            "checkpoint expects {} features, dataset has {N_FEATURES}",
            ckpt.params.config.input_size
        );
    }
    let mut samples: Vec<SequenceSample> = match args.split {
        Partition::Train => dataset.train.clone(),
        Partition::Validation => dataset.validation.clone(),
        Partition::Test => dataset.test.clone(),
        Partition::All => [&dataset.train, &dataset.validation, &dataset.test]
            .into_iter()
            .flatten()
            .cloned()
            .collect(),
    };
    if ckpt.normalization != dataset.normalization {
        samples = samples
            .iter()
            .map(|s| renormalize(s, &dataset.normalization, &ckpt.normalization))
            .collect();
    }
    let evaluation = evaluate_checkpoint(&ckpt, &samples)?;
    let text = evaluation.to_string();
    print!("{text}");

    let mut outputs = Outputs::default();
    if let Some(report) = &args.report {
        let path = outputs.file(report)?;
        std::fs::write(&path, &text)?;
    }
    let mut manifest = RunManifest::new(NAME, &args)?;
    manifest.seed("train", ckpt.seed);
    manifest.seed("dataset", dataset.seed);
    manifest.inputs = vec![ckpt_path, dataset_path];
    manifest.write(&args.manifest.clone().expect("resolved"), &mut outputs, started)?;
    outputs.commit();
    Ok(())
}
