use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ccid_core::features::read_dataset;
use ccid_core::nn::{Checkpoint, HeadInit, ModelConfig};
use ccid_core::train::{self as trainer, read_metrics_csv, EpochMetrics, MetricsWriter, TrainConfig};
use ccid_core::ProtocolLabel;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;
use crate::output::Outputs;

pub const NAME: &str = "train";

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    /// Start from uniform predictions.
    Zero,
    /// Same uniform init as the recurrent weights.
    Uniform,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Dataset file [default: <out-root>/dataset.bin].
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Directory for checkpoints, metrics and manifest [default: <out-root>/model].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// GRU hidden units per direction.
    #[arg(long, default_value_t = 512)]
    pub hidden: usize,
    /// Stacked bidirectional layers.
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    /// Attention projection width [default: --hidden].
    #[arg(long)]
    pub attention_dim: Option<usize>,
    /// Dropout between stacked layers.
    #[arg(long, default_value_t = 0.4)]
    pub dropout: f64,
    #[arg(long, value_enum, default_value_t = Head::Zero)]
    pub head_init: Head,
    /// Total epochs, counting those already in a resumed checkpoint.
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 7.5e-5)]
    pub lr: f64,
    #[arg(long, default_value_t = 8)]
    pub batch: usize,
    /// Learning-rate multiplier after a validation-loss plateau.
    #[arg(long, default_value_t = 0.5)]
    pub plateau_factor: f64,
    /// Epochs without improvement before the rate is cut.
    #[arg(long, default_value_t = 5)]
    pub plateau_patience: usize,
    /// Seed for weight init, shuffling and dropout.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Clip the batch gradient to this L2 norm.
    #[arg(long)]
    pub max_grad_norm: Option<f64>,
    /// Continue from a checkpoint with optimizer state (usually last.ckpt).
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

impl TrainArgs {
    pub fn resolve(mut self, root: &Path) -> Self {
        self.dataset.get_or_insert_with(|| root.join("dataset.bin"));
        self.out.get_or_insert_with(|| root.join("model"));
        self.attention_dim.get_or_insert(self.hidden);
        self
    }

    fn model(&self) -> ModelConfig {
        ModelConfig {
            input_size: ccid_core::features::N_FEATURES,
            hidden_size: self.hidden,
            num_layers: self.layers,
            attention_dim: self.attention_dim.unwrap_or(self.hidden),
            num_classes: ProtocolLabel::COUNT,
            dropout: self.dropout,
            head_init: match self.head_init {
                Head::Zero => HeadInit::Zero,
                Head::Uniform => HeadInit::Uniform,
            },
        }
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            epochs: self.epochs,
            batch_size: self.batch,
            plateau_factor: self.plateau_factor,
            plateau_patience: self.plateau_patience,
            seed: self.seed,
            max_grad_norm: self.max_grad_norm,
            ..TrainConfig::default()
        }
    }
}

fn print_epoch(m: &EpochMetrics, total: usize) {
    println!(
        "epoch {:>3}/{total}  train_loss {:.6}  val_loss {:.6}  train_acc {:6.2}%  val_acc {:6.2}%  lr {:e}",
        m.epoch,
        m.train_loss,
        m.val_loss,
        100.0 * m.train_acc,
        100.0 * m.val_acc,
        m.lr
    );
}

pub fn run(args: TrainArgs) -> Result<()> {
    let started = Instant::now();
    let dataset_path = args.dataset.clone().expect("resolved");
    let out = args.out.clone().expect("resolved");
    let model = args.model();
    let config = args.train_config();
    model.validate()?;
    config.validate()?;
    let dataset = read_dataset(&dataset_path)?;

    let start = match &args.resume {
        Some(path) => {
            let ckpt = Checkpoint::read_expecting(path, &model)
                .with_context(|| format!("resuming from {}", path.display()))?;
            if ckpt.resume.is_none() {
                bail!("{} has no optimizer state; resume from last.ckpt", path.display());
            }
            if ckpt.seed != args.seed {
                bail!("checkpoint was trained with seed {}, not {}", ckpt.seed, args.seed);
            }
            Some(ckpt)
        }
        None => None,
    };

    let mut outputs = Outputs::default();
    outputs.ensure_dir(&out)?;
    let metrics_path = out.join("metrics.csv");
    let earlier: Vec<EpochMetrics> = match &start {
        Some(ckpt) if metrics_path.exists() => read_metrics_csv(&metrics_path)?
            .into_iter()
            .filter(|m| m.epoch <= ckpt.epochs)
            .collect(),
        _ => Vec::new(),
    };
    let mut writer = MetricsWriter::create(&outputs.file(&metrics_path)?)?;
    for m in &earlier {
        writer.append(m)?;
    }

    println!(
        "training on {} sequences ({} validation), {} parameters",
        dataset.train.len(),
        dataset.validation.len(),
        ccid_core::nn::ModelParams::zeros(model).num_parameters()
    );
    let total = config.epochs;
    let mut on_epoch = |m: &EpochMetrics| {
        print_epoch(m, total);
        writer.append(m)
    };
    let outcome = match start {
        Some(ckpt) => trainer::resume(&dataset, ckpt, &config, &mut on_epoch)?,
        None => trainer::train(&dataset, model, &config, &mut on_epoch)?,
    };
    println!(
        "initial train_loss {:.6}  val_loss {:.6}",
        outcome.initial_train.mean_loss, outcome.initial_val.mean_loss
    );

    outcome.last.write(&outputs.file(&out.join("last.ckpt"))?)?;
    if let Some(best) = &outcome.best {
        best.write(&outputs.file(&out.join("best.ckpt"))?)?;
        println!("best validation loss at epoch {}", best.epochs);
    }
    let mut manifest = RunManifest::new(NAME, &args)?;
    manifest.seed("train", args.seed);
    manifest.seed("dataset", dataset.seed);
    manifest.inputs.push(dataset_path);
    manifest.inputs.extend(args.resume.clone());
    manifest.write(&out.join("manifest.json"), &mut outputs, started)?;
    outputs.commit();
    println!("wrote {}", out.display());
    Ok(())
}
