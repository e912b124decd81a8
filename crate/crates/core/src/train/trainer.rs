use rand::seq::SliceRandom;

use super::config::TrainConfig;
use super::eval::{evaluate, Evaluation};
use super::metrics::EpochMetrics;
use super::optim::{adam_step, plateau_schedule, OptimizerState, PlateauState};
use crate::error::{Error, Result};
use crate::features::{DatasetSplit, N_FEATURES};
use crate::nn::{loss_and_grads, Checkpoint, ModelConfig, ModelParams, ResumeState};
use crate::seed::{self, stream};

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// State after the last epoch, including optimizer state for resuming.
    pub last: Checkpoint,
    /// Parameters from the epoch with the lowest validation loss; `None` if a
    /// resumed run never beat the loss it started from.
    pub best: Option<Checkpoint>,
    pub metrics: Vec<EpochMetrics>,
    /// Evaluation-mode results before any update in this run.
    pub initial_train: Evaluation,
    pub initial_val: Evaluation,
}

fn check_dataset(dataset: &DatasetSplit, model: &ModelConfig) -> Result<usize> {
    if dataset.train.is_empty() || dataset.validation.is_empty() {
        return Err(Error::InvalidArgument(
            "training needs nonempty train and validation partitions".into(),
        ));
    }
    if model.input_size != N_FEATURES {
        return Err(Error::Shape(format!(
            "model takes {} features, dataset has {N_FEATURES}",
            model.input_size
        )));
    }
    Ok(dataset.seq_len().unwrap_or(0))
}

/// Trains a freshly initialised model for `config.epochs` epochs.
/// `on_epoch` sees each epoch's metrics as soon as they are known.
pub fn train(
    dataset: &DatasetSplit,
    model: ModelConfig,
    config: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochMetrics) -> Result<()>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let seq_len = check_dataset(dataset, &model)?;
    let start = Checkpoint {
        params: ModelParams::init(model, config.seed)?,
        seq_len,
        normalization: dataset.normalization,
        seed: config.seed,
        epochs: 0,
        resume: None,
    };
    run(dataset, start, config, on_epoch)
}

/// Continues from `checkpoint` until `config.epochs` epochs have been run in
/// total. Optimizer and scheduler state are restored when present.
pub fn resume(
    dataset: &DatasetSplit,
    checkpoint: Checkpoint,
    config: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochMetrics) -> Result<()>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let seq_len = check_dataset(dataset, &checkpoint.params.config)?;
    checkpoint.check_input(seq_len, N_FEATURES)?;
    if checkpoint.normalization != dataset.normalization {
        return Err(Error::InvalidArgument(
            "checkpoint was trained with different normalisation statistics".into(),
        ));
    }
    run(dataset, checkpoint, config, on_epoch)
}

fn run(
    dataset: &DatasetSplit,
    start: Checkpoint,
    config: &TrainConfig,
    on_epoch: &mut dyn FnMut(&EpochMetrics) -> Result<()>,
) -> Result<TrainOutcome> {
    let Checkpoint {
        mut params,
        seq_len,
        normalization,
        seed,
        epochs: first_epoch,
        resume,
    } = start;
    let (mut optimizer, mut scheduler, mut best_val) = match resume {
        Some(r) => (r.optimizer, r.scheduler, r.best_val_loss),
        None => (
            OptimizerState::new(&params, config.learning_rate),
            PlateauState::default(),
            f64::INFINITY,
        ),
    };
    let snapshot = |params: &ModelParams, epochs: usize| Checkpoint {
        params: params.clone(),
        seq_len,
        normalization,
        seed,
        epochs,
        resume: None,
    };

    let initial_train = evaluate(&params, &dataset.train)?;
    let initial_val = evaluate(&params, &dataset.validation)?;
    let mut best = None;
    let mut metrics = Vec::new();
    let n_batches = dataset.train.len().div_ceil(config.batch_size);

    for epoch in first_epoch..config.epochs {
        let context = |batch: usize| move |e: Error| Error::Training {
            epoch: epoch + 1,
            batch,
            source: Box::new(e),
        };
        let mut order: Vec<usize> = (0..dataset.train.len()).collect();
        order.shuffle(&mut seed::rng(seed::derive(seed, &[stream::SHUFFLE, epoch as u64])));
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<(&[f64], usize)> = chunk
                .iter()
                .map(|&i| (dataset.train[i].flat(), dataset.train[i].label.index()))
                .collect();
            let dropout_seed = seed::derive(seed, &[stream::DROPOUT, epoch as u64, b as u64]);
            let (_, mut grads) = loss_and_grads(&params, &batch, true, dropout_seed).map_err(context(b))?;
            if let Some(max) = config.max_grad_norm {
                let norm = grads.l2_norm();
                if norm > max {
                    grads.scale(max / norm);
                }
            }
            adam_step(&mut params, &grads, &mut optimizer, config.adam()).map_err(context(b))?;
        }
        let train_eval = evaluate(&params, &dataset.train).map_err(context(n_batches))?;
        let val_eval = evaluate(&params, &dataset.validation).map_err(context(n_batches))?;
        optimizer.lr = plateau_schedule(
            &mut scheduler,
            val_eval.mean_loss,
            optimizer.lr,
            config.plateau_factor,
            config.plateau_patience,
        );
        let m = EpochMetrics {
            epoch: epoch + 1,
            train_loss: train_eval.mean_loss,
            val_loss: val_eval.mean_loss,
            train_acc: train_eval.accuracy,
            val_acc: val_eval.accuracy,
            lr: optimizer.lr,
        };
        if val_eval.mean_loss < best_val {
            best_val = val_eval.mean_loss;
            best = Some(snapshot(&params, epoch + 1));
        }
        on_epoch(&m)?;
        metrics.push(m);
    }

    let epochs = first_epoch.max(config.epochs);
    let mut last = snapshot(&params, epochs);
    last.resume = Some(ResumeState {
        optimizer,
        scheduler,
        best_val_loss: best_val,
    });
    Ok(TrainOutcome {
        last,
        best,
        metrics,
        initial_train,
        initial_val,
    })
}
