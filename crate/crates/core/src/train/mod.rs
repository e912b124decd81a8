//! Adam, reduce-on-plateau scheduling, the training loop and evaluation.

mod config;
mod eval;
mod metrics;
mod optim;
mod trainer;

pub use config::TrainConfig;
pub use eval::{evaluate, evaluate_checkpoint, Evaluation};
pub use metrics::{
    metrics_to_csv, parse_metrics_csv, read_metrics_csv, EpochMetrics, MetricsWriter, METRICS_HEADER,
};
pub use optim::{adam_step, plateau_schedule, AdamHyper, OptimizerState, PlateauState, PLATEAU_THRESHOLD};
pub use trainer::{resume, train, TrainOutcome};
