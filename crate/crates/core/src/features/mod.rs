//! Trace CSVs to train/validation/test sequence sets.
//!
//! The pipeline order is smooth → balance → window → split → normalise.
//! Balancing happens on record pools before windowing, splitting happens on
//! sequences (or on whole flows when requested).

mod balance;
mod dataset;
mod pipeline;
mod smooth;
mod split;
mod window;

pub use balance::{apply_balance, balance, BalancePlan};
pub use dataset::{decode_dataset, encode_dataset, read_dataset, write_dataset, DATASET_MAGIC, DATASET_VERSION};
pub use pipeline::{build_dataset, BalanceReport, PipelineConfig};
pub use smooth::{fill_smoothed, smooth, DEFAULT_SMOOTH_WINDOW};
pub use split::{fit_normalization, normalize, renormalize, split, DatasetSplit, Normalization, SplitRatios, SplitUnit};
pub use window::{window_sequences, SequenceSample, DEFAULT_SEQ_LEN, N_FEATURES};
