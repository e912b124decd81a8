use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::window::{SequenceSample, N_FEATURES};
use crate::error::{Error, Result};
use crate::label::ProtocolLabel;
use crate::seed::{self, stream};

/// Smallest per-class count for which the split is attempted.
pub const MIN_SAMPLES_PER_CLASS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.7,
            validation: 0.1,
            test: 0.2,
        }
    }
}

/// Whether windows of one flow may land in different partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitUnit {
    #[default]
    Sequence,
    Flow,
}

/// Per-feature z-score statistics (population standard deviation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub mean: [f64; N_FEATURES],
    pub std: [f64; N_FEATURES],
}

impl Normalization {
    pub fn identity() -> Self {
        Self {
            mean: [0.0; N_FEATURES],
            std: [1.0; N_FEATURES],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<SequenceSample>,
    pub validation: Vec<SequenceSample>,
    pub test: Vec<SequenceSample>,
    /// Fitted on the raw train partition; every partition above is already
    /// normalised with it.
    pub normalization: Normalization,
    pub seed: u64,
    pub unit: SplitUnit,
}

impl DatasetSplit {
    pub fn seq_len(&self) -> Option<usize> {
        self.train
            .iter()
            .chain(&self.validation)
            .chain(&self.test)
            .map(SequenceSample::seq_len)
            .next()
    }
}

pub fn fit_normalization(samples: &[SequenceSample]) -> Normalization {
    let mut sum = [0.0; N_FEATURES];
    let mut count = 0usize;
    for row in samples.iter().flat_map(|s| &s.rows) {
        for (acc, v) in sum.iter_mut().zip(row) {
            *acc += v;
        }
        count += 1;
    }
    if count == 0 {
        return Normalization::identity();
    }
    let mean = sum.map(|s| s / count as f64);
    let mut sq = [0.0; N_FEATURES];
    for row in samples.iter().flat_map(|s| &s.rows) {
        for ((acc, v), m) in sq.iter_mut().zip(row).zip(&mean) {
            *acc += (v - m) * (v - m);
        }
    }
    Normalization {
        mean,
        std: sq.map(|s| (s / count as f64).sqrt()),
    }
}

/// Z-scores every column. A column with zero spread is only centred.
pub fn normalize(sample: &SequenceSample, stats: &Normalization) -> SequenceSample {
    let rows = sample
        .rows
        .iter()
        .map(|row| {
            let mut out = [0.0; N_FEATURES];
            for j in 0..N_FEATURES {
                let centred = row[j] - stats.mean[j];
                out[j] = if stats.std[j] > 0.0 { centred / stats.std[j] } else { centred };
            }
            out
        })
        .collect();
    SequenceSample {
        rows,
        label: sample.label,
        source_id: sample.source_id.clone(),
    }
}

/// Re-expresses a sample normalised with `from` in terms of `to`.
pub fn renormalize(sample: &SequenceSample, from: &Normalization, to: &Normalization) -> SequenceSample {
    let mut raw = sample.clone();
    for row in &mut raw.rows {
        for ((v, std), mean) in row.iter_mut().zip(&from.std).zip(&from.mean) {
            let scale = if *std > 0.0 { *std } else { 1.0 };
            *v = *v * scale + mean;
        }
    }
    normalize(&raw, to)
}

fn partition_sizes(n: usize, ratios: &SplitRatios) -> (usize, usize) {
    let train = ((n as f64) * ratios.train).round() as usize;
    let validation = (((n as f64) * ratios.validation).round() as usize).min(n - train.min(n));
    (train.min(n), validation)
}

/// Stratified split after a seeded per-class shuffle, then normalisation
/// fitted on the train partition.
pub fn split(samples: Vec<SequenceSample>, ratios: SplitRatios, seed: u64, unit: SplitUnit) -> Result<DatasetSplit> {
    let total = ratios.train + ratios.validation + ratios.test;
    if (total - 1.0).abs() > 1e-9 || ratios.train < 0.0 || ratios.validation < 0.0 || ratios.test < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "split ratios must be nonnegative and sum to 1 (got {total})"
        )));
    }

    let mut by_label: BTreeMap<ProtocolLabel, Vec<SequenceSample>> = BTreeMap::new();
    for s in samples {
        by_label.entry(s.label).or_default().push(s);
    }
    for (&label, group) in &by_label {
        if group.len() < MIN_SAMPLES_PER_CLASS {
            return Err(Error::TooFewSamples {
                label,
                count: group.len(),
                min: MIN_SAMPLES_PER_CLASS,
            });
        }
    }

    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    for (label, mut group) in by_label {
        let mut rng = seed::rng(seed::derive(seed, &[stream::SPLIT, label.index() as u64]));
        let (n_train, n_val) = partition_sizes(group.len(), &ratios);
        match unit {
            SplitUnit::Sequence => {
                group.shuffle(&mut rng);
                let rest = group.split_off(n_train);
                let (val, tst) = {
                    let mut rest = rest;
                    let tst = rest.split_off(n_val);
                    (rest, tst)
                };
                train.extend(group);
                validation.extend(val);
                test.extend(tst);
            }
            SplitUnit::Flow => {
                let mut flows: BTreeMap<String, Vec<SequenceSample>> = BTreeMap::new();
                for s in group {
                    flows.entry(s.source_id.clone()).or_default().push(s);
                }
                let mut flows: Vec<Vec<SequenceSample>> = flows.into_values().collect();
                flows.shuffle(&mut rng);
                let (mut got_train, mut got_val) = (0, 0);
                for flow in flows {
                    if got_train < n_train {
                        got_train += flow.len();
                        train.extend(flow);
                    } else if got_val < n_val {
                        got_val += flow.len();
                        validation.extend(flow);
                    } else {
                        test.extend(flow);
                    }
                }
            }
        }
    }

    let normalization = fit_normalization(&train);
    let apply = |v: Vec<SequenceSample>| v.iter().map(|s| normalize(s, &normalization)).collect();
    Ok(DatasetSplit {
        train: apply(train),
        validation: apply(validation),
        test: apply(test),
        normalization,
        seed,
        unit,
    })
}
