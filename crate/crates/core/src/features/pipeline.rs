use std::collections::BTreeMap;
use std::fmt;

use super::balance::{apply_balance, balance};
use super::smooth::{fill_smoothed, DEFAULT_SMOOTH_WINDOW};
use super::split::{split, DatasetSplit, SplitRatios, SplitUnit};
use super::window::{window_sequences, DEFAULT_SEQ_LEN};
use crate::error::Result;
use crate::label::ProtocolLabel;
use crate::trace::FlowTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub seq_len: usize,
    pub stride: usize,
    pub smooth_window: usize,
    pub ratios: SplitRatios,
    pub seed: u64,
    pub unit: SplitUnit,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seq_len: DEFAULT_SEQ_LEN,
            stride: DEFAULT_SEQ_LEN,
            smooth_window: DEFAULT_SMOOTH_WINDOW,
            ratios: SplitRatios::default(),
            seed: 0,
            unit: SplitUnit::Sequence,
        }
    }
}

/// Per-class counts around the balancing step, indexed by class index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceReport {
    pub flows: [usize; 4],
    pub records_before: [usize; 4],
    pub records_after: [usize; 4],
    pub sequences: [usize; 4],
}

impl fmt::Display for BalanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let total: usize = self.records_before.iter().sum();
        write!(f, "{:<12}", "Protocol:")?;
        for l in ProtocolLabel::ALL {
            write!(f, "{:>12}", l.display_name())?;
        }
        writeln!(f)?;
        let row = |f: &mut fmt::Formatter<'_>, name: &str, v: &[usize; 4]| -> fmt::Result {
            write!(f, "{name:<12}")?;
            for n in v {
                write!(f, "{n:>12}")?;
            }
            writeln!(f)
        };
        row(f, "Flows:", &self.flows)?;
        row(f, "Samples:", &self.records_before)?;
        write!(f, "{:<12}", "% of total")?;
        for n in self.records_before {
            let pct = if total > 0 { 100.0 * n as f64 / total as f64 } else { 0.0 };
            write!(f, "{:>11.1}%", pct)?;
        }
        writeln!(f)?;
        row(f, "Balanced:", &self.records_after)?;
        row(f, "Sequences:", &self.sequences)
    }
}

/// Smooths, balances, windows, splits and normalises a set of traces.
///
/// Traces are ordered by `(label, source id)` before pooling, so the result
/// does not depend on the order they were read in.
pub fn build_dataset(
    mut traces: Vec<(String, FlowTrace)>,
    config: &PipelineConfig,
) -> Result<(DatasetSplit, BalanceReport)> {
    traces.sort_by(|a, b| (a.1.label, &a.0).cmp(&(b.1.label, &b.0)));
    for (_, trace) in traces.iter_mut() {
        fill_smoothed(trace, config.smooth_window);
    }

    let mut flows = [0usize; 4];
    let mut pools: BTreeMap<ProtocolLabel, usize> = BTreeMap::new();
    for (_, t) in &traces {
        flows[t.label.index()] += 1;
        *pools.entry(t.label).or_default() += t.records.len();
    }
    let records_before = ProtocolLabel::ALL.map(|l| pools.get(&l).copied().unwrap_or(0));
    let plan = balance(&pools)?;
    let kept = apply_balance(traces, &plan);
    let records_after = ProtocolLabel::ALL.map(|l| plan.get(&l).copied().unwrap_or(0));

    let mut samples = Vec::new();
    let mut sequences = [0usize; 4];
    for (source, trace) in &kept {
        let windows = window_sequences(trace, source, config.seq_len, config.stride)?;
        sequences[trace.label.index()] += windows.len();
        samples.extend(windows);
    }
    let dataset = split(samples, config.ratios, config.seed, config.unit)?;
    Ok((
        dataset,
        BalanceReport {
            flows,
            records_before,
            records_after,
            sequences,
        },
    ))
}
