use crate::error::{Error, Result};
use crate::label::ProtocolLabel;
use crate::trace::FlowTrace;

pub const N_FEATURES: usize = 5;
pub const DEFAULT_SEQ_LEN: usize = 60;

/// A fixed-length window of feature rows (size, max window, throughput,
/// smoothed throughput, RTT). Time is never a feature.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSample {
    pub rows: Vec<[f64; N_FEATURES]>,
    pub label: ProtocolLabel,
    pub source_id: String,
}

impl SequenceSample {
    pub fn seq_len(&self) -> usize {
        self.rows.len()
    }

    /// Row-major `seq_len × N_FEATURES` view.
    pub fn flat(&self) -> &[f64] {
        self.rows.as_flattened()
    }
}

/// Cuts a trace into windows starting at `0, stride, 2·stride, …`. A trailing
/// partial window is discarded; a trace shorter than `length` yields nothing.
pub fn window_sequences(
    trace: &FlowTrace,
    source_id: &str,
    length: usize,
    stride: usize,
) -> Result<Vec<SequenceSample>> {
    if length == 0 || stride == 0 {
        return Err(Error::InvalidArgument("window length and stride must be at least 1".into()));
    }
    let rows: Vec<[f64; N_FEATURES]> = trace.records.iter().map(|r| r.features()).collect();
    if rows.len() < length {
        return Ok(Vec::new());
    }
    Ok((0..=rows.len() - length)
        .step_by(stride)
        .map(|start| SequenceSample {
            rows: rows[start..start + length].to_vec(),
            label: trace.label,
            source_id: source_id.to_string(),
        })
        .collect())
}
