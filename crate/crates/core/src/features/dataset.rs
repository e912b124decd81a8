//! Dataset container.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic        8 bytes  "CCIDDSET"
//! version      u32      1
//! seed         u64
//! split unit   u8       0 = sequence, 1 = flow
//! seq_len      u32
//! n_features   u32      5
//! mean         n_features × f64
//! std          n_features × f64
//! partitions   3 × { count u64, count × sample }   train, validation, test
//! sample       label u8 (0 vegas, 1 reno, 2 cubic, 3 bbr)
//!              source id (u32 byte length + UTF-8)
//!              seq_len × n_features f64, row-major, normalised
//! ```

use std::fs;
use std::path::Path;

use super::split::{DatasetSplit, Normalization, SplitUnit};
use super::window::{SequenceSample, N_FEATURES};
use crate::binio::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::label::ProtocolLabel;

pub const DATASET_MAGIC: &[u8; 8] = b"CCIDDSET";
pub const DATASET_VERSION: u32 = 1;

pub fn encode_dataset(d: &DatasetSplit) -> Result<Vec<u8>> {
    let seq_len = d.seq_len().unwrap_or(0);
    let mut w = ByteWriter::default();
    w.bytes(DATASET_MAGIC);
    w.u32(DATASET_VERSION);
    w.u64(d.seed);
    w.u8(match d.unit {
        SplitUnit::Sequence => 0,
        SplitUnit::Flow => 1,
    });
    w.u32(seq_len as u32);
    w.u32(N_FEATURES as u32);
    w.f64s(&d.normalization.mean);
    w.f64s(&d.normalization.std);
    for part in [&d.train, &d.validation, &d.test] {
        w.len_u64(part.len());
        for s in part {
            if s.seq_len() != seq_len {
                return Err(Error::Shape(format!(
                    "sample from {} has {} rows, expected {seq_len}",
                    s.source_id,
                    s.seq_len()
                )));
            }
            w.u8(s.label.index() as u8);
            w.str(&s.source_id);
            w.f64s(s.flat());
        }
    }
    Ok(w.buf)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<DatasetSplit> {
    let mut r = ByteReader::new(bytes);
    if r.take(8).ok() != Some(DATASET_MAGIC.as_slice()) {
        return Err(Error::Format("not a dataset file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != DATASET_VERSION {
        return Err(Error::Format(format!("unsupported dataset version {version}")));
    }
    let seed = r.u64()?;
    let unit = match r.u8()? {
        0 => SplitUnit::Sequence,
        1 => SplitUnit::Flow,
        other => return Err(Error::Format(format!("unknown split unit {other}"))),
    };
    let seq_len = r.u32()? as usize;
    let n_features = r.u32()? as usize;
    if n_features != N_FEATURES {
        return Err(Error::Shape(format!("dataset has {n_features} features, expected {N_FEATURES}")));
    }
    let mut normalization = Normalization::identity();
    for v in normalization.mean.iter_mut() {
        *v = r.f64()?;
    }
    for v in normalization.std.iter_mut() {
        *v = r.f64()?;
    }
    let mut parts = Vec::with_capacity(3);
    for _ in 0..3 {
        let n = r.len_u64()?;
        let mut part = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let label = ProtocolLabel::from_index(r.u8()? as usize)?;
            let source_id = r.str()?;
            let flat = r.f64s(seq_len * N_FEATURES)?;
            let rows = flat
                .chunks_exact(N_FEATURES)
                .map(|c| {
                    let mut row = [0.0; N_FEATURES];
                    row.copy_from_slice(c);
                    row
                })
                .collect();
            part.push(SequenceSample { rows, label, source_id });
        }
        parts.push(part);
    }
    r.expect_end()?;
    let test = parts.pop().unwrap_or_default();
    let validation = parts.pop().unwrap_or_default();
    let train = parts.pop().unwrap_or_default();
    Ok(DatasetSplit {
        train,
        validation,
        test,
        normalization,
        seed,
        unit,
    })
}

pub fn write_dataset(d: &DatasetSplit, path: &Path) -> Result<()> {
    let bytes = encode_dataset(d)?;
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_dataset(path: &Path) -> Result<DatasetSplit> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    decode_dataset(&bytes)
}
